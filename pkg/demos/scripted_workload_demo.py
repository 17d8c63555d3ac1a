#!/usr/bin/env python3
"""Scripted workload with known per-second behaviour.

Alternates 0.5 s of busy CPU with 0.5 s of sleep every second, giving a
reference timeline (runtime ~= sleep_time ~= 0.5 s per interval) to compare
live kernel summaries against.
"""

import argparse
import time


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seconds", type=int, default=5)
    args = ap.parse_args()

    for _ in range(args.seconds):
        end = time.monotonic() + 0.5
        x = 0
        while time.monotonic() < end:
            x = (x * 1103515245 + 12345) & 0xFFFFFFFF
        time.sleep(0.5)


if __name__ == "__main__":
    main()
