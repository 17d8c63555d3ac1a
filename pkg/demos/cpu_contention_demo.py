#!/usr/bin/env python3
"""Runqueue pressure demo: N busy-loop processes pinned to one CPU.

Processes (not threads) sidestep the GIL so each loop really burns CPU; with
all of them pinned to core 0 each should be runnable-but-waiting roughly
(N-1)/N of the time.
"""

import argparse
import multiprocessing
import os
import time


def burn(seconds):
    if hasattr(os, "sched_setaffinity"):
        os.sched_setaffinity(0, {0})
    end = time.monotonic() + seconds
    x = 0
    while time.monotonic() < end:
        x = (x * 1103515245 + 12345) & 0xFFFFFFFF


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--seconds", type=float, default=5.0)
    args = ap.parse_args()

    procs = [
        multiprocessing.Process(target=burn, args=(args.seconds,))
        for _ in range(args.workers)
    ]
    for p in procs:
        p.start()
    for p in procs:
        p.join()


if __name__ == "__main__":
    main()
