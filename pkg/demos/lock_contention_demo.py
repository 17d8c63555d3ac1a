#!/usr/bin/env python3
"""Mutex contention demo: one holder, N waiters on a shared lock.

The holder keeps the lock busy for the contention phase, then releases it so
the tail of the run shows near-zero futex wait.  Threads contend on a single
lock, so all waiters block on one futex address.
"""

import argparse
import threading
import time


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--waiters", type=int, default=2)
    ap.add_argument("--contended-s", type=float, default=4.0)
    ap.add_argument("--quiet-s", type=float, default=2.0)
    args = ap.parse_args()

    lock = threading.Lock()
    stop = time.monotonic() + args.contended_s + args.quiet_s
    contention_end = time.monotonic() + args.contended_s

    def holder():
        while time.monotonic() < contention_end:
            with lock:
                # hold long, release briefly: waiters spend most time blocked
                time.sleep(0.09)
            time.sleep(0.01)

    def waiter():
        while time.monotonic() < stop:
            with lock:
                pass
            time.sleep(0.001)

    threads = [threading.Thread(target=holder)]
    threads += [threading.Thread(target=waiter) for _ in range(args.waiters)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()


if __name__ == "__main__":
    main()
