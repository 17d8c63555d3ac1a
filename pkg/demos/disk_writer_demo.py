#!/usr/bin/env python3
"""Synchronous disk writer demo: fsync'd appends to a scratch file.

Every write is fsync'd so block-layer requests are issued on this process's
behalf while it runs, making it the dominant sector producer on the device.
"""

import argparse
import os
import time


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("directory", nargs="?", default="/tmp")
    ap.add_argument("--seconds", type=float, default=5.0)
    ap.add_argument("--chunk-kib", type=int, default=64)
    args = ap.parse_args()

    path = os.path.join(args.directory, f"disk_writer_demo.{os.getpid()}.dat")
    chunk = os.urandom(args.chunk_kib * 1024)
    end = time.monotonic() + args.seconds
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    try:
        while time.monotonic() < end:
            os.write(fd, chunk)
            os.fsync(fd)
    finally:
        os.close(fd)
        os.unlink(path)


if __name__ == "__main__":
    main()
