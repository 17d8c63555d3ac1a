#!/usr/bin/env python3
"""Echo-server latency benchmark for the overhead measurement.

Starts a local TCP echo server, announces its tgid (``tgid=<N>``), then sends
N requests and prints one ``latency_ms=<float>`` line per round trip — the
line formats the bench-overhead subcommand parses.
"""

import argparse
import os
import socket
import threading
import time


def serve(sock):
    while True:
        try:
            conn, _ = sock.accept()
        except OSError:
            return
        with conn:
            while True:
                data = conn.recv(4096)
                if not data:
                    break
                conn.sendall(data)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--requests", type=int, default=200)
    ap.add_argument("--payload", type=int, default=64)
    args = ap.parse_args()

    server = socket.socket()
    server.bind(("127.0.0.1", 0))
    server.listen(1)
    port = server.getsockname()[1]
    thread = threading.Thread(target=serve, args=(server,), daemon=True)
    thread.start()

    print(f"tgid={os.getpid()}", flush=True)

    payload = b"x" * args.payload
    client = socket.create_connection(("127.0.0.1", port))
    with client:
        for _ in range(args.requests):
            t0 = time.perf_counter()
            client.sendall(payload)
            got = 0
            while got < len(payload):
                got += len(client.recv(4096))
            print(f"latency_ms={(time.perf_counter() - t0) * 1000:.4f}")
    server.close()


if __name__ == "__main__":
    main()
