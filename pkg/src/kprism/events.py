"""Normalized kernel event vocabulary consumed by the aggregation engine.

Events are plain dicts (the line format of trace files) with at least
``t`` (monotonic ns), ``kind``, ``tgid``, ``tid`` plus kind-specific payload
fields.  Events for one tid must arrive in nondecreasing ``t`` order.
"""

from __future__ import annotations

# Event kinds
SCHED_SWITCH_OUT = "sched_switch_out"
SCHED_SWITCH_IN = "sched_switch_in"
SCHED_WAKEUP = "sched_wakeup"
THREAD_EXIT = "thread_exit"
FIFO_IO_ENTER = "fifo_io_enter"
FIFO_IO_EXIT = "fifo_io_exit"
SOCK_RECV_ENTER = "sock_recv_enter"
SOCK_RECV_EXIT = "sock_recv_exit"
SOCK_SEND_ENTER = "sock_send_enter"
SOCK_SEND_EXIT = "sock_send_exit"
FUTEX_ENTER = "futex_enter"
FUTEX_EXIT = "futex_exit"
POLLFAM_ENTER = "pollfam_enter"
POLLFAM_EXIT = "pollfam_exit"
EPOLL_INSERT = "epoll_insert"
EPOLL_REMOVE = "epoll_remove"
EPOLL_WAIT_ENTER = "epoll_wait_enter"
EPOLL_WAIT_EXIT = "epoll_wait_exit"
BLOCK_REQUEST = "block_request"

ALL_KINDS = frozenset(
    {
        SCHED_SWITCH_OUT,
        SCHED_SWITCH_IN,
        SCHED_WAKEUP,
        THREAD_EXIT,
        FIFO_IO_ENTER,
        FIFO_IO_EXIT,
        SOCK_RECV_ENTER,
        SOCK_RECV_EXIT,
        SOCK_SEND_ENTER,
        SOCK_SEND_EXIT,
        FUTEX_ENTER,
        FUTEX_EXIT,
        POLLFAM_ENTER,
        POLLFAM_EXIT,
        EPOLL_INSERT,
        EPOLL_REMOVE,
        EPOLL_WAIT_ENTER,
        EPOLL_WAIT_EXIT,
        BLOCK_REQUEST,
    }
)

# Previous task state recorded on sched_switch_out.
STATE_RUNNABLE = "runnable"
STATE_INTERRUPTIBLE = "interruptible"
STATE_UNINTERRUPTIBLE = "uninterruptible"

# futex(2) op numbers (flag bits stripped before classification)
FUTEX_WAIT = 0
FUTEX_WAKE = 1
FUTEX_REQUEUE = 3
FUTEX_CMP_REQUEUE = 4
FUTEX_WAKE_OP = 5
FUTEX_LOCK_PI = 6
FUTEX_UNLOCK_PI = 7
FUTEX_TRYLOCK_PI = 8
FUTEX_WAIT_BITSET = 9
FUTEX_WAKE_BITSET = 10
FUTEX_WAIT_REQUEUE_PI = 11
FUTEX_CMP_REQUEUE_PI = 12

FUTEX_PRIVATE_FLAG = 128
FUTEX_CLOCK_REALTIME = 256
_FUTEX_CMD_MASK = ~(FUTEX_PRIVATE_FLAG | FUTEX_CLOCK_REALTIME)

_WAIT_CLASS = frozenset(
    {FUTEX_WAIT, FUTEX_WAIT_BITSET, FUTEX_LOCK_PI, FUTEX_WAIT_REQUEUE_PI}
)
_WAKE_CLASS = frozenset(
    {FUTEX_WAKE, FUTEX_WAKE_BITSET, FUTEX_UNLOCK_PI, FUTEX_REQUEUE, FUTEX_CMP_REQUEUE}
)

OP_WAIT = "wait"
OP_WAKE = "wake"
OP_OTHER = "other"


def classify_futex_op(op: int) -> str:
    """Map a raw futex op argument to wait-class, wake-class or other."""
    cmd = op & _FUTEX_CMD_MASK
    if cmd in _WAIT_CLASS:
        return OP_WAIT
    if cmd in _WAKE_CLASS:
        return OP_WAKE
    return OP_OTHER
