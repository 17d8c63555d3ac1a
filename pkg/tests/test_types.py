import pytest

from kprism import events as EV
from kprism.types import (
    BackingResourceId,
    DeviceRef,
    FutexRef,
    MetricKind,
    ResourceKind,
    SocketEndpoint,
    ThreadRef,
    bri_from_epoll_object,
    bri_from_inode,
    render_epoll_file_pair,
)


def test_thread_ref_identity_ignores_comm():
    a = ThreadRef(10, 11, comm="worker-0")
    b = ThreadRef(10, 11, comm="worker-1")
    assert a == b
    assert hash(a) == hash(b)


@pytest.mark.parametrize("tgid,tid", [(0, 1), (1, 0), (-1, 5)])
def test_thread_ref_rejects_nonpositive_ids(tgid, tid):
    with pytest.raises(ValueError):
        ThreadRef(tgid, tid)


def test_bri_render_dev_ino():
    bri = bri_from_inode(ResourceKind.PIPE, 14, 2159682)
    assert bri.render() == "14_2159682"


def test_bri_equality_by_kind_dev_ino():
    a = bri_from_inode(ResourceKind.PIPE, 14, 42)
    b = bri_from_inode(ResourceKind.PIPE, 14, 42)
    c = bri_from_inode(ResourceKind.REGULAR_FILE, 14, 42)
    assert a == b
    assert a != c


def test_epoll_bri_renders_hex_address():
    bri = bri_from_epoll_object(0xFFFF9A7A3F5E1740)
    assert bri.render() == "ffff9a7a3f5e1740"


def test_epoll_bri_requires_object_address():
    with pytest.raises(ValueError):
        bri_from_epoll_object(0)
    with pytest.raises(ValueError):
        bri_from_inode(ResourceKind.EPOLL, 1, 2)
    with pytest.raises(ValueError):
        BackingResourceId(kind=ResourceKind.EPOLL, dev=1, ino=2, object_addr=3)
    with pytest.raises(ValueError):
        BackingResourceId(kind=ResourceKind.PIPE, object_addr=3)


def test_futex_ref_render():
    assert FutexRef(1234, 0x76D594012F30).render() == "1234:0x76d594012f30"


def test_device_ref_render():
    assert DeviceRef(259, 0).render() == "259:0"


def test_epoll_file_pair_render():
    pair = render_epoll_file_pair(
        bri_from_epoll_object(0xFFFF9A7A3F5E1740),
        bri_from_inode(ResourceKind.PIPE, 14, 2159682),
    )
    assert pair == "ffff9a7a3f5e1740→14_2159682"


def test_endpoint_mirroring():
    a = SocketEndpoint("inet", "10.0.0.1", "10.0.0.2", 43000, 9000)
    b = SocketEndpoint("inet", "10.0.0.2", "10.0.0.1", 9000, 43000)
    c = SocketEndpoint("inet", "10.0.0.2", "10.0.0.1", 9001, 43000)
    assert a.mirrors(b) and b.mirrors(a)
    assert not a.mirrors(c)
    u1 = SocketEndpoint("unix", path="/run/app.sock")
    u2 = SocketEndpoint("unix", path="/run/app.sock")
    assert u1.mirrors(u2)
    assert not u1.mirrors(SocketEndpoint("unix", path=""))
    assert not a.mirrors(u1)


def test_metric_kind_catalogue_is_complete():
    assert {m.value for m in MetricKind} == {
        "runtime",
        "rq_time",
        "block_time",
        "iowait_time",
        "sleep_time",
        "pipe_wait_time",
        "pipe_wait_count",
        "socket_wait_time",
        "socket_wait_count",
        "sector_count",
        "epoll_wait_time",
        "epoll_wait_count",
        "epoll_file_wait",
        "futex_wait_time",
        "futex_wait_count",
        "futex_wake_count",
    }


@pytest.mark.parametrize(
    "op,expected",
    [
        (EV.FUTEX_WAIT, "wait"),
        (EV.FUTEX_WAIT | EV.FUTEX_PRIVATE_FLAG, "wait"),
        (EV.FUTEX_WAIT_BITSET | EV.FUTEX_CLOCK_REALTIME, "wait"),
        (EV.FUTEX_LOCK_PI, "wait"),
        (EV.FUTEX_WAIT_REQUEUE_PI, "wait"),
        (EV.FUTEX_WAKE, "wake"),
        (EV.FUTEX_WAKE | EV.FUTEX_PRIVATE_FLAG, "wake"),
        (EV.FUTEX_WAKE_BITSET, "wake"),
        (EV.FUTEX_UNLOCK_PI, "wake"),
        (EV.FUTEX_REQUEUE, "wake"),
        (EV.FUTEX_CMP_REQUEUE, "wake"),
        (EV.FUTEX_WAKE_OP, "other"),
        (EV.FUTEX_TRYLOCK_PI, "other"),
        (EV.FUTEX_CMP_REQUEUE_PI, "other"),
    ],
)
def test_classify_futex_op(op, expected):
    assert EV.classify_futex_op(op) == expected
