/* Futex wait/wake accounting.
 *
 * Attach points: tracepoints syscalls:sys_enter_futex and
 * syscalls:sys_exit_futex.  Wait-class ops accrue futex_wait_time /
 * futex_wait_count (timeouts included); wake-class ops count one
 * futex_wake_count when the return value says at least one thread woke.
 */

#include "common.bpf.h"

#define FUTEX_WAIT 0
#define FUTEX_WAKE 1
#define FUTEX_REQUEUE 3
#define FUTEX_CMP_REQUEUE 4
#define FUTEX_LOCK_PI 6
#define FUTEX_UNLOCK_PI 7
#define FUTEX_WAIT_BITSET 9
#define FUTEX_WAKE_BITSET 10
#define FUTEX_WAIT_REQUEUE_PI 11
#define FUTEX_CMD_MASK (~(128 | 256))

#define PEND_NONE 0
#define PEND_WAIT 1
#define PEND_WAKE 2

struct futex_pending {
    __u32 cls;
    __u32 _pad;
    __u64 start_ns;
    __u64 uaddr;
};

struct bpf_map_def SEC("maps") futex_pendings = {
    .type = BPF_MAP_TYPE_HASH,
    .key_size = sizeof(__u32), /* tid */
    .value_size = sizeof(struct futex_pending),
    .max_entries = 65536,
};

/* tracepoint format: syscalls:sys_enter_futex */
struct enter_futex_ctx {
    __u64 _common;
    __s32 nr;
    __u32 _pad;
    __u64 uaddr;
    __u64 op;
    __u64 val;
    __u64 utime;
    __u64 uaddr2;
    __u64 val3;
};

struct exit_futex_ctx {
    __u64 _common;
    __s32 nr;
    __u32 _pad;
    __s64 ret;
};

static __u32 classify(__u64 op)
{
    __u64 cmd = op & FUTEX_CMD_MASK;
    switch (cmd) {
    case FUTEX_WAIT:
    case FUTEX_WAIT_BITSET:
    case FUTEX_LOCK_PI:
    case FUTEX_WAIT_REQUEUE_PI:
        return PEND_WAIT;
    case FUTEX_WAKE:
    case FUTEX_WAKE_BITSET:
    case FUTEX_UNLOCK_PI:
    case FUTEX_REQUEUE:
    case FUTEX_CMP_REQUEUE:
        return PEND_WAKE;
    default:
        return PEND_NONE;
    }
}

SEC("tracepoint/syscalls/sys_enter_futex")
int on_futex_enter(struct enter_futex_ctx *ctx)
{
    __u32 tgid = cur_tgid();
    __u32 tid = cur_tid();
    struct futex_pending pend;
    __u32 cls;

    if (!in_scope(tgid))
        return 0;
    cls = classify(ctx->op);
    if (cls == PEND_NONE)
        return 0;
    pend.cls = cls;
    pend._pad = 0;
    pend.start_ns = bpf_ktime_get_ns();
    pend.uaddr = ctx->uaddr;
    bpf_map_update_elem(&futex_pendings, &tid, &pend, BPF_ANY);
    return 0;
}

SEC("tracepoint/syscalls/sys_exit_futex")
int on_futex_exit(struct exit_futex_ctx *ctx)
{
    __u32 tgid = cur_tgid();
    __u32 tid = cur_tid();
    struct futex_pending *pend = bpf_map_lookup_elem(&futex_pendings, &tid);
    struct metric_key key;

    if (!pend)
        return 0;
    if (pend->cls == PEND_WAIT) {
        __u64 dur = bpf_ktime_get_ns() - pend->start_ns;
        key_init(&key, tgid, tid, M_FUTEX_WAIT_TIME);
        key.res_kind = R_FUTEX;
        key.res_a = tgid;
        key.res_b = pend->uaddr;
        metric_add(&key, dur);
        key.metric = M_FUTEX_WAIT_COUNT;
        metric_add(&key, 1);
    } else if (pend->cls == PEND_WAKE && ctx->ret >= 1) {
        key_init(&key, tgid, tid, M_FUTEX_WAKE_COUNT);
        key.res_kind = R_FUTEX;
        key.res_a = tgid;
        key.res_b = pend->uaddr;
        metric_add(&key, 1);
    }
    bpf_map_delete_elem(&futex_pendings, &tid);
    return 0;
}

char _license[] SEC("license") = "GPL";
