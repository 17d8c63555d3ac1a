/* poll/select family wait accounting.
 *
 * Attach points: kprobe+kretprobe on do_sys_poll and do_select.  The time a
 * thread spends inside either call is charged to epoll_wait_time under the
 * R_NONE resource: the per-file attribution that epoll interest lists allow
 * is not available here, so poll/select waits only contribute to the
 * thread-level wait totals.
 */

#include "common.bpf.h"

struct bpf_map_def SEC("maps") poll_pendings = {
    .type = BPF_MAP_TYPE_HASH,
    .key_size = sizeof(__u32), /* tid */
    .value_size = sizeof(__u64), /* entry timestamp */
    .max_entries = 65536,
};

static void poll_enter(void)
{
    __u32 tgid = cur_tgid();
    __u32 tid = cur_tid();
    __u64 now;

    if (!in_scope(tgid))
        return;
    now = bpf_ktime_get_ns();
    bpf_map_update_elem(&poll_pendings, &tid, &now, BPF_ANY);
}

static void poll_exit(void)
{
    __u32 tgid = cur_tgid();
    __u32 tid = cur_tid();
    __u64 *start = bpf_map_lookup_elem(&poll_pendings, &tid);
    struct metric_key key;

    if (!start)
        return;
    key_init(&key, tgid, tid, M_EPOLL_WAIT_TIME);
    metric_add(&key, bpf_ktime_get_ns() - *start);
    key.metric = M_EPOLL_WAIT_COUNT;
    metric_add(&key, 1);
    bpf_map_delete_elem(&poll_pendings, &tid);
}

SEC("kprobe/do_sys_poll")
int on_do_sys_poll(struct pt_regs *regs)
{
    poll_enter();
    return 0;
}

SEC("kretprobe/do_sys_poll")
int on_do_sys_poll_ret(struct pt_regs *regs)
{
    poll_exit();
    return 0;
}

SEC("kprobe/do_select")
int on_do_select(struct pt_regs *regs)
{
    poll_enter();
    return 0;
}

SEC("kretprobe/do_select")
int on_do_select_ret(struct pt_regs *regs)
{
    poll_exit();
    return 0;
}

char _license[] SEC("license") = "GPL";
