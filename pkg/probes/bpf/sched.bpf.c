/* Scheduler state accounting: runtime / rq_time / sleep_time / block_time
 * (+ iowait_time inside uninterruptible sleep).
 *
 * Attach points: tracepoints sched:sched_switch, sched:sched_wakeup,
 * sched:sched_process_exit.
 */

#include "common.bpf.h"

#define S_UNKNOWN 0
#define S_RUNNING 1
#define S_RUNNABLE 2
#define S_SLEEP_INT 3
#define S_SLEEP_UNINT 4

/* task state bits from the sched_switch prev_state field */
#define TASK_INTERRUPTIBLE 0x0001
#define TASK_UNINTERRUPTIBLE 0x0002
#define TASK_NOLOAD 0x0400 /* idle kthreads: uninterruptible but not blocked */

struct sched_state {
    __u32 state;
    __u32 iowait;
    __u64 since_ns;
};

struct bpf_map_def SEC("maps") sched_states = {
    .type = BPF_MAP_TYPE_HASH,
    .key_size = sizeof(__u32), /* tid */
    .value_size = sizeof(struct sched_state),
    .max_entries = 65536,
};

/* tracepoint format: sched:sched_switch */
struct sched_switch_ctx {
    __u64 _common;
    char prev_comm[16];
    __s32 prev_pid;
    __s32 prev_prio;
    __s64 prev_state;
    char next_comm[16];
    __s32 next_pid;
    __s32 next_prio;
};

struct sched_wakeup_ctx {
    __u64 _common;
    char comm[16];
    __s32 pid;
    __s32 prio;
    __s32 success;
    __s32 target_cpu;
};

static void close_span(__u32 tgid, __u32 tid, struct sched_state *st, __u64 now)
{
    static const __u16 metric_for[5] = {
        0, M_RUNTIME, M_RQ_TIME, M_SLEEP_TIME, M_BLOCK_TIME,
    };
    struct metric_key key;
    __u64 dur;

    if (st->state == S_UNKNOWN || st->since_ns >= now)
        return;
    dur = now - st->since_ns;
    key_init(&key, tgid, tid, metric_for[st->state & 7]);
    metric_add(&key, dur);
    if (st->state == S_SLEEP_UNINT && st->iowait) {
        key.metric = M_IOWAIT_TIME;
        metric_add(&key, dur);
    }
}

static struct sched_state *state_of(__u32 tid, __u64 now)
{
    struct sched_state *st = bpf_map_lookup_elem(&sched_states, &tid);
    if (!st) {
        struct sched_state fresh = { S_UNKNOWN, 0, now };
        bpf_map_update_elem(&sched_states, &tid, &fresh, BPF_ANY);
        st = bpf_map_lookup_elem(&sched_states, &tid);
    }
    return st;
}

SEC("tracepoint/sched/sched_switch")
int on_sched_switch(struct sched_switch_ctx *ctx)
{
    __u64 now = bpf_ktime_get_ns();
    __u32 prev_tid = ctx->prev_pid;
    __u32 next_tid = ctx->next_pid;
    __u32 tgid = cur_tgid(); /* switch runs in prev's context */
    struct sched_state *st;

    if (prev_tid && in_scope(tgid)) {
        st = state_of(prev_tid, now);
        if (st) {
            close_span(tgid, prev_tid, st, now);
            if (ctx->prev_state == 0) {
                st->state = S_RUNNABLE; /* preempted */
                st->iowait = 0;
            } else if (ctx->prev_state & TASK_INTERRUPTIBLE) {
                st->state = S_SLEEP_INT;
                st->iowait = 0;
            } else if ((ctx->prev_state & TASK_UNINTERRUPTIBLE) &&
                       !(ctx->prev_state & TASK_NOLOAD)) {
                st->state = S_SLEEP_UNINT;
                /* task->in_iowait via loader-configured offset from the
                 * current task struct; 0 when the offset is unavailable */
                st->iowait = read_in_iowait();
            } else {
                st->state = S_UNKNOWN;
                st->iowait = 0;
            }
        }
    }

    if (next_tid) {
        st = bpf_map_lookup_elem(&sched_states, &next_tid);
        if (st) {
            /* tgid of next is resolved in userspace via the tid map; spans
             * here key on the tid owner recorded at wakeup time */
            close_span(cur_tgid(), next_tid, st, now);
            st->state = S_RUNNING;
            st->iowait = 0;
            st->since_ns = now;
        }
    }
    if (prev_tid) {
        st = bpf_map_lookup_elem(&sched_states, &prev_tid);
        if (st)
            st->since_ns = now;
    }
    return 0;
}

SEC("tracepoint/sched/sched_wakeup")
int on_sched_wakeup(struct sched_wakeup_ctx *ctx)
{
    __u64 now = bpf_ktime_get_ns();
    __u32 tid = ctx->pid;
    struct sched_state *st = bpf_map_lookup_elem(&sched_states, &tid);

    if (!st)
        return 0;
    if (st->state == S_SLEEP_INT || st->state == S_SLEEP_UNINT ||
        st->state == S_UNKNOWN) {
        close_span(cur_tgid(), tid, st, now);
        st->state = S_RUNNABLE;
        st->iowait = 0;
        st->since_ns = now;
    }
    return 0;
}

SEC("tracepoint/sched/sched_process_exit")
int on_sched_exit(void *ctx)
{
    __u64 now = bpf_ktime_get_ns();
    __u32 tid = cur_tid();
    __u32 tgid = cur_tgid();
    struct sched_state *st = bpf_map_lookup_elem(&sched_states, &tid);

    if (st && in_scope(tgid))
        close_span(tgid, tid, st, now);
    bpf_map_delete_elem(&sched_states, &tid);
    return 0;
}

char _license[] SEC("license") = "GPL";
