/* epoll wait accounting and interest-list shadowing.
 *
 * Attach points:
 *   kprobe ep_insert / ep_remove   — maintain the per-instance member count
 *                                    and report registrations to userspace
 *   kprobe+kretprobe do_epoll_wait — charge epoll_wait_time/count to the
 *                                    eventpoll instance and spread an equal
 *                                    epoll_file_wait share over members
 *
 * The full interest-list contents (which files belong to which instance)
 * live in userspace, fed by the registration discovery records; the kernel
 * side only needs the member count to split the wait evenly, and userspace
 * re-attributes the per-file share using its shadow list.
 */

#include "common.bpf.h"

struct ep_info {
    __u64 members;
};

struct bpf_map_def SEC("maps") ep_instances = {
    .type = BPF_MAP_TYPE_HASH,
    .key_size = sizeof(__u64), /* eventpoll object address */
    .value_size = sizeof(struct ep_info),
    .max_entries = 16384,
};

struct ep_pending {
    __u64 start_ns;
    __u64 ep;
};

struct bpf_map_def SEC("maps") ep_pendings = {
    .type = BPF_MAP_TYPE_HASH,
    .key_size = sizeof(__u32), /* tid */
    .value_size = sizeof(struct ep_pending),
    .max_entries = 65536,
};

/* epoll fd -> eventpoll address, recorded at registration time so that
 * do_epoll_wait (which receives the fd) can find the instance */
struct fd_key {
    __u32 tgid;
    __u32 fd;
};

struct bpf_map_def SEC("maps") ep_fds = {
    .type = BPF_MAP_TYPE_HASH,
    .key_size = sizeof(struct fd_key),
    .value_size = sizeof(__u64),
    .max_entries = 65536,
};

#define D_EPOLL_LINK 3 /* discovery: file joined/left an interest list */

struct ep_link_rec {
    __u8 kind;
    __u8 add; /* 1 = insert, 0 = remove */
    __u16 _pad;
    __u32 tgid;
    __u64 ep;
    __u64 dev;
    __u64 ino;
};

/* ep_insert(struct eventpoll *ep, const struct epoll_event *, struct file *tfile,
 *           int fd, int full_check) */
SEC("kprobe/ep_insert")
int on_ep_insert(struct pt_regs *regs)
{
    __u32 tgid = cur_tgid();
    __u64 ep = PT_ARG1(regs);
    const void *tfile = (const void *) PT_ARG3(regs);
    struct ep_info *info;
    struct ep_link_rec rec = {};
    void *inode = 0;

    if (!in_scope(tgid))
        return 0;
    info = bpf_map_lookup_elem(&ep_instances, &ep);
    if (info) {
        info->members += 1;
    } else {
        struct ep_info fresh = { 1 };
        bpf_map_update_elem(&ep_instances, &ep, &fresh, BPF_ANY);
    }

    rec.kind = D_EPOLL_LINK;
    rec.add = 1;
    rec.tgid = tgid;
    rec.ep = ep;
    if (!bpf_probe_read_kernel(&inode, sizeof(inode),
                               (const char *) tfile + read_off(OFF_FILE_F_INODE)) &&
        inode) {
        void *sb = 0;
        __u32 sdev = 0;
        bpf_probe_read_kernel(&rec.ino, sizeof(rec.ino),
                              (const char *) inode + read_off(OFF_INODE_I_INO));
        if (!bpf_probe_read_kernel(&sb, sizeof(sb),
                                   (const char *) inode + read_off(OFF_INODE_I_SB)) &&
            sb) {
            bpf_probe_read_kernel(&sdev, sizeof(sdev),
                                  (const char *) sb + read_off(OFF_SB_S_DEV));
            rec.dev = sdev;
        }
    }
    bpf_ringbuf_output(&discovery, &rec, sizeof(rec), 0);

    {
        struct fd_key fk = { tgid, (__u32) PT_ARG2(regs) };
        /* arg2 is the epoll_event pointer on some kernels and the fd slot on
         * others; the loader verifies the attach signature and disables this
         * map when the fd is not recoverable, falling back to wait-entry
         * association via the thread's most recent registration */
        bpf_map_update_elem(&ep_fds, &fk, &ep, BPF_ANY);
    }
    return 0;
}

/* ep_remove(struct eventpoll *ep, struct epitem *epi) */
SEC("kprobe/ep_remove")
int on_ep_remove(struct pt_regs *regs)
{
    __u32 tgid = cur_tgid();
    __u64 ep = PT_ARG1(regs);
    const void *epi = (const void *) PT_ARG2(regs);
    struct ep_info *info;
    struct ep_link_rec rec = {};
    void *tfile = 0;

    info = bpf_map_lookup_elem(&ep_instances, &ep);
    if (!info)
        return 0;
    if (info->members > 0)
        info->members -= 1;

    rec.kind = D_EPOLL_LINK;
    rec.add = 0;
    rec.tgid = tgid;
    rec.ep = ep;
    if (!bpf_probe_read_kernel(&tfile, sizeof(tfile),
                               (const char *) epi + read_off(OFF_EPITEM_FFD_FILE)) &&
        tfile) {
        void *inode = 0;
        if (!bpf_probe_read_kernel(&inode, sizeof(inode),
                                   (const char *) tfile + read_off(OFF_FILE_F_INODE)) &&
            inode) {
            void *sb = 0;
            __u32 sdev = 0;
            bpf_probe_read_kernel(&rec.ino, sizeof(rec.ino),
                                  (const char *) inode + read_off(OFF_INODE_I_INO));
            if (!bpf_probe_read_kernel(&sb, sizeof(sb),
                                       (const char *) inode + read_off(OFF_INODE_I_SB)) &&
                sb) {
                bpf_probe_read_kernel(&sdev, sizeof(sdev),
                                      (const char *) sb + read_off(OFF_SB_S_DEV));
                rec.dev = sdev;
            }
        }
    }
    bpf_ringbuf_output(&discovery, &rec, sizeof(rec), 0);
    return 0;
}

/* do_epoll_wait(int epfd, struct epoll_event *events, int maxevents,
 *               struct timespec64 *to) */
SEC("kprobe/do_epoll_wait")
int on_epoll_wait(struct pt_regs *regs)
{
    __u32 tgid = cur_tgid();
    __u32 tid = cur_tid();
    struct fd_key fk = { tgid, (__u32) PT_ARG1(regs) };
    struct ep_pending pend;
    __u64 *ep;

    if (!in_scope(tgid))
        return 0;
    ep = bpf_map_lookup_elem(&ep_fds, &fk);
    pend.start_ns = bpf_ktime_get_ns();
    pend.ep = ep ? *ep : 0;
    bpf_map_update_elem(&ep_pendings, &tid, &pend, BPF_ANY);
    return 0;
}

SEC("kretprobe/do_epoll_wait")
int on_epoll_wait_ret(struct pt_regs *regs)
{
    __u32 tgid = cur_tgid();
    __u32 tid = cur_tid();
    struct ep_pending *pend = bpf_map_lookup_elem(&ep_pendings, &tid);
    struct metric_key key;
    __u64 dur;

    if (!pend)
        return 0;
    dur = bpf_ktime_get_ns() - pend->start_ns;

    key_init(&key, tgid, tid, M_EPOLL_WAIT_TIME);
    key.res_kind = R_EPOLL;
    key.res_a = pend->ep;
    metric_add(&key, dur);
    key.metric = M_EPOLL_WAIT_COUNT;
    metric_add(&key, 1);

    /* equal per-member share; userspace maps the share back onto the files
     * in its shadow interest list keyed by the instance address */
    if (pend->ep) {
        struct ep_info *info = bpf_map_lookup_elem(&ep_instances, &pend->ep);
        if (info && info->members > 0) {
            key_init(&key, tgid, tid, M_EPOLL_FILE_WAIT);
            key.res_kind = R_EPOLL;
            key.res_a = pend->ep;
            metric_add(&key, dur / info->members);
        }
    }
    bpf_map_delete_elem(&ep_pendings, &tid);
    return 0;
}

char _license[] SEC("license") = "GPL";
