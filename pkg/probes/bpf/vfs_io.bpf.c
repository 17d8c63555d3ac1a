/* FIFO and socket IO wait accounting.
 *
 * Attach points: kprobe+kretprobe on vfs_read and vfs_write (FIFO files),
 * sock_recvmsg, and the inet/inet6/unix sendmsg entry points.  The entry
 * probe resolves the file's backing resource (dev, ino) through loader-
 * supplied struct offsets and parks it in the per-tid pending slot; the
 * return probe accrues wait time and count and emits endpoint discovery.
 */

#include "common.bpf.h"

#define S_IFMT 0170000
#define S_IFIFO 0010000
#define S_IFSOCK 0140000

#define AF_UNIX 1
#define AF_INET 2
#define AF_INET6 10

#define PEND_PIPE 1
#define PEND_SOCK 2

struct io_pending {
    __u32 cls;
    __u32 family;
    __u64 start_ns;
    __u64 dev;
    __u64 ino;
};

struct bpf_map_def SEC("maps") io_pendings = {
    .type = BPF_MAP_TYPE_HASH,
    .key_size = sizeof(__u32), /* tid */
    .value_size = sizeof(struct io_pending),
    .max_entries = 65536,
};

struct inode_id {
    __u64 dev;
    __u64 ino;
    __u16 mode;
};

/* file* -> (s_dev, i_ino, i_mode) through loader-provided offsets */
static int resolve_file(const void *file, struct inode_id *out)
{
    void *inode = 0;
    void *sb = 0;
    __u32 sdev = 0;

    if (bpf_probe_read_kernel(&inode, sizeof(inode),
                              (const char *) file + read_off(OFF_FILE_F_INODE)))
        return -1;
    if (!inode)
        return -1;
    if (bpf_probe_read_kernel(&out->mode, sizeof(out->mode),
                              (const char *) inode + read_off(OFF_INODE_I_MODE)))
        return -1;
    if (bpf_probe_read_kernel(&out->ino, sizeof(out->ino),
                              (const char *) inode + read_off(OFF_INODE_I_INO)))
        return -1;
    if (bpf_probe_read_kernel(&sb, sizeof(sb),
                              (const char *) inode + read_off(OFF_INODE_I_SB)))
        return -1;
    if (bpf_probe_read_kernel(&sdev, sizeof(sdev),
                              (const char *) sb + read_off(OFF_SB_S_DEV)))
        return -1;
    out->dev = sdev;
    return 0;
}

static void begin_io(const void *file, __u32 want_fifo)
{
    __u32 tgid = cur_tgid();
    __u32 tid = cur_tid();
    struct inode_id id;
    struct io_pending pend;

    if (!in_scope(tgid))
        return;
    if (resolve_file(file, &id))
        return;
    if (want_fifo) {
        if ((id.mode & S_IFMT) != S_IFIFO)
            return;
        pend.cls = PEND_PIPE;
        pend.family = 0;
        /* FIFO sighting: lets the collector link the peer thread group */
        {
            struct discovery_rec rec = {};
            rec.kind = D_PIPE_BRI;
            rec.tgid = tgid;
            rec.tid = tid;
            rec.dev = (__u32) id.dev;
            rec.ino = id.ino;
            bpf_ringbuf_output(&discovery, &rec, sizeof(rec), 0);
        }
    } else {
        if ((id.mode & S_IFMT) != S_IFSOCK)
            return;
        pend.cls = PEND_SOCK;
        pend.family = 0; /* filled by the socket entry probes below */
    }
    pend.start_ns = bpf_ktime_get_ns();
    pend.dev = id.dev;
    pend.ino = id.ino;
    bpf_map_update_elem(&io_pendings, &tid, &pend, BPF_ANY);
}

static void end_io(__u32 cls)
{
    __u32 tgid = cur_tgid();
    __u32 tid = cur_tid();
    struct io_pending *pend = bpf_map_lookup_elem(&io_pendings, &tid);
    struct metric_key key;
    __u64 dur;

    if (!pend || pend->cls != cls)
        return;
    dur = bpf_ktime_get_ns() - pend->start_ns;
    key_init(&key, tgid, tid,
             cls == PEND_PIPE ? M_PIPE_WAIT_TIME : M_SOCKET_WAIT_TIME);
    key.res_kind = R_INODE;
    key.res_a = pend->dev;
    key.res_b = pend->ino;
    metric_add(&key, dur);
    key.metric = cls == PEND_PIPE ? M_PIPE_WAIT_COUNT : M_SOCKET_WAIT_COUNT;
    metric_add(&key, 1);
    bpf_map_delete_elem(&io_pendings, &tid);
}

SEC("kprobe/vfs_read")
int on_vfs_read(struct pt_regs *regs)
{
    begin_io((const void *) PT_ARG1(regs), 1);
    return 0;
}

SEC("kretprobe/vfs_read")
int on_vfs_read_ret(struct pt_regs *regs)
{
    end_io(PEND_PIPE);
    return 0;
}

SEC("kprobe/vfs_write")
int on_vfs_write(struct pt_regs *regs)
{
    begin_io((const void *) PT_ARG1(regs), 1);
    return 0;
}

SEC("kretprobe/vfs_write")
int on_vfs_write_ret(struct pt_regs *regs)
{
    end_io(PEND_PIPE);
    return 0;
}

/* sock_recvmsg(struct socket *sock, struct msghdr *, int flags) */
static void begin_sock(const void *sock)
{
    __u32 tgid = cur_tgid();
    __u32 tid = cur_tid();
    struct io_pending pend;
    struct inode_id id;
    void *file = 0;
    void *sk = 0;
    __u16 family = 0;

    if (!in_scope(tgid))
        return;
    if (bpf_probe_read_kernel(&sk, sizeof(sk),
                              (const char *) sock + read_off(OFF_SOCK_SK)))
        return;
    if (!sk)
        return;
    if (bpf_probe_read_kernel(&family, sizeof(family),
                              (const char *) sk + read_off(OFF_SK_FAMILY)))
        return;
    if (family != AF_INET && family != AF_INET6 && family != AF_UNIX)
        return; /* unsupported family: accrue nothing */
    if (bpf_probe_read_kernel(&file, sizeof(file),
                              (const char *) sock + read_off(OFF_SOCKET_FILE)))
        return;
    if (!file || resolve_file(file, &id))
        return;

    pend.cls = PEND_SOCK;
    pend.family = family;
    pend.start_ns = bpf_ktime_get_ns();
    pend.dev = id.dev;
    pend.ino = id.ino;
    bpf_map_update_elem(&io_pendings, &tid, &pend, BPF_ANY);

    {
        struct discovery_rec rec = {};
        rec.kind = D_ENDPOINT;
        rec.family = (__u8) family;
        rec.tgid = tgid;
        rec.tid = tid;
        rec.dev = (__u32) id.dev;
        rec.ino = id.ino;
        /* address 4-tuple / unix path extraction happens in the loader,
         * which enriches endpoints from /proc/net using (dev, ino) */
        bpf_ringbuf_output(&discovery, &rec, sizeof(rec), 0);
    }
}

SEC("kprobe/sock_recvmsg")
int on_sock_recvmsg(struct pt_regs *regs)
{
    begin_sock((const void *) PT_ARG1(regs));
    return 0;
}

SEC("kretprobe/sock_recvmsg")
int on_sock_recvmsg_ret(struct pt_regs *regs)
{
    end_io(PEND_SOCK);
    return 0;
}

SEC("kprobe/inet_sendmsg")
int on_inet_sendmsg(struct pt_regs *regs)
{
    begin_sock((const void *) PT_ARG1(regs));
    return 0;
}

SEC("kretprobe/inet_sendmsg")
int on_inet_sendmsg_ret(struct pt_regs *regs)
{
    end_io(PEND_SOCK);
    return 0;
}

SEC("kprobe/inet6_sendmsg")
int on_inet6_sendmsg(struct pt_regs *regs)
{
    begin_sock((const void *) PT_ARG1(regs));
    return 0;
}

SEC("kretprobe/inet6_sendmsg")
int on_inet6_sendmsg_ret(struct pt_regs *regs)
{
    end_io(PEND_SOCK);
    return 0;
}

SEC("kprobe/unix_stream_sendmsg")
int on_unix_sendmsg(struct pt_regs *regs)
{
    begin_sock((const void *) PT_ARG1(regs));
    return 0;
}

SEC("kretprobe/unix_stream_sendmsg")
int on_unix_sendmsg_ret(struct pt_regs *regs)
{
    end_io(PEND_SOCK);
    return 0;
}

char _license[] SEC("license") = "GPL";
