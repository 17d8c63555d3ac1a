/* Shared definitions for the kernel probe programs.
 *
 * The programs are written in a restricted, self-contained eBPF dialect:
 * no kernel headers, helpers declared by number, legacy map definitions,
 * bounded loops only.  Kernel struct offsets that would normally come from
 * CO-RE/BTF are supplied by the loader through the `offsets` config map, so
 * the objects stay portable across kernel builds.
 *
 * Binary interface (must match userspace `src/layout.ts`):
 *   metric_key  40 bytes, metric/resource ids below
 *   value       __u64 cumulative accumulator (saturating)
 *   discovery   fixed-width records pushed through the `discovery` ringbuf
 */

#ifndef KPRISM_COMMON_BPF_H
#define KPRISM_COMMON_BPF_H

typedef unsigned char __u8;
typedef unsigned short __u16;
typedef unsigned int __u32;
typedef unsigned long long __u64;
typedef signed char __s8;
typedef short __s16;
typedef int __s32;
typedef long long __s64;

#define SEC(name) __attribute__((section(name), used))
#define __inl inline __attribute__((always_inline))

/* map types (linux/bpf.h values) */
#define BPF_MAP_TYPE_HASH 1
#define BPF_MAP_TYPE_ARRAY 2
#define BPF_MAP_TYPE_PERCPU_HASH 5
#define BPF_MAP_TYPE_RINGBUF 27

#define BPF_ANY 0

struct bpf_map_def {
    __u32 type;
    __u32 key_size;
    __u32 value_size;
    __u32 max_entries;
    __u32 map_flags;
};

/* helpers, by id */
static void *(*bpf_map_lookup_elem)(void *map, const void *key) = (void *) 1;
static long (*bpf_map_update_elem)(void *map, const void *key, const void *value,
                                   __u64 flags) = (void *) 2;
static long (*bpf_map_delete_elem)(void *map, const void *key) = (void *) 3;
static __u64 (*bpf_ktime_get_ns)(void) = (void *) 5;
static __u64 (*bpf_get_current_pid_tgid)(void) = (void *) 14;
static long (*bpf_get_current_comm)(void *buf, __u32 size) = (void *) 16;
static __u64 (*bpf_get_current_task)(void) = (void *) 35;
static long (*bpf_probe_read_user)(void *dst, __u32 size, const void *src) = (void *) 112;
static long (*bpf_probe_read_kernel)(void *dst, __u32 size, const void *src) = (void *) 113;
static long (*bpf_ringbuf_output)(void *ringbuf, void *data, __u64 size,
                                  __u64 flags) = (void *) 130;

/* ---- metric ids (wire order, see layout.ts) ---- */
#define M_RUNTIME 0
#define M_RQ_TIME 1
#define M_BLOCK_TIME 2
#define M_IOWAIT_TIME 3
#define M_SLEEP_TIME 4
#define M_PIPE_WAIT_TIME 5
#define M_PIPE_WAIT_COUNT 6
#define M_SOCKET_WAIT_TIME 7
#define M_SOCKET_WAIT_COUNT 8
#define M_SECTOR_COUNT 9
#define M_EPOLL_WAIT_TIME 10
#define M_EPOLL_WAIT_COUNT 11
#define M_EPOLL_FILE_WAIT 12
#define M_FUTEX_WAIT_TIME 13
#define M_FUTEX_WAIT_COUNT 14
#define M_FUTEX_WAKE_COUNT 15

/* ---- resource kinds ---- */
#define R_NONE 0
#define R_INODE 1      /* res_a = dev, res_b = ino */
#define R_EPOLL 2      /* res_a = eventpoll object address */
#define R_FUTEX 3      /* res_a = tgid, res_b = uaddr */
#define R_DEVICE 4     /* res_a = major, res_b = minor */
#define R_EPOLL_FILE 5 /* res_a = eventpoll address, res_b = dev, res_c = ino */

struct metric_key {
    __u32 tgid;
    __u32 tid;
    __u16 metric;
    __u16 res_kind;
    __u32 _pad;
    __u64 res_a;
    __u64 res_b;
    __u64 res_c;
}; /* 40 bytes */

/* accumulators: sharded per CPU, summed in userspace once per second */
struct bpf_map_def SEC("maps") metrics = {
    .type = BPF_MAP_TYPE_PERCPU_HASH,
    .key_size = sizeof(struct metric_key),
    .value_size = sizeof(__u64),
    .max_entries = 262144,
};

/* target scope: tgid -> 1; block IO is accounted regardless of scope */
struct bpf_map_def SEC("maps") scope = {
    .type = BPF_MAP_TYPE_HASH,
    .key_size = sizeof(__u32),
    .value_size = sizeof(__u8),
    .max_entries = 4096,
};

/* kernel struct offsets, filled by the loader from BTF (indexes below) */
#define OFF_FILE_F_INODE 0
#define OFF_INODE_I_MODE 1
#define OFF_INODE_I_INO 2
#define OFF_INODE_I_SB 3
#define OFF_SB_S_DEV 4
#define OFF_SOCK_SK 5
#define OFF_SK_FAMILY 6
#define OFF_SOCKET_FILE 7
#define OFF_TASK_IN_IOWAIT 8
#define OFF_EPITEM_FFD_FILE 9
#define OFF_EPITEM_EP 10
#define OFF_RQ_DISK 11
#define OFF_MAX 16

struct bpf_map_def SEC("maps") offsets = {
    .type = BPF_MAP_TYPE_ARRAY,
    .key_size = sizeof(__u32),
    .value_size = sizeof(__u64),
    .max_entries = OFF_MAX,
};

/* discovery events (endpoints, pipe BRI sightings) to userspace */
struct bpf_map_def SEC("maps") discovery = {
    .type = BPF_MAP_TYPE_RINGBUF,
    .key_size = 0,
    .value_size = 0,
    .max_entries = 1 << 20,
};

#define D_ENDPOINT 1
#define D_PIPE_BRI 2

struct discovery_rec {
    __u8 kind;    /* D_* */
    __u8 family;  /* 2 = inet, 10 = inet6, 1 = unix */
    __u8 proto;
    __u8 _pad;
    __u32 tgid;
    __u32 tid;
    __u32 dev;
    __u64 ino;
    __u8 src[16]; /* addr bytes, v4-mapped when inet */
    __u8 dst[16];
    __u16 sport;
    __u16 dport;
    __u8 path[64]; /* unix path, NUL padded */
}; /* 128 bytes (4 bytes tail padding) */

/* minimal x86-64 pt_regs for kprobe argument access */
struct pt_regs {
    __u64 r15, r14, r13, r12, bp, bx, r11, r10, r9, r8;
    __u64 ax, cx, dx, si, di, orig_ax, ip, cs, flags, sp, ss;
};
#define PT_ARG1(r) ((r)->di)
#define PT_ARG2(r) ((r)->si)
#define PT_ARG3(r) ((r)->dx)
#define PT_RET(r) ((r)->ax)

static __inl __u32 cur_tgid(void) { return bpf_get_current_pid_tgid() >> 32; }
static __inl __u32 cur_tid(void) { return (__u32) bpf_get_current_pid_tgid(); }

static __inl int in_scope(__u32 tgid)
{
    return bpf_map_lookup_elem(&scope, &tgid) != 0;
}

static __inl __u64 read_off(__u32 idx)
{
    __u64 *v = bpf_map_lookup_elem(&offsets, &idx);
    return v ? *v : 0;
}

/* current task's in_iowait bit; 0 when the loader left the offset unset */
static __inl __u32 read_in_iowait(void)
{
    __u64 off = read_off(OFF_TASK_IN_IOWAIT);
    __u8 flag = 0;

    if (!off)
        return 0;
    if (bpf_probe_read_kernel(&flag, sizeof(flag),
                              (const char *) bpf_get_current_task() + off))
        return 0;
    return flag & 1;
}

/* saturating accumulate */
static __inl void metric_add(struct metric_key *key, __u64 delta)
{
    __u64 *cur = bpf_map_lookup_elem(&metrics, key);
    if (cur) {
        __u64 next = *cur + delta;
        if (next < *cur)
            next = (__u64) -1;
        *cur = next;
    } else {
        bpf_map_update_elem(&metrics, key, &delta, BPF_ANY);
    }
}

static __inl void key_init(struct metric_key *key, __u32 tgid, __u32 tid, __u16 metric)
{
    key->tgid = tgid;
    key->tid = tid;
    key->metric = metric;
    key->res_kind = R_NONE;
    key->_pad = 0;
    key->res_a = 0;
    key->res_b = 0;
    key->res_c = 0;
}

#endif /* KPRISM_COMMON_BPF_H */
