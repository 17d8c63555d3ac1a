/* Block-layer IO volume accounting.
 *
 * Attach point: tracepoint block:block_rq_issue.  Every issued request adds
 * its sector count under the (major, minor) device resource.  Unlike the
 * other programs this one accounts globally — per-device totals across all
 * thread groups are needed to compute each target's share of device traffic,
 * so the scope filter only decides whether the tgid/tid fields are kept or
 * zeroed (foreign traffic is pooled under tgid 0).
 */

#include "common.bpf.h"

/* tracepoint format: block:block_rq_issue */
struct block_rq_issue_ctx {
    __u64 _common;
    __u32 dev; /* encoded (major << 20) | minor */
    __u64 sector;
    __u32 nr_sector;
    __u32 bytes;
    char rwbs[8];
    char comm[16];
    /* dynamic cmd array follows; unused */
};

SEC("tracepoint/block/block_rq_issue")
int on_block_rq_issue(struct block_rq_issue_ctx *ctx)
{
    __u32 tgid = cur_tgid();
    __u32 tid = cur_tid();
    struct metric_key key;

    if (!ctx->nr_sector)
        return 0;
    if (!in_scope(tgid)) {
        tgid = 0;
        tid = 0;
    }
    key_init(&key, tgid, tid, M_SECTOR_COUNT);
    key.res_kind = R_DEVICE;
    key.res_a = ctx->dev >> 20;
    key.res_b = ctx->dev & ((1u << 20) - 1);
    metric_add(&key, ctx->nr_sector);
    return 0;
}

char _license[] SEC("license") = "GPL";
