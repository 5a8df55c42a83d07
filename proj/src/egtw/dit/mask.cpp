#include "egtw/dit/mask.hpp"

#include <algorithm>
#include <fstream>

#include "egtw/core/error.hpp"

namespace egtw::dit {

namespace {

struct Interval {
    int lo = 0;
    int hi = -1; // empty when hi < lo
    bool empty() const { return hi < lo; }
    bool overlaps(const Interval& o) const { return !empty() && !o.empty() && lo <= o.hi && o.lo <= hi; }
};

} // namespace

nn::AttentionMask build_interaction_mask(const TokenLayout& layout, int compression, int rate_ratio) {
    layout.validate();
    if (compression < 1 || rate_ratio < 1) throw ValidationError("mask: bad compression or rate ratio");
    const int n = layout.total_tokens();
    nn::AttentionMask mask = nn::AttentionMask::all_allowed(n);
    if (layout.video_frames == 0 || layout.motion_len == 0) return mask; // nothing to structure

    const int c = compression;
    const int f_m = layout.motion_len;
    const int f_v = layout.video_frames;
    const int n_m = c * (f_m - 1); // motion latents follow the exact N/c + 1 convention
    if (n_m % rate_ratio != 0)
        throw ValidationError("mask: motion frames not divisible by the rate ratio");
    const int n_v = n_m / rate_ratio;
    const int expected_f_v = (n_v + c - 1) / c + 1;
    if (f_v != expected_f_v)
        throw ValidationError("mask: video latent length inconsistent with compression and rate ratio");

    // per-latent raw index intervals
    std::vector<Interval> obs(static_cast<std::size_t>(f_v));
    for (int lv = 0; lv < f_v; ++lv) {
        obs[static_cast<std::size_t>(lv)] =
            lv == 0 ? Interval{0, 0} : Interval{c * (lv - 1) + 1, std::min(c * lv, n_v)};
    }
    std::vector<Interval> act(static_cast<std::size_t>(f_m)); // action indices i of A^i
    for (int lm = 1; lm < f_m; ++lm) {
        const int m_lo = c * (lm - 1) + 1;
        const int m_hi = std::min(c * lm, n_m);
        // A^i covers pose frames 2i+1 and 2i+2
        const int a_lo = std::max(0, (m_lo - 1) / 2);      // ceil((m_lo - 2) / 2)
        const int a_hi = std::min(n_v - 1, (m_hi - 1) / 2); // floor((m_hi - 1) / 2)
        act[static_cast<std::size_t>(lm)] = Interval{a_lo, a_hi};
    }
    act[0] = Interval{0, -1}; // initial pose, no actions

    // latent-level permissions
    std::vector<std::uint8_t> video_to_motion(static_cast<std::size_t>(f_v * f_m), 0);
    std::vector<std::uint8_t> motion_to_video(static_cast<std::size_t>(f_m * f_v), 0);
    for (int lv = 0; lv < f_v; ++lv) {
        const Interval& o = obs[static_cast<std::size_t>(lv)];
        // observations O^i with i >= 1 arise from A^{i-1}
        const Interval wanted{std::max(o.lo, 1) - 1, o.hi - 1};
        for (int lm = 0; lm < f_m; ++lm)
            if (wanted.overlaps(act[static_cast<std::size_t>(lm)]))
                video_to_motion[static_cast<std::size_t>(lv * f_m + lm)] = 1;
    }
    for (int lm = 0; lm < f_m; ++lm) {
        const Interval& a = act[static_cast<std::size_t>(lm)];
        if (a.empty()) continue;
        // A^i reads the transition O^i -> O^{i+1}
        const Interval wanted{a.lo, a.hi + 1};
        for (int lv = 0; lv < f_v; ++lv)
            if (wanted.overlaps(obs[static_cast<std::size_t>(lv)]))
                motion_to_video[static_cast<std::size_t>(lm * f_v + lv)] = 1;
    }
    // the initial observation and initial pose see each other
    video_to_motion[0] = 1;
    motion_to_video[0] = 1;

    // lift to token level: all spatial tokens of a latent frame share its row
    const int vb = layout.video_begin();
    const int mb = layout.motion_begin();
    for (int vq = 0; vq < layout.video_tokens(); ++vq) {
        const int lv = layout.video_latent_frame(vq);
        for (int mk = 0; mk < f_m; ++mk)
            mask.set(vb + vq, mb + mk, video_to_motion[static_cast<std::size_t>(lv * f_m + mk)] != 0);
    }
    for (int mq = 0; mq < f_m; ++mq) {
        for (int vk = 0; vk < layout.video_tokens(); ++vk) {
            const int lv = layout.video_latent_frame(vk);
            mask.set(mb + mq, vb + vk, motion_to_video[static_cast<std::size_t>(mq * f_v + lv)] != 0);
        }
    }
    return mask;
}

nn::AttentionMask full_attention_mask(const TokenLayout& layout) {
    layout.validate();
    return nn::AttentionMask::all_allowed(layout.total_tokens());
}

void apply_text_padding(nn::AttentionMask& mask, const TokenLayout& layout, int valid_text_len) {
    if (valid_text_len < 0 || valid_text_len > layout.text_len)
        throw ValidationError("padding: valid length out of range");
    for (int k = valid_text_len; k < layout.text_len; ++k) {
        for (int q = 0; q < layout.total_tokens(); ++q) mask.set(q, k, q == k);
    }
}

void dump_mask_csv(const nn::AttentionMask& mask, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open for writing: " + path);
    for (std::int64_t q = 0; q < mask.n; ++q) {
        for (std::int64_t k = 0; k < mask.n; ++k) {
            if (k) os << ',';
            os << (mask.allowed(q, k) ? 1 : 0);
        }
        os << '\n';
    }
}

void dump_mask_pgm(const nn::AttentionMask& mask, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path);
    os << "P5\n" << mask.n << ' ' << mask.n << "\n255\n";
    for (std::int64_t q = 0; q < mask.n; ++q)
        for (std::int64_t k = 0; k < mask.n; ++k)
            os.put(mask.allowed(q, k) ? static_cast<char>(255) : static_cast<char>(0));
}

} // namespace egtw::dit
