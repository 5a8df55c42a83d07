#include "egtw/dit/tokenizers.hpp"

#include <algorithm>
#include <cmath>

#include "egtw/core/error.hpp"

namespace egtw::dit {

namespace {
constexpr int kSpatial = 8;
}

int video_latent_frames(int raw_frame_count) {
    if (raw_frame_count < 2) throw ValidationError("video tokenizer: need at least 2 frames");
    const int n_v = raw_frame_count - 1;
    return (n_v + 3) / 4 + 1;
}

nn::Tensor video_to_latent(const std::vector<synth::Image>& frames) {
    const int F_raw = static_cast<int>(frames.size());
    const int F = video_latent_frames(F_raw);
    const int W = frames[0].width, H = frames[0].height;
    if (W % kSpatial != 0 || H % kSpatial != 0)
        throw ValidationError("video tokenizer: image size must be divisible by 8");
    const int h8 = H / kSpatial, w8 = W / kSpatial;

    // spatial 8x average pooling into [-1, 1]
    auto pool = [&](const synth::Image& img) {
        nn::Tensor p({h8, w8, 3});
        for (int y = 0; y < h8; ++y)
            for (int x = 0; x < w8; ++x)
                for (int c = 0; c < 3; ++c) {
                    double sum = 0;
                    for (int dy = 0; dy < kSpatial; ++dy)
                        for (int dx = 0; dx < kSpatial; ++dx)
                            sum += img.pixel(x * kSpatial + dx, y * kSpatial + dy)[c];
                    p.data[static_cast<std::size_t>((y * w8 + x) * 3 + c)] =
                        sum / (kSpatial * kSpatial) / 127.5 - 1.0;
                }
        return p;
    };

    nn::Tensor latent({F, h8, w8, 3});
    const std::int64_t frame_sz = static_cast<std::int64_t>(h8) * w8 * 3;
    // latent frame 0 = frame 0
    {
        const nn::Tensor p = pool(frames[0]);
        std::copy(p.data.begin(), p.data.end(), latent.data.begin());
    }
    const int n_v = F_raw - 1;
    for (int l = 1; l < F; ++l) {
        const int lo = 4 * (l - 1) + 1;
        const int hi = std::min(4 * l, n_v);
        std::vector<double> acc(static_cast<std::size_t>(frame_sz), 0.0);
        for (int f = lo; f <= hi; ++f) {
            const nn::Tensor p = pool(frames[static_cast<std::size_t>(f)]);
            for (std::int64_t i = 0; i < frame_sz; ++i) acc[static_cast<std::size_t>(i)] += p.data[static_cast<std::size_t>(i)];
        }
        const double inv = 1.0 / (hi - lo + 1);
        for (std::int64_t i = 0; i < frame_sz; ++i)
            latent.data[static_cast<std::size_t>(l * frame_sz + i)] = acc[static_cast<std::size_t>(i)] * inv;
    }
    return latent;
}

std::vector<synth::Image> latent_to_video(const nn::Tensor& latent, int raw_frame_count) {
    if (latent.rank() != 4 || latent.dim(3) != 3) throw ValidationError("latent_to_video: expected (F, H8, W8, 3)");
    const int F = static_cast<int>(latent.dim(0));
    if (video_latent_frames(raw_frame_count) != F)
        throw ValidationError("latent_to_video: frame count mismatch");
    const int h8 = static_cast<int>(latent.dim(1)), w8 = static_cast<int>(latent.dim(2));
    const std::int64_t frame_sz = static_cast<std::int64_t>(h8) * w8 * 3;

    auto expand = [&](int l) {
        synth::Image img(w8 * kSpatial, h8 * kSpatial);
        for (int y = 0; y < h8 * kSpatial; ++y)
            for (int x = 0; x < w8 * kSpatial; ++x)
                for (int c = 0; c < 3; ++c) {
                    const double v =
                        latent.data[static_cast<std::size_t>(l * frame_sz + ((y / kSpatial) * w8 + x / kSpatial) * 3 + c)];
                    const double clamped = std::clamp((v + 1.0) * 127.5, 0.0, 255.0);
                    img.pixel(x, y)[c] = static_cast<std::uint8_t>(std::lround(clamped));
                }
        return img;
    };

    std::vector<synth::Image> frames;
    frames.push_back(expand(0));
    for (int f = 1; f < raw_frame_count; ++f) frames.push_back(expand(std::min((f - 1) / 4 + 1, F - 1)));
    return frames;
}

nn::Tensor patchify(const nn::Tensor& latent, int patch) {
    if (latent.rank() != 4) throw ValidationError("patchify: expected (F, H8, W8, C)");
    const std::int64_t F = latent.dim(0), H = latent.dim(1), W = latent.dim(2), C = latent.dim(3);
    if (H % patch != 0 || W % patch != 0) throw ValidationError("patchify: grid not divisible by patch");
    const std::int64_t gh = H / patch, gw = W / patch;
    const std::int64_t token_dim = static_cast<std::int64_t>(patch) * patch * C;
    nn::Tensor tokens({F * gh * gw, token_dim});
    std::int64_t row = 0;
    for (std::int64_t f = 0; f < F; ++f)
        for (std::int64_t by = 0; by < gh; ++by)
            for (std::int64_t bx = 0; bx < gw; ++bx, ++row) {
                std::int64_t col = 0;
                for (int py = 0; py < patch; ++py)
                    for (int px = 0; px < patch; ++px)
                        for (std::int64_t c = 0; c < C; ++c, ++col)
                            tokens.data[static_cast<std::size_t>(row * token_dim + col)] =
                                latent.data[static_cast<std::size_t>(
                                    ((f * H + by * patch + py) * W + bx * patch + px) * C + c)];
            }
    return tokens;
}

nn::Tensor unpatchify(const nn::Tensor& tokens, int frames, int h8, int w8, int channels, int patch) {
    const std::int64_t gh = h8 / patch, gw = w8 / patch;
    const std::int64_t token_dim = static_cast<std::int64_t>(patch) * patch * channels;
    if (tokens.rank() != 2 || tokens.dim(0) != frames * gh * gw || tokens.dim(1) != token_dim)
        throw ValidationError("unpatchify: token shape mismatch");
    nn::Tensor latent({frames, h8, w8, channels});
    std::int64_t row = 0;
    for (std::int64_t f = 0; f < frames; ++f)
        for (std::int64_t by = 0; by < gh; ++by)
            for (std::int64_t bx = 0; bx < gw; ++bx, ++row) {
                std::int64_t col = 0;
                for (int py = 0; py < patch; ++py)
                    for (int px = 0; px < patch; ++px)
                        for (std::int64_t c = 0; c < channels; ++c, ++col)
                            latent.data[static_cast<std::size_t>(
                                ((f * h8 + by * patch + py) * w8 + bx * patch + px) * channels + c)] =
                                tokens.data[static_cast<std::size_t>(row * token_dim + col)];
            }
    return latent;
}

} // namespace egtw::dit
