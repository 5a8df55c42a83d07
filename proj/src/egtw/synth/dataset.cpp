#include "egtw/synth/dataset.hpp"

#include <memory>

#include "egtw/core/container.hpp"
#include "egtw/core/error.hpp"
#include "egtw/core/rng.hpp"

namespace egtw::synth {

namespace {

ChunkMap sample_to_chunks(const Sample& s) {
    ChunkMap map;
    map.add_string("text", s.text);
    const int F = static_cast<int>(s.video.size());
    const int H = s.video[0].height;
    const int W = s.video[0].width;
    std::vector<std::uint8_t> video;
    video.reserve(static_cast<std::size_t>(F) * H * W * 3);
    for (const auto& img : s.video) video.insert(video.end(), img.rgb.begin(), img.rgb.end());
    map.add_u8("video", {F, H, W, 3}, std::move(video));
    kin::motion_to_chunks(s.motion, map, "motion/");
    metrics::trajectory_to_chunks(s.gt_camera, map, "camera/");
    return map;
}

Sample sample_from_chunks(const ChunkMap& map, const kin::Skeleton& skeleton) {
    Sample s;
    s.text = map.string("text");
    const auto& video = map.at("video");
    const int F = static_cast<int>(video.dims.at(0));
    const int H = static_cast<int>(video.dims.at(1));
    const int W = static_cast<int>(video.dims.at(2));
    const std::size_t stride = static_cast<std::size_t>(H) * W * 3;
    for (int f = 0; f < F; ++f) {
        Image img(W, H);
        std::copy(video.u8.begin() + static_cast<std::ptrdiff_t>(f * stride),
                  video.u8.begin() + static_cast<std::ptrdiff_t>((f + 1) * stride), img.rgb.begin());
        s.video.push_back(std::move(img));
    }
    s.motion = kin::motion_from_chunks(map, "motion/", &skeleton);
    s.gt_camera = metrics::trajectory_from_chunks(map, "camera/");
    return s;
}

ChunkMap dataset_header(const kin::Skeleton& skeleton, const SampleConfig& config) {
    ChunkMap header;
    kin::skeleton_to_chunks(skeleton, header, "skeleton/");
    header.add_f64("intrinsics", {6},
                   {config.intrinsics.fx, config.intrinsics.fy, config.intrinsics.cx, config.intrinsics.cy,
                    static_cast<double>(config.intrinsics.width), static_cast<double>(config.intrinsics.height)});
    std::vector<double> mount(12);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) mount[static_cast<std::size_t>(3 * r + c)] = config.mount.rotation(r, c);
    mount[9] = config.mount.offset.x();
    mount[10] = config.mount.offset.y();
    mount[11] = config.mount.offset.z();
    header.add_f64("mount", {12}, std::move(mount));
    header.add_f64("rates", {3},
                   {config.video_fps, config.motion_fps, static_cast<double>(config.video_frames)});
    return header;
}

void parse_header(const ChunkMap& header, kin::Skeleton& skeleton, SampleConfig& config) {
    skeleton = kin::skeleton_from_chunks(header, "skeleton/");
    const auto& intr = header.at("intrinsics");
    config.intrinsics.fx = intr.f64.at(0);
    config.intrinsics.fy = intr.f64.at(1);
    config.intrinsics.cx = intr.f64.at(2);
    config.intrinsics.cy = intr.f64.at(3);
    config.intrinsics.width = static_cast<int>(intr.f64.at(4));
    config.intrinsics.height = static_cast<int>(intr.f64.at(5));
    const auto& mount = header.at("mount");
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) config.mount.rotation(r, c) = mount.f64.at(static_cast<std::size_t>(3 * r + c));
    config.mount.offset = {mount.f64.at(9), mount.f64.at(10), mount.f64.at(11)};
    const auto& rates = header.at("rates");
    config.video_fps = rates.f64.at(0);
    config.motion_fps = rates.f64.at(1);
    config.video_frames = static_cast<int>(rates.f64.at(2));
    config.validate();
}

} // namespace

void write_samples(const std::string& path, const kin::Skeleton& skeleton,
                   const SampleConfig& config, const std::vector<Sample>& samples) {
    DatasetWriter writer(path, static_cast<std::int64_t>(samples.size()), dataset_header(skeleton, config));
    for (const auto& s : samples) writer.write_sample(sample_to_chunks(s));
    writer.finish();
}

void generate_dataset(const DatasetGenConfig& config, const kin::Skeleton& skeleton,
                      const std::string& out_path) {
    if (config.count < 1) throw ValidationError("dataset: count must be >= 1");
    if (config.templates.empty()) throw ValidationError("dataset: no templates given");
    config.sample.validate();

    std::vector<Sample> samples;
    for (int i = 0; i < config.count; ++i) {
        const auto kind =
            template_kind_from_name(config.templates[static_cast<std::size_t>(i) % config.templates.size()]);
        const std::uint64_t sample_seed = Rng(config.motion_seed).split("sample").seed() + static_cast<std::uint64_t>(i);
        const std::uint64_t scene_seed =
            config.scene_per_sample ? config.scene_seed + static_cast<std::uint64_t>(i) : config.scene_seed;
        const SceneSpec scene = SceneSpec::random(scene_seed);
        const MotionTemplate tmpl = randomized_template(kind, sample_seed);
        samples.push_back(generate_sample(scene, tmpl, skeleton, config.sample, sample_seed));
    }
    write_samples(out_path, skeleton, config.sample, samples);
}

struct Dataset::ReaderHolder {
    DatasetReader reader;
    explicit ReaderHolder(const std::string& path) : reader(path) {}
};

Dataset::Dataset(const std::string& path) : path_(path), reader_(std::make_shared<ReaderHolder>(path)) {
    parse_header(reader_->reader.header(), skeleton_, config_);
}

std::int64_t Dataset::size() const {
    return reader_->reader.sample_count();
}

Sample Dataset::sample(std::int64_t index) const {
    return sample_from_chunks(reader_->reader.read_sample(index), skeleton_);
}

std::uint64_t Dataset::content_hash() const {
    return file_hash(path_);
}

} // namespace egtw::synth
