#include "egtw/metrics/trajectory.hpp"

#include "egtw/core/container.hpp"
#include "egtw/core/error.hpp"
#include "egtw/kin/representation.hpp"
#include "egtw/kin/rotation.hpp"

namespace egtw::metrics {

void Se3Trajectory::validate() const {
    for (std::size_t i = 0; i < poses.size(); ++i) {
        if (!kin::is_rotation_matrix(poses[i].rotation))
            throw ValidationError("trajectory: pose rotation is not orthonormal");
        if (!poses[i].position.allFinite()) throw ValidationError("trajectory: non-finite position");
        if (i > 0 && poses[i].timestamp <= poses[i - 1].timestamp)
            throw ValidationError("trajectory: timestamps must be strictly increasing");
    }
}

void trajectory_to_chunks(const Se3Trajectory& t, ChunkMap& map, const std::string& prefix) {
    const int n = t.size();
    std::vector<double> rot, pos, ts;
    rot.reserve(static_cast<std::size_t>(n) * 9);
    pos.reserve(static_cast<std::size_t>(n) * 3);
    ts.reserve(static_cast<std::size_t>(n));
    for (const auto& p : t.poses) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) rot.push_back(p.rotation(r, c));
        pos.push_back(p.position.x());
        pos.push_back(p.position.y());
        pos.push_back(p.position.z());
        ts.push_back(p.timestamp);
    }
    map.add_f64(prefix + "rotation", {n, 3, 3}, std::move(rot));
    map.add_f64(prefix + "position", {n, 3}, std::move(pos));
    map.add_f64(prefix + "timestamp", {n}, std::move(ts));
}

Se3Trajectory trajectory_from_chunks(const ChunkMap& map, const std::string& prefix) {
    const auto& rot = map.at(prefix + "rotation");
    const auto& pos = map.at(prefix + "position");
    const auto& ts = map.at(prefix + "timestamp");
    const int n = static_cast<int>(ts.numel());
    if (rot.numel() != 9 * n || pos.numel() != 3 * n) throw FormatError("trajectory chunk shapes disagree");
    Se3Trajectory t;
    for (int i = 0; i < n; ++i) {
        Se3Trajectory::PoseStamped p;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) p.rotation(r, c) = rot.f64[9 * i + 3 * r + c];
        p.position = {pos.f64[3 * i], pos.f64[3 * i + 1], pos.f64[3 * i + 2]};
        p.timestamp = ts.f64[i];
        t.poses.push_back(p);
    }
    t.validate();
    return t;
}

nlohmann::json trajectory_to_json(const Se3Trajectory& t) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& p : t.poses) {
        nlohmann::json e;
        e["timestamp"] = p.timestamp;
        e["position"] = {p.position.x(), p.position.y(), p.position.z()};
        nlohmann::json r = nlohmann::json::array();
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) r.push_back(p.rotation(a, b));
        e["rotation"] = r;
        j.push_back(std::move(e));
    }
    return j;
}

Se3Trajectory trajectory_from_json(const nlohmann::json& j) {
    Se3Trajectory t;
    for (const auto& e : j) {
        Se3Trajectory::PoseStamped p;
        p.timestamp = e.at("timestamp").get<double>();
        const auto& pos = e.at("position");
        p.position = {pos[0].get<double>(), pos[1].get<double>(), pos[2].get<double>()};
        const auto& r = e.at("rotation");
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) p.rotation(a, b) = r[static_cast<std::size_t>(3 * a + b)].get<double>();
        t.poses.push_back(p);
    }
    t.validate();
    return t;
}

AlignmentResult align_trajectories(const Se3Trajectory& cam, const Se3Trajectory& head) {
    if (cam.size() != head.size())
        throw ValidationError("align_trajectories: length mismatch (resample first)");
    if (cam.size() < 2) throw ValidationError("align_trajectories: need at least 2 poses");

    AlignmentResult out;
    out.aligned = cam;

    // rigid transform taking cam pose 0 onto head pose 0
    const Eigen::Matrix3d R = head.poses[0].rotation * cam.poses[0].rotation.transpose();
    const Eigen::Vector3d t = head.poses[0].position - R * cam.poses[0].position;
    for (auto& p : out.aligned.poses) {
        p.rotation = R * p.rotation;
        p.position = R * p.position + t;
    }

    // scale about the shared first position
    const Eigen::Vector3d c0 = out.aligned.poses[0].position;
    const Eigen::Vector3d h0 = head.poses[0].position;
    double num = 0, den = 0;
    for (int i = 0; i < cam.size(); ++i) {
        const Eigen::Vector3d dc = out.aligned.poses[i].position - c0;
        const Eigen::Vector3d dh = head.poses[i].position - h0;
        num += dc.dot(dh);
        den += dc.squaredNorm();
    }
    if (den < 1e-12) {
        out.degenerate = true;
        out.scale = 1.0;
    } else {
        out.scale = num / den;
        for (auto& p : out.aligned.poses) p.position = c0 + out.scale * (p.position - c0);
    }
    return out;
}

double trans_err(const Se3Trajectory& aligned_cam, const Se3Trajectory& head) {
    if (aligned_cam.size() != head.size()) throw ValidationError("trans_err: length mismatch");
    if (aligned_cam.size() == 0) throw ValidationError("trans_err: empty trajectory");
    double sum = 0;
    for (int i = 0; i < head.size(); ++i)
        sum += (aligned_cam.poses[i].position - head.poses[i].position).norm();
    return sum / head.size();
}

double rot_err(const Se3Trajectory& aligned_cam, const Se3Trajectory& head) {
    if (aligned_cam.size() != head.size()) throw ValidationError("rot_err: length mismatch");
    if (aligned_cam.size() == 0) throw ValidationError("rot_err: empty trajectory");
    double sum = 0;
    for (int i = 0; i < head.size(); ++i)
        sum += kin::rotation_angle_deg(aligned_cam.poses[i].rotation, head.poses[i].rotation);
    return sum / head.size();
}

Se3Trajectory head_camera_trajectory(const kin::MotionSequence& motion,
                                     const Eigen::Matrix3d& mount_rotation,
                                     const Eigen::Vector3d& mount_offset,
                                     int frame_stride) {
    if (frame_stride < 1) throw ValidationError("head_camera_trajectory: stride must be >= 1");
    Se3Trajectory t;
    const kin::HeadTrack track = kin::head_track(motion);
    for (int f = 0; f < motion.frame_count(); f += frame_stride) {
        Se3Trajectory::PoseStamped p;
        p.rotation = track.rotation[static_cast<std::size_t>(f)] * mount_rotation;
        p.position = track.position[static_cast<std::size_t>(f)] +
                     track.rotation[static_cast<std::size_t>(f)] * mount_offset;
        p.timestamp = static_cast<double>(f) / motion.fps;
        t.poses.push_back(p);
    }
    return t;
}

} // namespace egtw::metrics
