#include "egtw/kin/skeleton.hpp"

#include <cmath>
#include <numbers>

#include "egtw/core/container.hpp"
#include "egtw/core/error.hpp"
#include "egtw/core/rng.hpp"
#include "egtw/kin/rotation.hpp"

namespace egtw::kin {

void Skeleton::validate() const {
    if (joint_count < 1) throw ValidationError("skeleton: joint_count must be >= 1");
    if (static_cast<int>(parent.size()) != joint_count || static_cast<int>(offset.size()) != joint_count)
        throw ValidationError("skeleton: parent/offset size mismatch");
    if (parent[0] != -1) throw ValidationError("skeleton: joint 0 must be the root");
    for (int j = 1; j < joint_count; ++j) {
        // parents precede children, which makes the parent array a tree rooted at 0
        if (parent[j] < 0 || parent[j] >= j)
            throw ValidationError("skeleton: parent indices must form a tree rooted at joint 0");
        if (!offset[j].allFinite()) throw ValidationError("skeleton: non-finite bone offset");
    }
    if (head_index < 0 || head_index >= joint_count)
        throw ValidationError("skeleton: head_index out of range");
}

nlohmann::json Skeleton::to_json() const {
    nlohmann::json j;
    j["joint_count"] = joint_count;
    j["parent"] = parent;
    auto& offs = j["offset"] = nlohmann::json::array();
    for (const auto& o : offset) offs.push_back({o.x(), o.y(), o.z()});
    j["head_index"] = head_index;
    j["left_wrist"] = left_wrist;
    j["right_wrist"] = right_wrist;
    j["contact_joints"] = contact_joints;
    return j;
}

Skeleton Skeleton::from_json(const nlohmann::json& j) {
    Skeleton s;
    s.joint_count = j.at("joint_count").get<int>();
    s.parent = j.at("parent").get<std::vector<int>>();
    for (const auto& o : j.at("offset")) s.offset.emplace_back(o[0].get<double>(), o[1].get<double>(), o[2].get<double>());
    s.head_index = j.at("head_index").get<int>();
    s.left_wrist = j.value("left_wrist", -1);
    s.right_wrist = j.value("right_wrist", -1);
    s.contact_joints = j.value("contact_joints", std::vector<int>{});
    s.validate();
    return s;
}

void Pose::validate(int joint_count) const {
    if (static_cast<int>(joint_rotations.size()) != joint_count)
        throw ValidationError("pose: joint_rotations size mismatch");
    if (!is_rotation_matrix(root_rotation)) throw ValidationError("pose: root_rotation is not a rotation");
    if (!root_position.allFinite()) throw ValidationError("pose: non-finite root position");
    for (const auto& r : joint_rotations)
        if (!is_rotation_matrix(r)) throw ValidationError("pose: joint rotation is not a rotation");
    if ((joint_rotations[0] - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9)
        throw ValidationError("pose: joint_rotations[0] must be identity (root uses root_rotation)");
}

void MotionSequence::validate() const {
    skeleton.validate();
    if (frames.size() < 2) throw ValidationError("motion: at least 2 frames required");
    if (fps <= 0) throw ValidationError("motion: fps must be positive");
    for (const auto& f : frames) f.validate(skeleton.joint_count);
}

nlohmann::json MotionSequence::to_json() const {
    nlohmann::json j;
    j["skeleton"] = skeleton.to_json();
    j["fps"] = fps;
    auto& fr = j["frames"] = nlohmann::json::array();
    for (const auto& p : frames) {
        nlohmann::json jp;
        auto mat = [](const Eigen::Matrix3d& m) {
            nlohmann::json a = nlohmann::json::array();
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
            return a;
        };
        jp["root_rotation"] = mat(p.root_rotation);
        jp["root_position"] = {p.root_position.x(), p.root_position.y(), p.root_position.z()};
        auto& jr = jp["joint_rotations"] = nlohmann::json::array();
        for (const auto& r : p.joint_rotations) jr.push_back(mat(r));
        fr.push_back(std::move(jp));
    }
    return j;
}

MotionSequence MotionSequence::from_json(const nlohmann::json& j) {
    MotionSequence m;
    m.skeleton = Skeleton::from_json(j.at("skeleton"));
    m.fps = j.at("fps").get<double>();
    auto mat = [](const nlohmann::json& a) {
        Eigen::Matrix3d r;
        for (int i = 0; i < 9; ++i) r(i / 3, i % 3) = a[static_cast<std::size_t>(i)].get<double>();
        return r;
    };
    for (const auto& jp : j.at("frames")) {
        Pose p;
        p.root_rotation = mat(jp.at("root_rotation"));
        const auto& rp = jp.at("root_position");
        p.root_position = {rp[0].get<double>(), rp[1].get<double>(), rp[2].get<double>()};
        for (const auto& jr : jp.at("joint_rotations")) p.joint_rotations.push_back(mat(jr));
        m.frames.push_back(std::move(p));
    }
    m.validate();
    return m;
}

JointTransforms forward_kinematics(const Skeleton& skeleton, const Pose& pose) {
    const int J = skeleton.joint_count;
    JointTransforms out;
    out.rotation.resize(J);
    out.position.resize(J);
    out.rotation[0] = pose.root_rotation;
    out.position[0] = pose.root_position;
    for (int j = 1; j < J; ++j) {
        const int p = skeleton.parent[j];
        out.position[j] = out.position[p] + out.rotation[p] * skeleton.offset[j];
        out.rotation[j] = out.rotation[p] * pose.joint_rotations[j];
    }
    return out;
}

void skeleton_to_chunks(const Skeleton& s, ChunkMap& map, const std::string& prefix) {
    std::vector<std::int64_t> parent(s.parent.begin(), s.parent.end());
    map.add_i64(prefix + "parent", {s.joint_count}, std::move(parent));
    std::vector<double> off;
    off.reserve(static_cast<std::size_t>(s.joint_count) * 3);
    for (const auto& o : s.offset) {
        off.push_back(o.x());
        off.push_back(o.y());
        off.push_back(o.z());
    }
    map.add_f64(prefix + "offset", {s.joint_count, 3}, std::move(off));
    map.add_i64(prefix + "named_joints", {3},
                {s.head_index, s.left_wrist, s.right_wrist});
    std::vector<std::int64_t> contacts(s.contact_joints.begin(), s.contact_joints.end());
    const auto n_contacts = static_cast<std::int64_t>(contacts.size());
    map.add_i64(prefix + "contact_joints", {n_contacts}, std::move(contacts));
}

Skeleton skeleton_from_chunks(const ChunkMap& map, const std::string& prefix) {
    Skeleton s;
    const auto& parent = map.at(prefix + "parent");
    s.joint_count = static_cast<int>(parent.numel());
    s.parent.assign(parent.i64.begin(), parent.i64.end());
    const auto& off = map.at(prefix + "offset");
    if (off.numel() != 3 * s.joint_count) throw FormatError("skeleton offsets have wrong size");
    for (int j = 0; j < s.joint_count; ++j)
        s.offset.emplace_back(off.f64[3 * j], off.f64[3 * j + 1], off.f64[3 * j + 2]);
    const auto& named = map.at(prefix + "named_joints");
    s.head_index = static_cast<int>(named.i64.at(0));
    s.left_wrist = static_cast<int>(named.i64.at(1));
    s.right_wrist = static_cast<int>(named.i64.at(2));
    const auto& contacts = map.at(prefix + "contact_joints");
    s.contact_joints.assign(contacts.i64.begin(), contacts.i64.end());
    s.validate();
    return s;
}

void motion_to_chunks(const MotionSequence& m, ChunkMap& map, const std::string& prefix) {
    const int F = m.frame_count();
    const int J = m.skeleton.joint_count;
    map.add_scalar_f64(prefix + "fps", m.fps);
    std::vector<double> rr, rp, jr;
    rr.reserve(static_cast<std::size_t>(F) * 9);
    rp.reserve(static_cast<std::size_t>(F) * 3);
    jr.reserve(static_cast<std::size_t>(F) * J * 9);
    for (const auto& p : m.frames) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) rr.push_back(p.root_rotation(r, c));
        rp.push_back(p.root_position.x());
        rp.push_back(p.root_position.y());
        rp.push_back(p.root_position.z());
        for (const auto& rot : p.joint_rotations)
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) jr.push_back(rot(r, c));
    }
    map.add_f64(prefix + "root_rotation", {F, 3, 3}, std::move(rr));
    map.add_f64(prefix + "root_position", {F, 3}, std::move(rp));
    map.add_f64(prefix + "joint_rotations", {F, J, 3, 3}, std::move(jr));
}

MotionSequence motion_from_chunks(const ChunkMap& map, const std::string& prefix,
                                  const Skeleton* shared_skeleton) {
    MotionSequence m;
    m.skeleton = shared_skeleton ? *shared_skeleton : skeleton_from_chunks(map, prefix + "skeleton/");
    m.fps = map.scalar_f64(prefix + "fps");
    const auto& rr = map.at(prefix + "root_rotation");
    const auto& rp = map.at(prefix + "root_position");
    const auto& jr = map.at(prefix + "joint_rotations");
    const int F = static_cast<int>(rr.dims.at(0));
    const int J = m.skeleton.joint_count;
    if (rp.dims.at(0) != F || jr.dims.at(0) != F || jr.dims.at(1) != J)
        throw FormatError("motion chunk shapes disagree");
    for (int f = 0; f < F; ++f) {
        Pose p;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) p.root_rotation(r, c) = rr.f64[9 * f + 3 * r + c];
        p.root_position = {rp.f64[3 * f], rp.f64[3 * f + 1], rp.f64[3 * f + 2]};
        p.joint_rotations.resize(J);
        for (int j = 0; j < J; ++j)
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c)
                    p.joint_rotations[j](r, c) = jr.f64[(static_cast<std::size_t>(f) * J + j) * 9 + 3 * r + c];
        m.frames.push_back(std::move(p));
    }
    m.validate();
    return m;
}

void save_motion_file(const MotionSequence& m, const std::string& path) {
    ChunkMap map;
    skeleton_to_chunks(m.skeleton, map, "skeleton/");
    motion_to_chunks(m, map, "");
    write_chunk_file(path, FileKind::Generic, map);
}

MotionSequence load_motion_file(const std::string& path) {
    const ChunkMap map = read_chunk_file(path, FileKind::Generic);
    return motion_from_chunks(map, "");
}

MotionSequence random_motion(const Skeleton& skeleton, int frame_count, double fps, std::uint64_t seed) {
    Rng rng(seed);
    const int J = skeleton.joint_count;

    // Smooth random curves: per-joint axis-angle driven by a few sinusoids.
    struct Curve {
        double a0, a1, f1, p1, a2, f2, p2;
        double eval(double t) const {
            return a0 + a1 * std::sin(2 * std::numbers::pi * f1 * t + p1) +
                   a2 * std::sin(2 * std::numbers::pi * f2 * t + p2);
        }
    };
    auto make_curve = [&rng](double scale) {
        Curve c;
        c.a0 = rng.uniform(-scale, scale);
        c.a1 = rng.uniform(0, scale);
        c.f1 = rng.uniform(0.1, 0.5);
        c.p1 = rng.uniform(0, 2 * std::numbers::pi);
        c.a2 = rng.uniform(0, scale / 2);
        c.f2 = rng.uniform(0.4, 0.9);
        c.p2 = rng.uniform(0, 2 * std::numbers::pi);
        return c;
    };

    std::vector<std::array<Curve, 3>> joint_curves(static_cast<std::size_t>(J));
    for (auto& jc : joint_curves) jc = {make_curve(0.5), make_curve(0.5), make_curve(0.5)};
    const std::array<Curve, 3> root_rot_curves = {make_curve(0.8), make_curve(0.8), make_curve(0.8)};
    const std::array<Curve, 3> root_pos_curves = {make_curve(0.8), make_curve(0.3), make_curve(0.8)};

    MotionSequence m;
    m.skeleton = skeleton;
    m.fps = fps;
    for (int f = 0; f < frame_count; ++f) {
        const double t = static_cast<double>(f) / fps;
        Pose p;
        p.root_rotation = rot_y(root_rot_curves[0].eval(t)) * rot_x(root_rot_curves[1].eval(t) * 0.4) *
                          rot_z(root_rot_curves[2].eval(t) * 0.4);
        p.root_position = {root_pos_curves[0].eval(t), 0.9 + 0.2 * root_pos_curves[1].eval(t),
                           root_pos_curves[2].eval(t)};
        p.joint_rotations.resize(J, Eigen::Matrix3d::Identity());
        for (int j = 1; j < J; ++j) {
            const auto& jc = joint_curves[static_cast<std::size_t>(j)];
            p.joint_rotations[j] = rot_x(jc[0].eval(t)) * rot_y(jc[1].eval(t)) * rot_z(jc[2].eval(t));
        }
        m.frames.push_back(std::move(p));
    }
    return m;
}

Skeleton toy_humanoid() {
    Skeleton s;
    // Character faces +Z with Y up, so +X is its right side.
    // 0 pelvis, 1 spine, 2 neck, 3 head, 4 r_shoulder, 5 r_elbow, 6 r_wrist,
    // 7 l_shoulder, 8 l_elbow, 9 l_wrist, 10 r_hip, 11 r_knee, 12 r_heel,
    // 13 r_toe, 14 l_hip, 15 l_knee, 16 l_heel, 17 l_toe
    s.joint_count = 18;
    s.parent = {-1, 0, 1, 2, 1, 4, 5, 1, 7, 8, 0, 10, 11, 12, 0, 14, 15, 16};
    s.offset.assign(18, Eigen::Vector3d::Zero());
    s.offset[1] = {0.00, 0.25, 0.00};   // spine
    s.offset[2] = {0.00, 0.22, 0.00};   // neck
    s.offset[3] = {0.00, 0.12, 0.00};   // head
    s.offset[4] = {0.18, 0.18, 0.00};   // r_shoulder
    s.offset[5] = {0.26, 0.00, 0.00};   // r_elbow
    s.offset[6] = {0.24, 0.00, 0.00};   // r_wrist
    s.offset[7] = {-0.18, 0.18, 0.00};  // l_shoulder
    s.offset[8] = {-0.26, 0.00, 0.00};  // l_elbow
    s.offset[9] = {-0.24, 0.00, 0.00};  // l_wrist
    s.offset[10] = {0.10, -0.05, 0.00}; // r_hip
    s.offset[11] = {0.00, -0.42, 0.00}; // r_knee
    s.offset[12] = {0.00, -0.42, 0.00}; // r_heel
    s.offset[13] = {0.00, -0.06, 0.12}; // r_toe
    s.offset[14] = {-0.10, -0.05, 0.00};
    s.offset[15] = {0.00, -0.42, 0.00};
    s.offset[16] = {0.00, -0.42, 0.00};
    s.offset[17] = {0.00, -0.06, 0.12};
    s.head_index = 3;
    s.left_wrist = 9;
    s.right_wrist = 6;
    s.contact_joints = {12, 13, 16, 17};
    s.validate();
    return s;
}

} // namespace egtw::kin
