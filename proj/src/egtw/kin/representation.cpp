#include "egtw/kin/representation.hpp"

#include <algorithm>
#include <cmath>

#include "egtw/core/error.hpp"
#include "egtw/kin/rotation.hpp"

namespace egtw::kin {

namespace {

constexpr double kContactSpeedThreshold = 0.02; // meters per frame

void put6(Eigen::MatrixXd& m, int frame, int off, const Rotation6D& r) {
    for (int i = 0; i < 6; ++i) m(frame, off + i) = r.v[static_cast<std::size_t>(i)];
}

Rotation6D get6(const Eigen::MatrixXd& m, int frame, int off) {
    Rotation6D r;
    for (int i = 0; i < 6; ++i) r.v[static_cast<std::size_t>(i)] = m(frame, off + i);
    return r;
}

void put3(Eigen::MatrixXd& m, int frame, int off, const Eigen::Vector3d& v) {
    m(frame, off) = v.x();
    m(frame, off + 1) = v.y();
    m(frame, off + 2) = v.z();
}

Eigen::Vector3d get3(const Eigen::MatrixXd& m, int frame, int off) {
    return {m(frame, off), m(frame, off + 1), m(frame, off + 2)};
}

// Rigid transform (R, t) applied on the left of every pose in the sequence.
MotionSequence apply_rigid(const MotionSequence& m, const Eigen::Matrix3d& R, const Eigen::Vector3d& t) {
    MotionSequence out = m;
    for (auto& p : out.frames) {
        p.root_rotation = R * p.root_rotation;
        p.root_position = R * p.root_position + t;
    }
    return out;
}

} // namespace

const FeatureField& FeatureLayout::field(const std::string& name) const {
    for (const auto& f : fields)
        if (f.name == name) return f;
    throw ValidationError("unknown feature field: " + name);
}

std::vector<std::string> FeatureLayout::groups() const {
    std::vector<std::string> out;
    for (const auto& f : fields)
        if (std::find(out.begin(), out.end(), f.group) == out.end()) out.push_back(f.group);
    return out;
}

RepresentationKind representation_from_string(const std::string& s) {
    if (s == "head_centric") return RepresentationKind::HeadCentric;
    if (s == "root_centric") return RepresentationKind::RootCentric;
    throw ConfigError("unknown representation: " + s);
}

std::string to_string(RepresentationKind kind) {
    return kind == RepresentationKind::HeadCentric ? "head_centric" : "root_centric";
}

FeatureLayout head_centric_layout(int J) {
    if (J < 2) throw ValidationError("head-centric layout needs at least 2 joints");
    FeatureLayout l;
    int off = 0;
    auto add = [&](const std::string& name, int width, const std::string& group) {
        l.fields.push_back({name, off, width, group});
        off += width;
    };
    add("h_r", 6, "head_6d");
    add("hdot_r", 6, "head_6d");
    add("h_p", 3, "head_3d");
    add("hdot_p", 3, "head_3d");
    add("j_p", 3 * (J - 1), "joint_3d");
    add("j_v", 3 * (J - 1), "joint_3d");
    add("j_r", 6 * (J - 1), "joint_6d");
    l.width = off;
    return l;
}

FeatureLayout root_centric_layout(int J) {
    if (J < 2) throw ValidationError("root-centric layout needs at least 2 joints");
    FeatureLayout l;
    int off = 0;
    auto add = [&](const std::string& name, int width, const std::string& group) {
        l.fields.push_back({name, off, width, group});
        off += width;
    };
    add("rdot_a", 1, "root");
    add("rdot_xz", 2, "root");
    add("r_y", 1, "root");
    add("j_p", 3 * (J - 1), "joint_3d");
    add("j_v", 3 * (J - 1), "joint_3d");
    add("j_r", 6 * (J - 1), "joint_6d");
    add("c_f", 4, "contacts");
    l.width = off;
    return l;
}

FeatureLayout layout_for(RepresentationKind kind, int joint_count) {
    return kind == RepresentationKind::HeadCentric ? head_centric_layout(joint_count)
                                                   : root_centric_layout(joint_count);
}

Eigen::VectorXd FeatureSequence::field_row(int frame, const std::string& name) const {
    const auto l = layout();
    const auto& f = l.field(name);
    return features.block(frame, f.offset, 1, f.width).transpose();
}

MotionSequence normalize_like_head_centric(const MotionSequence& m) {
    const JointTransforms t0 = forward_kinematics(m.skeleton, m.frames[0]);
    const Eigen::Matrix3d R0 = t0.rotation[static_cast<std::size_t>(m.skeleton.head_index)];
    const Eigen::Vector3d p0 = t0.position[static_cast<std::size_t>(m.skeleton.head_index)];
    // inverse of the frame-0 head pose
    return apply_rigid(m, R0.transpose(), -(R0.transpose() * p0));
}

MotionSequence normalize_like_root_centric(const MotionSequence& m) {
    const Eigen::Vector3d p0 = m.frames[0].root_position;
    const double yaw0 = yaw_of(m.frames[0].root_rotation);
    const Eigen::Matrix3d R = rot_y(-yaw0);
    const Eigen::Vector3d shift(-p0.x(), 0.0, -p0.z()); // keep the height
    return apply_rigid(m, R, R * shift);
}

FeatureSequence encode_head_centric(const MotionSequence& m) {
    m.validate();
    const Skeleton& sk = m.skeleton;
    const int J = sk.joint_count;
    const int F = m.frame_count();
    const int head = sk.head_index;

    const MotionSequence norm = normalize_like_head_centric(m);
    std::vector<JointTransforms> fk(static_cast<std::size_t>(F));
    for (int f = 0; f < F; ++f) fk[static_cast<std::size_t>(f)] = forward_kinematics(sk, norm.frames[static_cast<std::size_t>(f)]);

    const FeatureLayout l = head_centric_layout(J);
    FeatureSequence rep;
    rep.kind = RepresentationKind::HeadCentric;
    rep.joint_count = J;
    rep.fps = m.fps;
    rep.features = Eigen::MatrixXd::Zero(F, l.width);

    const int o_hr = l.field("h_r").offset;
    const int o_hdr = l.field("hdot_r").offset;
    const int o_hp = l.field("h_p").offset;
    const int o_hdp = l.field("hdot_p").offset;
    const int o_jp = l.field("j_p").offset;
    const int o_jv = l.field("j_v").offset;
    const int o_jr = l.field("j_r").offset;

    for (int f = 0; f < F; ++f) {
        const auto& now = fk[static_cast<std::size_t>(f)];
        const Eigen::Matrix3d& Rh = now.rotation[static_cast<std::size_t>(head)];
        const Eigen::Vector3d& ph = now.position[static_cast<std::size_t>(head)];
        put6(rep.features, f, o_hr, matrix_to_rot6d(Rh));
        put3(rep.features, f, o_hp, ph);
        if (f > 0) {
            const auto& prev = fk[static_cast<std::size_t>(f - 1)];
            const Eigen::Matrix3d& Rp = prev.rotation[static_cast<std::size_t>(head)];
            put6(rep.features, f, o_hdr, matrix_to_rot6d(Rp.transpose() * Rh));
            put3(rep.features, f, o_hdp, ph - prev.position[static_cast<std::size_t>(head)]);
        } else {
            put6(rep.features, f, o_hdr, Rotation6D{}); // identity
        }
        int slot = 0;
        for (int j = 0; j < J; ++j) {
            if (j == head) continue;
            const Eigen::Vector3d pj = now.position[static_cast<std::size_t>(j)];
            put3(rep.features, f, o_jp + 3 * slot, Rh.transpose() * (pj - ph));
            if (f > 0) {
                const Eigen::Vector3d prev_pj = fk[static_cast<std::size_t>(f - 1)].position[static_cast<std::size_t>(j)];
                put3(rep.features, f, o_jv + 3 * slot, Rh.transpose() * (pj - prev_pj));
            }
            const Eigen::Matrix3d local =
                j == 0 ? norm.frames[static_cast<std::size_t>(f)].root_rotation
                       : norm.frames[static_cast<std::size_t>(f)].joint_rotations[static_cast<std::size_t>(j)];
            put6(rep.features, f, o_jr + 6 * slot, matrix_to_rot6d(local));
            ++slot;
        }
    }
    return rep;
}

MotionSequence decode_head_centric(const FeatureSequence& rep, const Skeleton& skeleton) {
    if (rep.kind != RepresentationKind::HeadCentric)
        throw ValidationError("decode_head_centric: wrong representation kind");
    skeleton.validate();
    const int J = skeleton.joint_count;
    if (rep.joint_count != J) throw ValidationError("decode_head_centric: joint count mismatch");
    const int F = rep.frame_count();
    const FeatureLayout l = head_centric_layout(J);
    const int head = skeleton.head_index;

    const int o_hr = l.field("h_r").offset;
    const int o_hp = l.field("h_p").offset;
    const int o_jr = l.field("j_r").offset;

    MotionSequence m;
    m.skeleton = skeleton;
    m.fps = rep.fps;
    for (int f = 0; f < F; ++f) {
        const Eigen::Matrix3d Rh = rot6d_to_matrix(get6(rep.features, f, o_hr));
        const Eigen::Vector3d ph = get3(rep.features, f, o_hp);

        Pose p;
        p.joint_rotations.assign(static_cast<std::size_t>(J), Eigen::Matrix3d::Identity());
        int slot = 0;
        for (int j = 0; j < J; ++j) {
            if (j == head) continue;
            const Eigen::Matrix3d local = rot6d_to_matrix(get6(rep.features, f, o_jr + 6 * slot));
            if (j == 0) p.root_rotation = local;
            else p.joint_rotations[static_cast<std::size_t>(j)] = local;
            ++slot;
        }
        // Global rotations of the chain above the head determine the head's
        // local rotation; FK with the root at the origin determines where the
        // root must sit for the head to land at h_p.
        p.root_position = Eigen::Vector3d::Zero();
        JointTransforms fk = forward_kinematics(skeleton, p);
        const Eigen::Matrix3d parent_rot = fk.rotation[static_cast<std::size_t>(skeleton.parent[static_cast<std::size_t>(head)])];
        p.joint_rotations[static_cast<std::size_t>(head)] = parent_rot.transpose() * Rh;
        fk = forward_kinematics(skeleton, p);
        p.root_position = ph - fk.position[static_cast<std::size_t>(head)];
        m.frames.push_back(std::move(p));
    }
    m.validate();
    return m;
}

std::vector<std::vector<Eigen::Vector3d>> joint_positions_from_head_fields(const FeatureSequence& rep,
                                                                           const Skeleton& skeleton) {
    const int J = skeleton.joint_count;
    const FeatureLayout l = head_centric_layout(J);
    const int o_hr = l.field("h_r").offset;
    const int o_hp = l.field("h_p").offset;
    const int o_jp = l.field("j_p").offset;
    std::vector<std::vector<Eigen::Vector3d>> out;
    for (int f = 0; f < rep.frame_count(); ++f) {
        const Eigen::Matrix3d Rh = rot6d_to_matrix(get6(rep.features, f, o_hr));
        const Eigen::Vector3d ph = get3(rep.features, f, o_hp);
        std::vector<Eigen::Vector3d> frame(static_cast<std::size_t>(J));
        int slot = 0;
        for (int j = 0; j < J; ++j) {
            if (j == skeleton.head_index) {
                frame[static_cast<std::size_t>(j)] = ph;
                continue;
            }
            frame[static_cast<std::size_t>(j)] = Rh * get3(rep.features, f, o_jp + 3 * slot) + ph;
            ++slot;
        }
        out.push_back(std::move(frame));
    }
    return out;
}

FeatureSequence encode_root_centric(const MotionSequence& m) {
    m.validate();
    const Skeleton& sk = m.skeleton;
    const int J = sk.joint_count;
    const int F = m.frame_count();

    const MotionSequence norm = normalize_like_root_centric(m);
    std::vector<JointTransforms> fk(static_cast<std::size_t>(F));
    for (int f = 0; f < F; ++f) fk[static_cast<std::size_t>(f)] = forward_kinematics(sk, norm.frames[static_cast<std::size_t>(f)]);

    const FeatureLayout l = root_centric_layout(J);
    FeatureSequence rep;
    rep.kind = RepresentationKind::RootCentric;
    rep.joint_count = J;
    rep.fps = m.fps;
    rep.features = Eigen::MatrixXd::Zero(F, l.width);

    const int o_ra = l.field("rdot_a").offset;
    const int o_rxz = l.field("rdot_xz").offset;
    const int o_ry = l.field("r_y").offset;
    const int o_jp = l.field("j_p").offset;
    const int o_jv = l.field("j_v").offset;
    const int o_jr = l.field("j_r").offset;
    const int o_cf = l.field("c_f").offset;

    std::vector<double> yaw(static_cast<std::size_t>(F));
    for (int f = 0; f < F; ++f) yaw[static_cast<std::size_t>(f)] = yaw_of(norm.frames[static_cast<std::size_t>(f)].root_rotation);

    for (int f = 0; f < F; ++f) {
        const Eigen::Matrix3d Ry = rot_y(yaw[static_cast<std::size_t>(f)]);
        const Eigen::Vector3d pr = norm.frames[static_cast<std::size_t>(f)].root_position;
        if (f > 0) {
            rep.features(f, o_ra) = wrap_angle(yaw[static_cast<std::size_t>(f)] - yaw[static_cast<std::size_t>(f - 1)]);
            const Eigen::Vector3d d = Ry.transpose() * (pr - norm.frames[static_cast<std::size_t>(f - 1)].root_position);
            rep.features(f, o_rxz) = d.x();
            rep.features(f, o_rxz + 1) = d.z();
        }
        rep.features(f, o_ry) = pr.y();

        int slot = 0;
        for (int j = 1; j < J; ++j) {
            const Eigen::Vector3d pj = fk[static_cast<std::size_t>(f)].position[static_cast<std::size_t>(j)];
            put3(rep.features, f, o_jp + 3 * slot, Ry.transpose() * (pj - pr));
            if (f > 0) {
                const Eigen::Vector3d prev_pj = fk[static_cast<std::size_t>(f - 1)].position[static_cast<std::size_t>(j)];
                put3(rep.features, f, o_jv + 3 * slot, Ry.transpose() * (pj - prev_pj));
            }
            // Children of the root are expressed relative to the yaw frame so
            // the decode FK (which rebuilds the root as pure yaw) is exact for
            // upright roots.
            const Eigen::Matrix3d local =
                sk.parent[static_cast<std::size_t>(j)] == 0
                    ? Eigen::Matrix3d(Ry.transpose() * fk[static_cast<std::size_t>(f)].rotation[static_cast<std::size_t>(j)])
                    : norm.frames[static_cast<std::size_t>(f)].joint_rotations[static_cast<std::size_t>(j)];
            put6(rep.features, f, o_jr + 6 * slot, matrix_to_rot6d(local));
            ++slot;
        }
        for (int c = 0; c < 4 && c < static_cast<int>(sk.contact_joints.size()); ++c) {
            const int cj = sk.contact_joints[static_cast<std::size_t>(c)];
            const int fa = f > 0 ? f - 1 : 0;
            const int fb = f > 0 ? f : 1;
            const double speed = (fk[static_cast<std::size_t>(fb)].position[static_cast<std::size_t>(cj)] -
                                  fk[static_cast<std::size_t>(fa)].position[static_cast<std::size_t>(cj)])
                                     .norm();
            rep.features(f, o_cf + c) = speed < kContactSpeedThreshold ? 1.0 : 0.0;
        }
    }
    return rep;
}

MotionSequence decode_root_centric(const FeatureSequence& rep, const Skeleton& skeleton) {
    if (rep.kind != RepresentationKind::RootCentric)
        throw ValidationError("decode_root_centric: wrong representation kind");
    skeleton.validate();
    const int J = skeleton.joint_count;
    if (rep.joint_count != J) throw ValidationError("decode_root_centric: joint count mismatch");
    const int F = rep.frame_count();
    const FeatureLayout l = root_centric_layout(J);

    const int o_ra = l.field("rdot_a").offset;
    const int o_rxz = l.field("rdot_xz").offset;
    const int o_ry = l.field("r_y").offset;
    const int o_jr = l.field("j_r").offset;

    MotionSequence m;
    m.skeleton = skeleton;
    m.fps = rep.fps;
    double yaw = 0.0;
    Eigen::Vector3d planar = Eigen::Vector3d::Zero();
    for (int f = 0; f < F; ++f) {
        // cumulative integration of the yaw and planar velocities
        yaw += rep.features(f, o_ra);
        const Eigen::Matrix3d Ry = rot_y(yaw);
        planar += Ry * Eigen::Vector3d(rep.features(f, o_rxz), 0.0, rep.features(f, o_rxz + 1));

        Pose p;
        p.root_rotation = Ry;
        p.root_position = {planar.x(), rep.features(f, o_ry), planar.z()};
        p.joint_rotations.assign(static_cast<std::size_t>(J), Eigen::Matrix3d::Identity());
        int slot = 0;
        for (int j = 1; j < J; ++j) {
            p.joint_rotations[static_cast<std::size_t>(j)] = rot6d_to_matrix(get6(rep.features, f, o_jr + 6 * slot));
            ++slot;
        }
        m.frames.push_back(std::move(p));
    }
    m.validate();
    return m;
}

FeatureSequence encode_representation(RepresentationKind kind, const MotionSequence& m) {
    return kind == RepresentationKind::HeadCentric ? encode_head_centric(m) : encode_root_centric(m);
}

MotionSequence decode_representation(const FeatureSequence& rep, const Skeleton& skeleton) {
    return rep.kind == RepresentationKind::HeadCentric ? decode_head_centric(rep, skeleton)
                                                       : decode_root_centric(rep, skeleton);
}

HeadTrack head_track(const MotionSequence& m) {
    HeadTrack t;
    for (const auto& frame : m.frames) {
        const JointTransforms fk = forward_kinematics(m.skeleton, frame);
        t.rotation.push_back(fk.rotation[static_cast<std::size_t>(m.skeleton.head_index)]);
        t.position.push_back(fk.position[static_cast<std::size_t>(m.skeleton.head_index)]);
    }
    return t;
}

ProbeResult head_pose_probe(const FeatureSequence& rep, const Skeleton& skeleton,
                            const MotionSequence& ground_truth) {
    const int F = rep.frame_count();
    if (ground_truth.frame_count() != F) throw ValidationError("probe: frame count mismatch");

    HeadTrack recovered;
    if (rep.kind == RepresentationKind::HeadCentric) {
        // direct field read
        const FeatureLayout l = head_centric_layout(rep.joint_count);
        const int o_hr = l.field("h_r").offset;
        const int o_hp = l.field("h_p").offset;
        for (int f = 0; f < F; ++f) {
            recovered.rotation.push_back(rot6d_to_matrix(get6(rep.features, f, o_hr)));
            recovered.position.push_back(get3(rep.features, f, o_hp));
        }
    } else {
        // integrate velocities, then forward kinematics to the head joint
        const MotionSequence decoded = decode_root_centric(rep, skeleton);
        recovered = head_track(decoded);
    }

    const MotionSequence norm_gt = rep.kind == RepresentationKind::HeadCentric
                                       ? normalize_like_head_centric(ground_truth)
                                       : normalize_like_root_centric(ground_truth);
    const HeadTrack gt = head_track(norm_gt);

    ProbeResult out;
    for (int f = 0; f < F; ++f) {
        out.translation_error_m += (recovered.position[static_cast<std::size_t>(f)] - gt.position[static_cast<std::size_t>(f)]).norm();
        out.rotation_error_deg += rotation_angle_deg(recovered.rotation[static_cast<std::size_t>(f)], gt.rotation[static_cast<std::size_t>(f)]);
    }
    out.translation_error_m /= F;
    out.rotation_error_deg /= F;
    return out;
}

} // namespace egtw::kin
