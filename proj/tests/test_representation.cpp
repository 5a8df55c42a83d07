#include <doctest.h>

#include <Eigen/Dense>
#include <numbers>

#include "egtw/core/error.hpp"
#include "egtw/core/rng.hpp"
#include "egtw/kin/representation.hpp"
#include "egtw/kin/rotation.hpp"
#include "egtw/kin/skeleton.hpp"

using namespace egtw;
using namespace egtw::kin;

namespace {

MotionSequence static_motion(const Skeleton& s, int frames) {
    MotionSequence m;
    m.skeleton = s;
    m.fps = 4.0;
    Pose p;
    p.root_position = {0.3, 0.9, -0.2};
    p.root_rotation = rot_y(0.4);
    p.joint_rotations.assign(s.joint_count, Eigen::Matrix3d::Identity());
    m.frames.assign(frames, p);
    return m;
}

double max_position_diff(const MotionSequence& a, const MotionSequence& b) {
    double worst = 0;
    for (int f = 0; f < a.frame_count(); ++f) {
        const auto fa = forward_kinematics(a.skeleton, a.frames[f]);
        const auto fb = forward_kinematics(b.skeleton, b.frames[f]);
        for (int j = 0; j < a.skeleton.joint_count; ++j)
            worst = std::max(worst, (fa.position[j] - fb.position[j]).norm());
    }
    return worst;
}

} // namespace

TEST_CASE("layout widths") {
    const int J = toy_humanoid().joint_count;
    CHECK(head_centric_layout(J).width == 18 + 12 * (J - 1));
    CHECK(root_centric_layout(J).width == 4 + 12 * (J - 1) + 4);
}

TEST_CASE("head-centric static pose has zero first-order features") {
    const Skeleton s = toy_humanoid();
    const MotionSequence m = static_motion(s, 5);
    const FeatureSequence rep = encode_head_centric(m);

    const Rotation6D id;
    for (int f = 0; f < 5; ++f) {
        CHECK(rep.field_row(f, "h_p").norm() == doctest::Approx(0.0).epsilon(1e-12));
        const auto hr = rep.field_row(f, "h_r");
        for (int i = 0; i < 6; ++i) CHECK(hr[i] == doctest::Approx(id.v[i]).epsilon(1e-9));
        CHECK(rep.field_row(f, "hdot_p").norm() == doctest::Approx(0.0));
        const auto hdr = rep.field_row(f, "hdot_r");
        for (int i = 0; i < 6; ++i) CHECK(hdr[i] == doctest::Approx(id.v[i]).epsilon(1e-9));
        CHECK(rep.field_row(f, "j_v").norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("head-centric translation arithmetic") {
    // head moves (0.1, 0, 0) per frame with no rotation
    Skeleton s;
    s.joint_count = 2;
    s.parent = {-1, 0};
    s.offset = {Eigen::Vector3d::Zero(), Eigen::Vector3d(0, 0.5, 0)};
    s.head_index = 1;
    s.validate();

    MotionSequence m;
    m.skeleton = s;
    m.fps = 4.0;
    for (int f = 0; f < 6; ++f) {
        Pose p;
        p.root_position = {0.1 * f, 0, 0};
        p.joint_rotations.assign(2, Eigen::Matrix3d::Identity());
        m.frames.push_back(p);
    }
    const FeatureSequence rep = encode_head_centric(m);
    for (int f = 0; f < 6; ++f) {
        const auto hp = rep.field_row(f, "h_p");
        CHECK(hp[0] == doctest::Approx(0.1 * f).epsilon(1e-12));
        CHECK(hp[1] == doctest::Approx(0.0));
        CHECK(hp[2] == doctest::Approx(0.0));
        if (f >= 1) {
            const auto hdp = rep.field_row(f, "hdot_p");
            CHECK(hdp[0] == doctest::Approx(0.1).epsilon(1e-12));
        }
    }

    // decode reproduces the head positions
    const MotionSequence dec = decode_head_centric(rep, s);
    const HeadTrack track = head_track(dec);
    for (int f = 0; f < 6; ++f) CHECK(track.position[f].x() == doctest::Approx(0.1 * f).epsilon(1e-12));
}

TEST_CASE("head-centric frame0 normalization invariants") {
    const Skeleton s = toy_humanoid();
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        const MotionSequence m = random_motion(s, 9, 4.0, 1000 + i);
        const FeatureSequence rep = encode_head_centric(m);
        CHECK(rep.field_row(0, "h_p").norm() < 1e-12);
        const auto hr = rep.field_row(0, "h_r");
        const Rotation6D id;
        for (int k = 0; k < 6; ++k) CHECK(hr[k] == doctest::Approx(id.v[k]).epsilon(1e-9));
        CHECK(rep.field_row(0, "hdot_p").norm() == 0.0);
        CHECK(rep.field_row(0, "j_v").norm() == 0.0);
    }
}

TEST_CASE("head-centric round trip against fk oracle (1000 seeded motions)") {
    const Skeleton s = toy_humanoid();
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const MotionSequence m = random_motion(s, 5, 4.0, 31000 + i);
        const FeatureSequence rep = encode_head_centric(m);
        const MotionSequence dec = decode_head_centric(rep, s);
        worst = std::max(worst, max_position_diff(normalize_like_head_centric(m), dec));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("head-centric encode is equivariant to rigid transforms of the input") {
    const Skeleton s = toy_humanoid();
    Rng rng(123);
    for (int i = 0; i < 10; ++i) {
        const MotionSequence m = random_motion(s, 7, 4.0, 50 + i);
        MotionSequence moved = m;
        const Eigen::Matrix3d R = Eigen::AngleAxisd(rng.uniform(-3, 3), Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized()).toRotationMatrix();
        const Eigen::Vector3d t(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
        for (auto& p : moved.frames) {
            p.root_rotation = R * p.root_rotation;
            p.root_position = R * p.root_position + t;
        }
        const FeatureSequence a = encode_head_centric(m);
        const FeatureSequence b = encode_head_centric(moved);
        CHECK((a.features - b.features).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("head-centric redundancy: direct fields vs fk over j_r") {
    const Skeleton s = toy_humanoid();
    for (int i = 0; i < 25; ++i) {
        const MotionSequence m = random_motion(s, 9, 4.0, 900 + i);
        const FeatureSequence rep = encode_head_centric(m);
        const auto direct = joint_positions_from_head_fields(rep, s);
        const MotionSequence dec = decode_head_centric(rep, s);
        for (int f = 0; f < m.frame_count(); ++f) {
            const auto fk = forward_kinematics(s, dec.frames[f]);
            for (int j = 0; j < s.joint_count; ++j)
                CHECK((direct[f][j] - fk.position[j]).norm() < 1e-4);
        }
    }
}

TEST_CASE("head-centric decode rejects degenerate 6d blocks") {
    const Skeleton s = toy_humanoid();
    const MotionSequence m = static_motion(s, 5);
    FeatureSequence rep = encode_head_centric(m);
    const auto l = rep.layout();
    const auto& hr = l.field("h_r");
    for (int i = 0; i < 6; ++i) rep.features(2, hr.offset + i) = 0.0;
    CHECK_THROWS_AS(decode_head_centric(rep, s), DegenerateRotationError);
}

TEST_CASE("encode rejects too-short sequences") {
    const Skeleton s = toy_humanoid();
    MotionSequence m = static_motion(s, 1);
    CHECK_THROWS_AS(encode_head_centric(m), ValidationError);
    CHECK_THROWS_AS(encode_root_centric(m), ValidationError);
}

TEST_CASE("root-centric static standing pose") {
    const Skeleton s = toy_humanoid();
    const MotionSequence m = static_motion(s, 6);
    const FeatureSequence rep = encode_root_centric(m);
    for (int f = 0; f < 6; ++f) {
        CHECK(rep.field_row(f, "rdot_a").norm() == doctest::Approx(0.0));
        CHECK(rep.field_row(f, "rdot_xz").norm() == doctest::Approx(0.0));
        const auto cf = rep.field_row(f, "c_f");
        for (int c = 0; c < 4; ++c) CHECK(cf[c] == 1.0);
    }
}

TEST_CASE("root-centric constant forward walk velocity") {
    // 1 m/s at 16 fps: rdot_xz = (0, 0.0625) per frame
    const Skeleton s = toy_humanoid();
    MotionSequence m;
    m.skeleton = s;
    m.fps = 16.0;
    for (int f = 0; f < 17; ++f) {
        Pose p;
        p.root_position = {0, 0.9, f * (1.0 / 16.0)};
        p.joint_rotations.assign(s.joint_count, Eigen::Matrix3d::Identity());
        m.frames.push_back(p);
    }
    const FeatureSequence rep = encode_root_centric(m);
    for (int f = 1; f < 17; ++f) {
        const auto v = rep.field_row(f, "rdot_xz");
        CHECK(v[0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(v[1] == doctest::Approx(0.0625).epsilon(1e-12));
    }
}

TEST_CASE("root-centric decode is exact for upright-root motions") {
    const Skeleton s = toy_humanoid();
    Rng rng(3);
    for (int i = 0; i < 10; ++i) {
        // upright root: yaw-only rotation
        MotionSequence m;
        m.skeleton = s;
        m.fps = 4.0;
        double yaw = rng.uniform(-1, 1);
        Eigen::Vector3d pos(rng.uniform(-1, 1), 0.9, rng.uniform(-1, 1));
        for (int f = 0; f < 9; ++f) {
            yaw += rng.uniform(-0.2, 0.2);
            pos += rot_y(yaw) * Eigen::Vector3d(rng.uniform(-0.05, 0.05), 0, rng.uniform(0, 0.1));
            pos.y() = 0.9 + rng.uniform(-0.05, 0.05);
            Pose p;
            p.root_rotation = rot_y(yaw);
            p.root_position = pos;
            p.joint_rotations.assign(s.joint_count, Eigen::Matrix3d::Identity());
            for (int j = 1; j < s.joint_count; ++j)
                p.joint_rotations[j] = rot_x(rng.uniform(-0.4, 0.4)) * rot_y(rng.uniform(-0.4, 0.4));
            m.frames.push_back(p);
        }
        const FeatureSequence rep = encode_root_centric(m);
        const MotionSequence dec = decode_root_centric(rep, s);
        CHECK(max_position_diff(normalize_like_root_centric(m), dec) < 1e-9);
    }
}

TEST_CASE("probe: head-centric direct read is near-exact") {
    const Skeleton s = toy_humanoid();
    for (int i = 0; i < 10; ++i) {
        const MotionSequence m = random_motion(s, 9, 4.0, 600 + i);
        const FeatureSequence rep = encode_head_centric(m);
        const ProbeResult r = head_pose_probe(rep, s, m);
        CHECK(r.translation_error_m < 1e-5);
        CHECK(r.rotation_error_deg < 1e-5);
    }
}

TEST_CASE("probe: root-centric exact features integrate to the right head pose") {
    const Skeleton s = toy_humanoid();
    Rng rng(8);
    for (int i = 0; i < 10; ++i) {
        MotionSequence m;
        m.skeleton = s;
        m.fps = 4.0;
        double yaw = rng.uniform(-1, 1);
        Eigen::Vector3d pos(rng.uniform(-1, 1), 0.9, rng.uniform(-1, 1));
        for (int f = 0; f < 9; ++f) {
            yaw += rng.uniform(-0.2, 0.2);
            pos += rot_y(yaw) * Eigen::Vector3d(0, 0, rng.uniform(0, 0.1));
            Pose p;
            p.root_rotation = rot_y(yaw);
            p.root_position = pos;
            p.joint_rotations.assign(s.joint_count, Eigen::Matrix3d::Identity());
            for (int j = 1; j < s.joint_count; ++j) p.joint_rotations[j] = rot_x(rng.uniform(-0.3, 0.3));
            m.frames.push_back(p);
        }
        const FeatureSequence rep = encode_root_centric(m);
        const ProbeResult r = head_pose_probe(rep, s, m);
        CHECK(r.translation_error_m < 1e-4);
        CHECK(r.rotation_error_deg < 1e-4);
    }
}

TEST_CASE("probe: noise grows with length for root-centric, bounded for head-centric") {
    const Skeleton s = toy_humanoid();
    const double sigma = 0.01;
    const std::vector<int> lengths = {21, 41, 81};
    std::vector<double> rc_err(lengths.size(), 0.0);
    std::vector<double> hc_err(lengths.size(), 0.0);
    const int seeds = 100;

    for (int li = 0; li < static_cast<int>(lengths.size()); ++li) {
        for (int i = 0; i < seeds; ++i) {
            Rng rng(7000 + i + 131 * li);
            // upright walking-style motion keeps the root-centric codec exact pre-noise
            MotionSequence m;
            m.skeleton = s;
            m.fps = 4.0;
            double yaw = 0;
            Eigen::Vector3d pos(0, 0.9, 0);
            for (int f = 0; f < lengths[li]; ++f) {
                yaw += rng.uniform(-0.15, 0.15);
                pos += rot_y(yaw) * Eigen::Vector3d(0, 0, 0.08);
                Pose p;
                p.root_rotation = rot_y(yaw);
                p.root_position = pos;
                p.joint_rotations.assign(s.joint_count, Eigen::Matrix3d::Identity());
                m.frames.push_back(p);
            }

            FeatureSequence rc = encode_root_centric(m);
            FeatureSequence hc = encode_head_centric(m);
            Rng noise = rng.split("noise");
            for (int f = 0; f < rc.frame_count(); ++f)
                for (int c = 0; c < rc.features.cols(); ++c) rc.features(f, c) += sigma * noise.normal();
            // same noise level on the head position fields
            const auto hl = hc.layout();
            const auto& hp = hl.field("h_p");
            for (int f = 0; f < hc.frame_count(); ++f)
                for (int c = 0; c < hp.width; ++c) hc.features(f, hp.offset + c) += sigma * noise.normal();

            rc_err[li] += head_pose_probe(rc, s, m).translation_error_m / seeds;
            hc_err[li] += head_pose_probe(hc, s, m).translation_error_m / seeds;
        }
    }

    // root-centric integration drifts with length; head-centric stays ~sigma
    CHECK(rc_err[2] > rc_err[0] * 1.5);
    CHECK(rc_err[1] > rc_err[0]);
    for (double e : hc_err) CHECK(e < 2 * sigma);
    for (std::size_t i = 0; i < lengths.size(); ++i) CHECK(rc_err[i] > hc_err[i]);
}
