#include <doctest.h>

#include <Eigen/Dense>
#include <filesystem>
#include <numbers>

#include "egtw/core/container.hpp"
#include "egtw/core/error.hpp"
#include "egtw/core/rng.hpp"
#include "egtw/core/table.hpp"
#include "egtw/kin/rotation.hpp"
#include "egtw/metrics/evaluate.hpp"
#include "egtw/metrics/frechet.hpp"
#include "egtw/metrics/hand.hpp"
#include "egtw/metrics/retrieval.hpp"
#include "egtw/metrics/trajectory.hpp"
#include "egtw/synth/dataset.hpp"

using namespace egtw;
using namespace egtw::metrics;

namespace {

Se3Trajectory line_track(int n, const Eigen::Vector3d& step, const Eigen::Matrix3d& rot) {
    Se3Trajectory t;
    for (int i = 0; i < n; ++i) {
        Se3Trajectory::PoseStamped p;
        p.rotation = rot;
        p.position = step * i;
        p.timestamp = i * 0.5;
        t.poses.push_back(p);
    }
    return t;
}

Eigen::Matrix3d random_rotation(Rng& rng) {
    Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
    axis.normalize();
    return Eigen::AngleAxisd(rng.uniform(-3, 3), axis).toRotationMatrix();
}

} // namespace

TEST_CASE("alignment: identical trajectories give scale 1 and zero errors") {
    const Se3Trajectory head = line_track(9, {0.1, 0, 0.05}, kin::rot_y(0.2));
    const AlignmentResult r = align_trajectories(head, head);
    CHECK(r.scale == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(!r.degenerate);
    CHECK(trans_err(r.aligned, head) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rot_err(r.aligned, head) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("alignment recovers a planted scale factor") {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        Se3Trajectory head;
        for (int i = 0; i < 11; ++i) {
            Se3Trajectory::PoseStamped p;
            p.rotation = random_rotation(rng);
            p.position = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            p.timestamp = i;
            head.poses.push_back(p);
        }
        const double planted = rng.uniform(0.3, 3.0);
        Se3Trajectory cam = head;
        const Eigen::Vector3d origin = head.poses[0].position;
        for (auto& p : cam.poses) p.position = origin + planted * (p.position - origin);

        const AlignmentResult r = align_trajectories(cam, head);
        CHECK(r.scale == doctest::Approx(1.0 / planted).epsilon(1e-6));
        CHECK(trans_err(r.aligned, head) < 1e-9);
    }
}

TEST_CASE("alignment removes a rigid offset via first-frame matching") {
    Rng rng(2);
    Se3Trajectory head = line_track(7, {0.2, 0.01, 0.1}, Eigen::Matrix3d::Identity());
    const Eigen::Matrix3d R = random_rotation(rng);
    const Eigen::Vector3d t(0.4, -0.2, 1.0);
    Se3Trajectory cam = head;
    for (auto& p : cam.poses) {
        p.rotation = R * p.rotation;
        p.position = R * p.position + t;
    }
    const AlignmentResult r = align_trajectories(cam, head);
    CHECK(trans_err(r.aligned, head) < 1e-9);
    CHECK(rot_err(r.aligned, head) < 1e-6);
}

TEST_CASE("alignment is idempotent") {
    Se3Trajectory head = line_track(9, {0.15, 0.02, 0.08}, kin::rot_y(-0.4));
    Se3Trajectory cam = head;
    for (auto& p : cam.poses) p.position *= 2.5;

    const AlignmentResult first = align_trajectories(cam, head);
    const AlignmentResult second = align_trajectories(first.aligned, head);
    CHECK(second.scale == doctest::Approx(1.0).epsilon(1e-9));
    for (int i = 0; i < head.size(); ++i)
        CHECK((second.aligned.poses[i].position - first.aligned.poses[i].position).norm() < 1e-9);
}

TEST_CASE("alignment flags degenerate static camera tracks") {
    Se3Trajectory cam = line_track(5, {0, 0, 0}, Eigen::Matrix3d::Identity());
    Se3Trajectory head = line_track(5, {0.1, 0, 0}, Eigen::Matrix3d::Identity());
    const AlignmentResult r = align_trajectories(cam, head);
    CHECK(r.degenerate);
    CHECK(r.scale == 1.0);
}

TEST_CASE("trans_err arithmetic cases") {
    const int L = 10;
    Se3Trajectory head = line_track(L, {0.1, 0, 0}, Eigen::Matrix3d::Identity());
    // constant 0.5 m offset on frames > 0
    Se3Trajectory cam = head;
    for (int i = 1; i < L; ++i) cam.poses[i].position.y() += 0.5;
    CHECK(trans_err(cam, head) == doctest::Approx(0.5 * (L - 1) / L).epsilon(1e-12));

    // linear drift 0..d averages to about d/2
    const double d = 0.8;
    Se3Trajectory drift = head;
    for (int i = 0; i < L; ++i) drift.poses[i].position.y() += d * i / (L - 1);
    CHECK(trans_err(drift, head) == doctest::Approx(d / 2).epsilon(0.12));
}

TEST_CASE("rot_err: 90 degree yaw offset and quaternion oracle agreement") {
    Se3Trajectory head = line_track(5, {0.1, 0, 0}, Eigen::Matrix3d::Identity());
    Se3Trajectory cam = head;
    for (auto& p : cam.poses) p.rotation = kin::rot_y(std::numbers::pi / 2) * p.rotation;
    CHECK(rot_err(cam, head) == doctest::Approx(90.0).epsilon(1e-9));

    // random rotation pairs vs the quaternion double-cover oracle
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        const Eigen::Matrix3d a = random_rotation(rng);
        const Eigen::Matrix3d b = random_rotation(rng);
        const double geodesic = kin::rotation_angle_deg(a, b);
        const Eigen::Quaterniond qa(a), qb(b);
        const Eigen::Quaterniond rel = qa.conjugate() * qb;
        const double oracle =
            2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w())) * 180.0 / std::numbers::pi;
        CHECK(geodesic == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("trans and rot errors are invariant to a joint rigid transform") {
    Rng rng(5);
    Se3Trajectory head;
    for (int i = 0; i < 9; ++i) {
        Se3Trajectory::PoseStamped p;
        p.rotation = random_rotation(rng);
        p.position = {rng.uniform(-1, 1), rng.uniform(0, 2), rng.uniform(-1, 1)};
        p.timestamp = i;
        head.poses.push_back(p);
    }
    Se3Trajectory cam = head;
    for (auto& p : cam.poses) {
        p.position += Eigen::Vector3d(0.05, -0.02, 0.04);
        p.rotation = kin::rot_x(0.05) * p.rotation;
    }
    const double te = trans_err(cam, head);
    const double re = rot_err(cam, head);

    const Eigen::Matrix3d R = random_rotation(rng);
    const Eigen::Vector3d t(2, -1, 3);
    auto moved = [&](Se3Trajectory tr) {
        for (auto& p : tr.poses) {
            p.rotation = R * p.rotation;
            p.position = R * p.position + t;
        }
        return tr;
    };
    CHECK(trans_err(moved(cam), moved(head)) == doctest::Approx(te).epsilon(1e-9));
    CHECK(rot_err(moved(cam), moved(head)) == doctest::Approx(re).epsilon(1e-9));
}

TEST_CASE("hand score confusion arithmetic") {
    HandObservationSequence perfect(10);
    for (auto& f : perfect)
        for (auto& h : f) {
            h.present_in_video = true;
            h.visible_from_head = true;
        }
    CHECK(hand_score(perfect) == 1.0);

    HandObservationSequence wrong(10);
    for (auto& f : wrong)
        for (auto& h : f) {
            h.present_in_video = true;
            h.visible_from_head = false;
        }
    CHECK(hand_score(wrong) == 0.0);

    // 6 TP, 2 FP, 2 FN per hand -> F = 12/16
    HandObservationSequence mixed(10);
    for (int i = 0; i < 10; ++i) {
        for (auto& h : mixed[i]) {
            if (i < 6) h = {true, true};
            else if (i < 8) h = {true, false};
            else h = {false, true};
        }
    }
    CHECK(hand_score(mixed) == doctest::Approx(12.0 / 16.0).epsilon(1e-12));

    // vacuous hands (no positives at all) score 1
    HandObservationSequence vacuous(5);
    CHECK(hand_score(vacuous) == 1.0);

    // frame order invariance
    HandObservationSequence shuffled = mixed;
    std::swap(shuffled[0], shuffled[9]);
    std::swap(shuffled[2], shuffled[7]);
    CHECK(hand_score(shuffled) == hand_score(mixed));
}

TEST_CASE("hand visibility matches an independent projection oracle on seeded poses") {
    const auto skeleton = kin::toy_humanoid();
    synth::CameraIntrinsics intr;
    synth::CameraMount mount;
    for (int i = 0; i < 100; ++i) {
        const kin::MotionSequence m = kin::random_motion(skeleton, 5, 4.0, 4200 + i);
        const auto vis = hand_visibility(m, intr, mount);
        for (int f = 0; f < m.frame_count(); ++f) {
            const auto fk = kin::forward_kinematics(skeleton, m.frames[f]);
            const Eigen::Matrix3d head_r = fk.rotation[skeleton.head_index];
            const Eigen::Vector3d head_p = fk.position[skeleton.head_index];
            for (int hand = 0; hand < 2; ++hand) {
                const int wrist = hand == 0 ? skeleton.left_wrist : skeleton.right_wrist;
                const Eigen::Vector3d rel = head_r.transpose() * (fk.position[wrist] - head_p);
                bool expected = false;
                if (rel.z() > 0) {
                    const double u = intr.fx * rel.x() / rel.z() + intr.cx;
                    const double v = intr.fy * rel.y() / rel.z() + intr.cy;
                    expected = u >= 0 && u < intr.width && v >= 0 && v < intr.height;
                }
                CHECK(vis[f][hand] == expected);
            }
        }
    }
}

TEST_CASE("hand behind the head is invisible, hand ahead and centered is visible") {
    synth::CameraIntrinsics intr;
    synth::CameraMount mount;
    kin::Skeleton s;
    s.joint_count = 3;
    s.parent = {-1, 0, 0};
    s.offset = {Eigen::Vector3d::Zero(), Eigen::Vector3d(0, 0, 1.0), Eigen::Vector3d(0, 0, -1.0)};
    s.head_index = 0;
    s.left_wrist = 1;  // 1 m directly ahead
    s.right_wrist = 2; // behind the head
    s.validate();
    kin::MotionSequence m;
    m.skeleton = s;
    m.fps = 4;
    kin::Pose p;
    p.joint_rotations.assign(3, Eigen::Matrix3d::Identity());
    m.frames = {p, p};
    const auto vis = hand_visibility(m, intr, mount);
    CHECK(vis[0][0] == true);
    CHECK(vis[0][1] == false);
}

TEST_CASE("frechet distance basics") {
    Rng rng(6);
    FeatureCloud a;
    a.provider = "test";
    a.features = Eigen::MatrixXd(64, 4);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 4; ++j) a.features(i, j) = rng.normal();
    CHECK(frechet_distance(a, a) == doctest::Approx(0.0).epsilon(1e-6));

    // population stats: unit covariances with means offset by d give d^2
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
    const Eigen::VectorXd mu = Eigen::VectorXd::Zero(4);
    Eigen::VectorXd nu(4);
    nu << 1.0, -2.0, 0.5, 1.5;
    CHECK(frechet_from_stats(mu, eye, nu, eye) == doctest::Approx(nu.squaredNorm()).epsilon(1e-9));

    FeatureCloud tiny;
    tiny.features = Eigen::MatrixXd(1, 4);
    CHECK_THROWS_AS(frechet_distance(tiny, a), ValidationError);

    FeatureCloud wrong;
    wrong.features = Eigen::MatrixXd::Random(8, 3);
    CHECK_THROWS_AS(frechet_distance(a, wrong), ValidationError);
}

TEST_CASE("frechet matches an eigendecomposition oracle on random gaussians") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto random_cov = [&]() {
            Eigen::MatrixXd m(4, 4);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) m(i, j) = rng.normal();
            return Eigen::MatrixXd(m * m.transpose() + 0.1 * Eigen::MatrixXd::Identity(4, 4));
        };
        Eigen::VectorXd mu_a(4), mu_b(4);
        for (int i = 0; i < 4; ++i) {
            mu_a(i) = rng.normal();
            mu_b(i) = rng.normal();
        }
        const Eigen::MatrixXd ca = random_cov();
        const Eigen::MatrixXd cb = random_cov();

        const double ours = frechet_from_stats(mu_a, ca, mu_b, cb);

        // brute-force oracle: eigenvalues of the (nonsymmetric) product
        const Eigen::MatrixXd prod = ca * cb;
        Eigen::EigenSolver<Eigen::MatrixXd> es(prod);
        double trace_sqrt = 0;
        for (int i = 0; i < 4; ++i) trace_sqrt += std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
        const double oracle = (mu_a - mu_b).squaredNorm() + ca.trace() + cb.trace() - 2.0 * trace_sqrt;
        CHECK(ours == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("frechet is symmetric and nonnegative") {
    Rng rng(8);
    FeatureCloud a, b;
    a.features = Eigen::MatrixXd(32, 5);
    b.features = Eigen::MatrixXd(40, 5);
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 5; ++j) a.features(i, j) = rng.normal();
    for (int i = 0; i < 40; ++i)
        for (int j = 0; j < 5; ++j) b.features(i, j) = rng.normal(0.5, 1.3);
    const double ab = frechet_distance(a, b);
    const double ba = frechet_distance(b, a);
    CHECK(ab >= 0.0);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-9));
}

TEST_CASE("retrieval: identical paired features give perfect precision and zero distance") {
    Rng rng(9);
    Eigen::MatrixXd f(32, 6);
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 6; ++j) f(i, j) = rng.normal();
    const RetrievalMetrics m = retrieval_metrics(f, f, 32, 3, 1);
    CHECK(m.r_precision == 1.0);
    CHECK(m.mm_dist == doctest::Approx(0.0));
}

TEST_CASE("retrieval: random features approach the 3/32 chance rate") {
    Rng rng(10);
    double total = 0;
    const int trials = 300;
    for (int trial = 0; trial < trials; ++trial) {
        Eigen::MatrixXd text(32, 8), motion(32, 8);
        for (int i = 0; i < 32; ++i)
            for (int j = 0; j < 8; ++j) {
                text(i, j) = rng.normal();
                motion(i, j) = rng.normal();
            }
        total += retrieval_metrics(text, motion, 32, 3, trial).r_precision;
    }
    CHECK(std::abs(total / trials - 3.0 / 32.0) < 0.02);
}

TEST_CASE("retrieval: constant offset pairs give mm-dist equal to the offset norm") {
    Rng rng(11);
    Eigen::MatrixXd text(32, 4), motion(32, 4);
    Eigen::RowVectorXd offset(4);
    offset << 2.0, 0.0, 0.0, 0.0;
    for (int i = 0; i < 32; ++i) {
        for (int j = 0; j < 4; ++j) text(i, j) = rng.normal();
        motion.row(i) = text.row(i) + offset;
    }
    const RetrievalMetrics m = retrieval_metrics(text, motion, 32, 3, 2);
    CHECK(m.mm_dist == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("retrieval rejects pools smaller than the rank cutoff") {
    const Eigen::MatrixXd f = Eigen::MatrixXd::Random(8, 4);
    CHECK_THROWS_AS(retrieval_metrics(f, f, 2, 3, 0), ValidationError);
    CHECK_THROWS_AS(retrieval_metrics(f, f, 16, 3, 0), ValidationError); // not enough samples
}

TEST_CASE("end-to-end ground truth: gt camera provider scores perfectly") {
    const auto skeleton = kin::toy_humanoid();
    synth::DatasetGenConfig config;
    config.count = 4;
    config.templates = {"walk-forward", "turn-left", "raise-right-hand", "look-up"};
    const std::string path = (std::filesystem::temp_directory_path() / "egtw_metrics_ds.egtw").string();
    synth::generate_dataset(config, skeleton, path);
    synth::Dataset ds(path);

    std::vector<synth::Sample> samples;
    for (int i = 0; i < ds.size(); ++i) samples.push_back(ds.sample(i));

    EvaluateConfig ec;
    const EvaluationReport report = evaluate_samples(samples, {}, ds.sample_config(), ec);
    CHECK(*report.mean_trans_err < 1e-6);
    CHECK(*report.mean_rot_err < 1e-6);
    CHECK(*report.mean_hand_score == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(*report.m_fid < 1e-9);

    const std::string csv = (std::filesystem::temp_directory_path() / "egtw_metrics_report.csv").string();
    report.save_csv(csv);
    const CsvTable t = CsvTable::load(csv);
    CHECK(static_cast<int>(t.rows.size()) == ds.size() + 1);
    CHECK(t.rows.back()[0] == "aggregate");
    std::filesystem::remove(csv);
    std::filesystem::remove(path);
}

TEST_CASE("perturbed pose provider degrades errors in proportion to sigma") {
    const auto skeleton = kin::toy_humanoid();
    synth::DatasetGenConfig config;
    config.count = 3;
    config.templates = {"walk-forward"};
    const std::string path = (std::filesystem::temp_directory_path() / "egtw_metrics_ds2.egtw").string();
    synth::generate_dataset(config, skeleton, path);
    synth::Dataset ds(path);
    std::vector<synth::Sample> samples;
    for (int i = 0; i < ds.size(); ++i) samples.push_back(ds.sample(i));

    EvaluateConfig ec;
    ec.fid = false;
    ec.hand = false;
    ec.pose.kind = PoseProviderKind::Perturbed;
    ec.pose.sigma_position = 0.05;
    ec.pose.sigma_rotation_deg = 3.0;
    const EvaluationReport noisy = evaluate_samples(samples, {}, ds.sample_config(), ec);
    CHECK(*noisy.mean_trans_err > 1e-3);
    CHECK(*noisy.mean_rot_err > 0.1);
    std::filesystem::remove(path);
}

TEST_CASE("toy feature providers separate templates on generated data") {
    const auto skeleton = kin::toy_humanoid();
    std::vector<std::string> templates = {"walk-forward", "turn-left", "turn-right", "crouch",
                                          "raise-right-hand", "look-up"};
    int correct = 0, total = 0;
    for (std::size_t k = 0; k < templates.size(); ++k) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const auto kind = synth::template_kind_from_name(templates[k]);
            const auto tmpl = synth::randomized_template(kind, seed + 100 * k);
            const auto motion = synth::generate_motion(tmpl, skeleton, 21, 4.0, seed);
            const Eigen::VectorXd mf = motion_template_features(motion, seed);
            const Eigen::VectorXd tf =
                text_template_features(synth::template_text(kind, seed), seed + 1);
            // the paired text should be the closest among all template one-hots
            double best = 1e18;
            int best_kind = -1;
            for (int other = 0; other < synth::kTemplateKindCount; ++other) {
                const Eigen::VectorXd of = text_template_features(
                    synth::template_text(static_cast<synth::TemplateKind>(other), seed), seed + 1);
                const double d = (mf - of).norm();
                if (d < best) {
                    best = d;
                    best_kind = other;
                }
            }
            (void)tf;
            if (best_kind == static_cast<int>(kind)) ++correct;
            ++total;
        }
    }
    CHECK(correct >= total - 2); // heuristics may miss an odd parameter draw
}

TEST_CASE("trajectory serialization round trips through chunks and json") {
    Rng rng(12);
    Se3Trajectory t;
    for (int i = 0; i < 6; ++i) {
        Se3Trajectory::PoseStamped p;
        p.rotation = random_rotation(rng);
        p.position = {rng.normal(), rng.normal(), rng.normal()};
        p.timestamp = i * 0.5;
        t.poses.push_back(p);
    }
    const Se3Trajectory back = trajectory_from_json(trajectory_to_json(t));
    for (int i = 0; i < t.size(); ++i) {
        CHECK((back.poses[i].rotation - t.poses[i].rotation).cwiseAbs().maxCoeff() < 1e-15);
        CHECK((back.poses[i].position - t.poses[i].position).norm() < 1e-15);
    }
    ChunkMap map;
    trajectory_to_chunks(t, map, "traj/");
    const Se3Trajectory back2 = trajectory_from_chunks(map, "traj/");
    CHECK(back2.size() == t.size());
    CHECK((back2.poses[3].rotation - t.poses[3].rotation).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("timestamps must strictly increase") {
    Se3Trajectory t = line_track(4, {0.1, 0, 0}, Eigen::Matrix3d::Identity());
    t.poses[2].timestamp = t.poses[1].timestamp;
    CHECK_THROWS_AS(t.validate(), ValidationError);
}
