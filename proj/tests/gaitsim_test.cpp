#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "gaittrack/gaitsim.hpp"
#include "test_util.hpp"

using namespace gait;
using namespace gait::sim;
using testutil::expect_error;

namespace {

// Central difference of a vector-valued path function.
template <class Fn>
Eigen::Vector3d central_fd(Fn&& f, double t, double h) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("the swing path starts and ends at rest on the ground") {
  FootPath path;
  path.duration = 0.8;
  path.speed = 1.3;
  path.clearance_m = 0.06;
  path.sway_m = 0.02;

  CHECK(testutil::exact_equal(path.pos(0.0), Eigen::Vector3d::Zero()));
  // At t = T the cycloid has advanced exactly one stride; lift and sway die out.
  const Eigen::Vector3d end = path.pos(path.duration);
  CHECK(end.x() == doctest::Approx(path.speed * path.duration).epsilon(1e-12));
  CHECK(std::abs(end.y()) < 1e-12);
  CHECK(std::abs(end.z()) < 1e-12);

  // Zero forward velocity at both ends (the foot does not skid at contact).
  CHECK(std::abs(path.vel(0.0).x()) < 1e-12);
  CHECK(std::abs(path.vel(path.duration).x()) < 1e-12);
  CHECK(std::abs(path.vel(0.5 * path.duration).x() - 2.0 * path.speed) < 1e-12);

  // The lift peaks mid-swing at the configured clearance.
  CHECK(path.pos(0.5 * path.duration).z() == doctest::Approx(path.clearance_m).epsilon(1e-12));
  CHECK(path.pitch(0.0) == 0.0);
}

TEST_CASE("path velocity and acceleration are the calculus derivatives") {
  FootPath path;
  path.duration = 1.1;
  path.speed = 0.9;
  path.clearance_m = 0.04;
  path.sway_m = 0.025;
  path.pitch_amp = 0.35;

  const double h = 1e-6;
  for (double frac : {0.05, 0.21, 0.37, 0.52, 0.68, 0.83, 0.97}) {
    const double t = frac * path.duration;
    const Eigen::Vector3d v_fd = central_fd([&](double u) { return path.pos(u); }, t, h);
    const Eigen::Vector3d a_fd = central_fd([&](double u) { return path.vel(u); }, t, h);
    CHECK((path.vel(t) - v_fd).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((path.acc(t) - a_fd).cwiseAbs().maxCoeff() < 1e-6);
    const double pr_fd = (path.pitch(t + h) - path.pitch(t - h)) / (2.0 * h);
    CHECK(std::abs(path.pitch_rate(t) - pr_fd) < 1e-7);
  }
}

TEST_CASE("parameter validation enforces the protocol ranges") {
  GaitParams p;
  validate_params(p);  // defaults are in range

  auto reject = [](auto&& mutate) {
    GaitParams q;
    mutate(q);
    expect_error(ErrorCode::invalid_params, [&] { validate_params(q); });
  };
  reject([](GaitParams& q) { q.speed = 0.3; });
  reject([](GaitParams& q) { q.speed = 2.0; });
  reject([](GaitParams& q) { q.step_duration = 0.5; });
  reject([](GaitParams& q) { q.step_duration = 1.5; });
  reject([](GaitParams& q) { q.clearance = 1.0; });
  reject([](GaitParams& q) { q.clearance = 9.0; });
  reject([](GaitParams& q) { q.sway = -0.1; });
  reject([](GaitParams& q) { q.sway = 3.5; });
  reject([](GaitParams& q) { q.pitch_amp = 1.2; });
  reject([](GaitParams& q) { q.accel_noise_sigma = -1.0; });
}

TEST_CASE("sampled sensor signals follow the rigid-body model exactly") {
  GaitParams params;
  params.step_duration = 1.2;
  params.clearance = 6.0;
  params.sway = 2.0;
  const FootPath path = synth_trajectory(params);
  const StepStreams streams = imu_from_trajectory(path, params);

  REQUIRE(streams.imu.size() == 600);  // 1.2 s at 500 Hz
  REQUIRE(streams.gt.size() == 120);
  CHECK(streams.imu.t(0) == 0.0);
  CHECK(streams.imu.t(1) == doctest::Approx(0.002).epsilon(1e-12));

  // t = 0: zero pitch, so the body frame coincides with the lab frame and the
  // reading is the path acceleration plus gravity, bias-free and noise-free.
  CHECK(testutil::exact_equal(streams.imu.accel.col(0), path.acc(0.0) + gravity_vector()));
  const double w = 2.0 * std::numbers::pi / path.duration;
  CHECK(streams.imu.accel(2, 0) ==
        doctest::Approx(0.5 * path.clearance_m * w * w - kGravity).epsilon(1e-12));
  CHECK(streams.imu.accel(0, 0) == doctest::Approx(0.0));
  CHECK(streams.imu.gyro(0, 0) == 0.0);
  CHECK(streams.imu.gyro(1, 0) == doctest::Approx(path.pitch_amp * w).epsilon(1e-12));
  CHECK(streams.imu.gyro(2, 0) == 0.0);

  // Mid-swing sample: rotate the lab-frame specific force by the pitch.
  const Eigen::Index i = 223;
  const double t = streams.imu.t(i);
  const double c = std::cos(path.pitch(t)), s = std::sin(path.pitch(t));
  Eigen::Matrix3d r;
  r << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
  const Eigen::Vector3d expect = r.transpose() * (path.acc(t) + gravity_vector());
  CHECK((streams.imu.accel.col(i) - expect).cwiseAbs().maxCoeff() < 1e-12);

  // Capture positions are the path in centimeters on the 100 Hz grid.
  CHECK(testutil::exact_equal(streams.gt.pos.col(0), Eigen::Vector3d::Zero()));
  const Eigen::Vector3d p40 = 100.0 * path.pos(40.0 / kGtRateHz);
  CHECK((streams.gt.pos.col(40) - p40).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bias and seeded noise enter the sampled signals as configured") {
  GaitParams params;
  params.accel_bias = Eigen::Vector3d(0.1, -0.2, 0.05);
  params.gyro_bias = Eigen::Vector3d(-0.01, 0.02, 0.015);
  const FootPath path = synth_trajectory(params);

  const StepStreams clean = imu_from_trajectory(path, params);
  GaitParams no_bias = params;
  no_bias.accel_bias.setZero();
  no_bias.gyro_bias.setZero();
  const StepStreams base = imu_from_trajectory(path, no_bias);
  // Bias is a constant additive offset on every sample.
  for (Eigen::Index i : {Eigen::Index(0), Eigen::Index(77), Eigen::Index(499)}) {
    CHECK((clean.imu.accel.col(i) - base.imu.accel.col(i) - params.accel_bias)
              .cwiseAbs()
              .maxCoeff() < 1e-15);
    CHECK((clean.imu.gyro.col(i) - base.imu.gyro.col(i) - params.gyro_bias)
              .cwiseAbs()
              .maxCoeff() < 1e-15);
  }

  GaitParams noisy = params;
  noisy.accel_noise_sigma = 0.05;
  noisy.gyro_noise_sigma = 0.005;
  noisy.seed = 7;
  const StepStreams a = imu_from_trajectory(path, noisy);
  const StepStreams b = imu_from_trajectory(path, noisy);
  CHECK(testutil::exact_equal(a.imu.accel, b.imu.accel));
  CHECK(testutil::exact_equal(a.imu.gyro, b.imu.gyro));
  noisy.seed = 8;
  const StepStreams c = imu_from_trajectory(path, noisy);
  CHECK(!(a.imu.accel.array() == c.imu.accel.array()).all());
  // Noise never touches the capture stream.
  CHECK(testutil::exact_equal(a.gt.pos, clean.gt.pos));
}

TEST_CASE("out-of-range signals are refused rather than clipped") {
  GaitParams params;
  const FootPath path = synth_trajectory(params);

  GaitParams hot = params;
  hot.accel_bias = Eigen::Vector3d(200.0, 0.0, 0.0);  // past 16 g
  expect_error(ErrorCode::range_exceeded, [&] { imu_from_trajectory(path, hot); });

  GaitParams spin = params;
  spin.gyro_bias = Eigen::Vector3d(0.0, 40.0, 0.0);  // past 2000 deg/s
  expect_error(ErrorCode::range_exceeded, [&] { imu_from_trajectory(path, spin); });

  // Too short to hold one network window.
  FootPath stub = path;
  stub.duration = 0.2;
  expect_error(ErrorCode::invalid_params, [&] { imu_from_trajectory(stub, params); });
}

TEST_CASE("corpus generation is deterministic and spans the configured ranges") {
  CorpusConfig cfg;
  cfg.n_subjects = 4;
  cfg.steps_per_subject = 6;
  cfg.seed = 11;
  const std::vector<SyntheticStep> detailed = generate_corpus_detailed(cfg);
  REQUIRE(detailed.size() == 24);

  for (std::size_t k = 0; k < detailed.size(); ++k) {
    const SyntheticStep& st = detailed[k];
    const int subj = static_cast<int>(k) / cfg.steps_per_subject;
    CHECK(st.segment.subject_id == (subj == 0   ? "s01"
                                    : subj == 1 ? "s02"
                                    : subj == 2 ? "s03"
                                                : "s04"));
    CHECK(st.segment.step_index == static_cast<int>(k) % cfg.steps_per_subject);
    CHECK(st.params.speed >= cfg.speed_min);
    CHECK(st.params.speed <= cfg.speed_max);
    CHECK(st.params.step_duration >= cfg.duration_min);
    CHECK(st.params.step_duration <= cfg.duration_max);
    CHECK(st.params.clearance >= cfg.clearance_min);
    CHECK(st.params.clearance <= cfg.clearance_max);
    CHECK(st.params.accel_bias.cwiseAbs().maxCoeff() <= cfg.accel_bias_mag);
    CHECK(st.params.gyro_bias.cwiseAbs().maxCoeff() <= cfg.gyro_bias_mag);
    // Aligned 5:1 slice pair by construction.
    CHECK(st.segment.imu_len() % 5 == 0);
    CHECK(st.segment.gt_len() * 5 == st.segment.imu_len());
    // The capture starts where the bookkeeping says the step starts.
    CHECK(testutil::exact_equal(st.segment.gt.pos.col(0), st.origin_cm));
  }

  // Per-subject bias is constant; consecutive origins chain by the stride.
  for (std::size_t k = 0; k + 1 < detailed.size(); ++k) {
    if (detailed[k].segment.subject_id != detailed[k + 1].segment.subject_id) continue;
    CHECK(testutil::exact_equal(detailed[k].params.accel_bias, detailed[k + 1].params.accel_bias));
    const Eigen::Vector3d next =
        detailed[k].origin_cm + 100.0 * detailed[k].path.pos(detailed[k].path.duration);
    CHECK(testutil::exact_equal(next, detailed[k + 1].origin_cm));
  }

  const std::vector<StepSegment> again = generate_corpus(cfg);
  REQUIRE(again.size() == detailed.size());
  for (std::size_t k = 0; k < again.size(); ++k) {
    CHECK(testutil::exact_equal(again[k].imu.accel, detailed[k].segment.imu.accel));
    CHECK(testutil::exact_equal(again[k].gt.pos, detailed[k].segment.gt.pos));
  }

  CorpusConfig bad = cfg;
  bad.n_subjects = 0;
  expect_error(ErrorCode::invalid_params, [&] { generate_corpus(bad); });
}

TEST_CASE("continuous walks alternate stance and swing on the sensor grid") {
  GaitParams base;
  base.accel_bias = Eigen::Vector3d(0.05, 0.0, -0.02);
  base.gyro_bias = Eigen::Vector3d(0.001, -0.002, 0.0);
  const SyntheticWalk walk = simulate_walk(base, 5, 17, "s03");

  REQUIRE(walk.true_boundaries.size() == 6);
  CHECK(walk.imu.subject_id == "s03");
  CHECK(walk.imu.size() % 5 == 0);
  CHECK(walk.gt.size() * 5 == walk.imu.size());
  for (Eigen::Index b : walk.true_boundaries) {
    CHECK(b % 5 == 0);
    CHECK(b < walk.imu.size());
  }
  for (std::size_t k = 0; k + 1 < walk.true_boundaries.size(); ++k)
    CHECK(walk.true_boundaries[k] < walk.true_boundaries[k + 1]);

  // The capture grid is the every-fifth-sample slice of the sensor grid.
  for (Eigen::Index j : {Eigen::Index(0), Eigen::Index(10), walk.gt.size() - 1})
    CHECK(walk.imu.t(5 * j) == walk.gt.t(j));

  // Boundaries sit mid-stance: the foot is on the ground, so the gyro reads
  // exactly the bias and the accelerometer exactly gravity plus bias.
  const Eigen::Vector3d rest = gravity_vector() + base.accel_bias;
  for (Eigen::Index b : walk.true_boundaries) {
    CHECK(testutil::exact_equal(walk.imu.gyro.col(b), base.gyro_bias));
    CHECK(testutil::exact_equal(walk.imu.accel.col(b), rest));
  }

  // The ground-truth track only ever moves forward between boundaries.
  CHECK(walk.gt.pos(0, walk.gt.size() - 1) > walk.gt.pos(0, 0));

  // annotations() pairs consecutive boundaries.
  const std::vector<Annotation> ann = walk.annotations();
  REQUIRE(ann.size() == 5);
  for (std::size_t k = 0; k < ann.size(); ++k) {
    CHECK(ann[k].start == walk.true_boundaries[k]);
    CHECK(ann[k].end == walk.true_boundaries[k + 1]);
  }

  // Determinism in, determinism out.
  const SyntheticWalk rerun = simulate_walk(base, 5, 17, "s03");
  CHECK(testutil::exact_equal(rerun.imu.accel, walk.imu.accel));
  CHECK(testutil::exact_equal(rerun.gt.pos, walk.gt.pos));

  expect_error(ErrorCode::invalid_params, [&] { simulate_walk(base, 0, 1); });
  expect_error(ErrorCode::invalid_params, [&] { simulate_walk(base, 3, 1, "", 0.05); });
}

TEST_CASE("walk corpora give each subject its own parameters and streams") {
  CorpusConfig cfg;
  cfg.n_subjects = 3;
  cfg.steps_per_subject = 4;
  cfg.seed = 19;
  const std::vector<SubjectWalk> walks = simulate_corpus_walks(cfg);
  REQUIRE(walks.size() == 3);
  CHECK(walks[0].subject_id == "s01");
  CHECK(walks[1].subject_id == "s02");
  CHECK(walks[2].subject_id == "s03");
  for (const SubjectWalk& sw : walks) {
    CHECK(sw.walk.true_boundaries.size() == 5);
    CHECK(sw.walk.imu.subject_id == sw.subject_id);
    CHECK(sw.base.speed >= cfg.speed_min);
    CHECK(sw.base.speed <= cfg.speed_max);
  }
  // Subjects draw different parameters from their own streams.
  CHECK(walks[0].base.speed != walks[1].base.speed);

  const std::vector<SubjectWalk> rerun = simulate_corpus_walks(cfg);
  CHECK(testutil::exact_equal(rerun[2].walk.imu.gyro, walks[2].walk.imu.gyro));
}
