#include "gaittrack/gaitsim.hpp"

#include <algorithm>
#include <cmath>

#include "gaittrack/csv.hpp"

namespace gait::sim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Eigen::Matrix3d rot_y(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix3d r;
  r << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
  return r;
}

Eigen::Index imu_samples_for(double duration) {
  return kRateRatio * static_cast<Eigen::Index>(std::llround(duration * kGtRateHz));
}

double clamped_jitter(double value, double rel, double lo, double hi, Rng& rng) {
  const double jittered = value * (1.0 + rel * (2.0 * rng.uniform() - 1.0));
  return std::clamp(jittered, lo, hi);
}

GaitParams draw_subject(const CorpusConfig& cfg, Rng& srng) {
  GaitParams subject;
  subject.speed = cfg.speed_min + (cfg.speed_max - cfg.speed_min) * srng.uniform();
  subject.step_duration =
      cfg.duration_min + (cfg.duration_max - cfg.duration_min) * srng.uniform();
  subject.clearance = cfg.clearance_min + (cfg.clearance_max - cfg.clearance_min) * srng.uniform();
  subject.sway = cfg.sway_min + (cfg.sway_max - cfg.sway_min) * srng.uniform();
  subject.pitch_amp = cfg.pitch_min + (cfg.pitch_max - cfg.pitch_min) * srng.uniform();
  for (int a = 0; a < 3; ++a)
    subject.accel_bias(a) = cfg.accel_bias_mag * (2.0 * srng.uniform() - 1.0);
  for (int a = 0; a < 3; ++a)
    subject.gyro_bias(a) = cfg.gyro_bias_mag * (2.0 * srng.uniform() - 1.0);
  subject.accel_noise_sigma = cfg.accel_noise_sigma;
  subject.gyro_noise_sigma = cfg.gyro_noise_sigma;
  return subject;
}

std::string subject_name(int s) {
  char name[16];
  std::snprintf(name, sizeof(name), "s%02d", s + 1);
  return name;
}

}  // namespace

void validate_params(const GaitParams& params) {
  require(params.speed >= 0.45 && params.speed <= 1.75, ErrorCode::invalid_params,
          "speed " + csv::format(params.speed) + " outside [0.45, 1.75] m/s");
  require(params.step_duration >= 0.6 && params.step_duration <= 1.4, ErrorCode::invalid_params,
          "step_duration outside [0.6, 1.4] s");
  require(params.clearance >= 2.0 && params.clearance <= 8.0, ErrorCode::invalid_params,
          "clearance outside [2, 8] cm");
  require(params.sway >= 0.0 && params.sway <= 3.0, ErrorCode::invalid_params,
          "sway outside [0, 3] cm");
  require(params.pitch_amp >= 0.0 && params.pitch_amp <= 1.0, ErrorCode::invalid_params,
          "pitch_amp outside [0, 1] rad");
  require(params.accel_noise_sigma >= 0.0 && params.gyro_noise_sigma >= 0.0,
          ErrorCode::invalid_params, "noise sigmas must be >= 0");
}

Eigen::Vector3d FootPath::pos(double t) const {
  const double w = kTwoPi / duration;
  const double x = speed * (t - std::sin(w * t) / w);
  const double y = sway_m * std::sin(w * t);
  const double s = std::sin(0.5 * w * t);  // sin(pi t / T)
  const double z = clearance_m * s * s;
  return {x, y, z};
}

Eigen::Vector3d FootPath::vel(double t) const {
  const double w = kTwoPi / duration;
  const double x = speed * (1.0 - std::cos(w * t));
  const double y = sway_m * w * std::cos(w * t);
  const double z = clearance_m * 0.5 * w * std::sin(w * t);
  return {x, y, z};
}

Eigen::Vector3d FootPath::acc(double t) const {
  const double w = kTwoPi / duration;
  const double x = speed * w * std::sin(w * t);
  const double y = -sway_m * w * w * std::sin(w * t);
  const double z = clearance_m * 0.5 * w * w * std::cos(w * t);
  return {x, y, z};
}

double FootPath::pitch(double t) const { return pitch_amp * std::sin(kTwoPi * t / duration); }

double FootPath::pitch_rate(double t) const {
  const double w = kTwoPi / duration;
  return pitch_amp * w * std::cos(w * t);
}

FootPath synth_trajectory(const GaitParams& params) {
  validate_params(params);
  FootPath path;
  path.duration = params.step_duration;
  path.speed = params.speed;
  path.clearance_m = params.clearance / 100.0;
  path.sway_m = params.sway / 100.0;
  path.pitch_amp = params.pitch_amp;
  return path;
}

StepStreams imu_from_trajectory(const FootPath& path, const GaitParams& params,
                                const Eigen::Vector3d& origin_cm, double t0,
                                const std::string& subject_id) {
  const Eigen::Index n_imu = imu_samples_for(path.duration);
  require(n_imu >= kMinStepImuSamples, ErrorCode::invalid_params, "step too short to sample");
  const Eigen::Index n_gt = n_imu / kRateRatio;
  Rng rng(params.seed);

  StepStreams out;
  out.imu.subject_id = subject_id;
  out.imu.t.resize(n_imu);
  out.imu.accel.resize(3, n_imu);
  out.imu.gyro.resize(3, n_imu);
  const Eigen::Vector3d g = gravity_vector();
  const double dt = 1.0 / kImuRateHz;
  for (Eigen::Index i = 0; i < n_imu; ++i) {
    const double tl = static_cast<double>(i) * dt;
    out.imu.t(i) = t0 + tl;
    const Eigen::Matrix3d r_wb = rot_y(path.pitch(tl));
    Eigen::Vector3d accel = r_wb.transpose() * (path.acc(tl) + g) + params.accel_bias;
    Eigen::Vector3d gyro = Eigen::Vector3d(0.0, path.pitch_rate(tl), 0.0) + params.gyro_bias;
    for (int a = 0; a < 3; ++a) accel(a) += params.accel_noise_sigma * rng.normal();
    for (int a = 0; a < 3; ++a) gyro(a) += params.gyro_noise_sigma * rng.normal();
    if (accel.cwiseAbs().maxCoeff() > kAccelRange || gyro.cwiseAbs().maxCoeff() > kGyroRange)
      fail(ErrorCode::range_exceeded,
           "simulated signal leaves the sensor dynamic range at t=" + csv::format(tl));
    out.imu.accel.col(i) = accel;
    out.imu.gyro.col(i) = gyro;
  }

  out.gt.subject_id = subject_id;
  out.gt.t.resize(n_gt);
  out.gt.pos.resize(3, n_gt);
  for (Eigen::Index j = 0; j < n_gt; ++j) {
    const double tl = static_cast<double>(j) / kGtRateHz;
    out.gt.t(j) = t0 + tl;
    out.gt.pos.col(j) = origin_cm + 100.0 * path.pos(tl);
  }
  return out;
}

std::vector<SyntheticStep> generate_corpus_detailed(const CorpusConfig& cfg) {
  require(cfg.n_subjects >= 1 && cfg.steps_per_subject >= 1, ErrorCode::invalid_params,
          "corpus needs at least one subject and one step");
  std::vector<SyntheticStep> out;
  out.reserve(static_cast<std::size_t>(cfg.n_subjects) * cfg.steps_per_subject);
  Rng master(cfg.seed);
  for (int s = 0; s < cfg.n_subjects; ++s) {
    Rng srng = master.split(static_cast<std::uint64_t>(s));
    const GaitParams subject = draw_subject(cfg, srng);
    const std::string subject_id = subject_name(s);

    Eigen::Vector3d origin_cm = Eigen::Vector3d::Zero();
    double t0 = 0.0;
    for (int k = 0; k < cfg.steps_per_subject; ++k) {
      Rng krng = srng.split(static_cast<std::uint64_t>(k));
      GaitParams step = subject;
      step.speed = clamped_jitter(subject.speed, cfg.step_jitter, cfg.speed_min, cfg.speed_max, krng);
      step.step_duration = clamped_jitter(subject.step_duration, cfg.step_jitter,
                                          cfg.duration_min, cfg.duration_max, krng);
      step.clearance = clamped_jitter(subject.clearance, cfg.step_jitter, cfg.clearance_min,
                                      cfg.clearance_max, krng);
      step.sway = std::clamp(subject.sway * (1.0 + cfg.step_jitter * (2.0 * krng.uniform() - 1.0)),
                             cfg.sway_min, cfg.sway_max);
      step.seed = krng.next_u64();

      const FootPath path = synth_trajectory(step);
      const StepStreams streams = imu_from_trajectory(path, step, origin_cm, t0, subject_id);

      SyntheticStep synth;
      synth.segment.imu = streams.imu;
      synth.segment.gt = streams.gt;
      synth.segment.subject_id = subject_id;
      synth.segment.step_index = k;
      synth.params = step;
      synth.path = path;
      synth.origin_cm = origin_cm;
      out.push_back(std::move(synth));

      origin_cm += 100.0 * path.pos(path.duration);
      t0 += static_cast<double>(streams.imu.size()) / kImuRateHz + 0.4;
    }
  }
  return out;
}

std::vector<StepSegment> generate_corpus(const CorpusConfig& cfg) {
  std::vector<StepSegment> out;
  for (auto& s : generate_corpus_detailed(cfg)) out.push_back(std::move(s.segment));
  return out;
}

std::vector<Annotation> SyntheticWalk::annotations() const {
  std::vector<Annotation> out;
  for (std::size_t k = 0; k + 1 < true_boundaries.size(); ++k)
    out.push_back(Annotation{true_boundaries[k], true_boundaries[k + 1]});
  return out;
}

SyntheticWalk simulate_walk(const GaitParams& base, int n_steps, std::uint64_t seed,
                            const std::string& subject_id, double stance_duration,
                            double step_jitter) {
  validate_params(base);
  require(n_steps >= 1, ErrorCode::invalid_params, "walk needs at least one step");
  require(stance_duration >= 0.1, ErrorCode::invalid_params, "stance must be at least 0.1 s");
  Rng rng(seed);

  struct Phase {
    bool swing = false;
    Eigen::Index n = 0;          // IMU samples
    FootPath path;               // swing only
    Eigen::Vector3d base_m = Eigen::Vector3d::Zero();  // lab position at phase start, meters
  };

  std::vector<Phase> phases;
  Eigen::Vector3d cur_m = Eigen::Vector3d::Zero();
  for (int k = 0; k < n_steps; ++k) {
    Phase stance;
    stance.n = imu_samples_for(clamped_jitter(stance_duration, step_jitter, 0.1, 2.0, rng));
    stance.base_m = cur_m;
    phases.push_back(stance);

    GaitParams step = base;
    step.speed = clamped_jitter(base.speed, step_jitter, 0.45, 1.75, rng);
    step.step_duration = clamped_jitter(base.step_duration, step_jitter, 0.6, 1.4, rng);
    step.clearance = clamped_jitter(base.clearance, step_jitter, 2.0, 8.0, rng);

    Phase swing;
    swing.swing = true;
    swing.path = synth_trajectory(step);
    swing.n = imu_samples_for(swing.path.duration);
    swing.base_m = cur_m;
    phases.push_back(swing);
    cur_m += swing.path.pos(static_cast<double>(swing.n) / kImuRateHz);
  }
  Phase last;
  last.n = imu_samples_for(stance_duration);
  last.base_m = cur_m;
  phases.push_back(last);

  Eigen::Index total = 0;
  for (const auto& p : phases) total += p.n;

  SyntheticWalk walk;
  walk.imu.subject_id = subject_id;
  walk.gt.subject_id = subject_id;
  walk.imu.t.resize(total);
  walk.imu.accel.resize(3, total);
  walk.imu.gyro.resize(3, total);
  const Eigen::Index n_gt = total / kRateRatio;
  walk.gt.t.resize(n_gt);
  walk.gt.pos.resize(3, n_gt);

  const Eigen::Vector3d g = gravity_vector();
  Eigen::Index i = 0;
  for (const auto& p : phases) {
    if (!p.swing) {
      const Eigen::Index mid = i + p.n / 2;
      walk.true_boundaries.push_back(kRateRatio * (mid / kRateRatio));
    }
    for (Eigen::Index k = 0; k < p.n; ++k, ++i) {
      const double tl = static_cast<double>(k) / kImuRateHz;
      walk.imu.t(i) = static_cast<double>(i) / kImuRateHz;
      Eigen::Vector3d pos_m, accel, gyro;
      if (p.swing) {
        pos_m = p.base_m + p.path.pos(tl);
        const Eigen::Matrix3d r_wb = rot_y(p.path.pitch(tl));
        accel = r_wb.transpose() * (p.path.acc(tl) + g) + base.accel_bias;
        gyro = Eigen::Vector3d(0.0, p.path.pitch_rate(tl), 0.0) + base.gyro_bias;
      } else {
        pos_m = p.base_m;
        accel = g + base.accel_bias;
        gyro = base.gyro_bias;
      }
      for (int a = 0; a < 3; ++a) accel(a) += base.accel_noise_sigma * rng.normal();
      for (int a = 0; a < 3; ++a) gyro(a) += base.gyro_noise_sigma * rng.normal();
      if (accel.cwiseAbs().maxCoeff() > kAccelRange || gyro.cwiseAbs().maxCoeff() > kGyroRange)
        fail(ErrorCode::range_exceeded, "simulated walk leaves the sensor dynamic range");
      walk.imu.accel.col(i) = accel;
      walk.imu.gyro.col(i) = gyro;
      if (i % kRateRatio == 0) {
        const Eigen::Index j = i / kRateRatio;
        walk.gt.t(j) = walk.imu.t(i);
        walk.gt.pos.col(j) = 100.0 * pos_m;
      }
    }
  }
  return walk;
}

std::vector<SubjectWalk> simulate_corpus_walks(const CorpusConfig& cfg, double stance_duration) {
  require(cfg.n_subjects >= 1 && cfg.steps_per_subject >= 1, ErrorCode::invalid_params,
          "corpus needs at least one subject and one step");
  std::vector<SubjectWalk> out;
  out.reserve(static_cast<std::size_t>(cfg.n_subjects));
  Rng master(cfg.seed);
  for (int s = 0; s < cfg.n_subjects; ++s) {
    Rng srng = master.split(static_cast<std::uint64_t>(s));
    SubjectWalk sw;
    sw.base = draw_subject(cfg, srng);
    sw.subject_id = subject_name(s);
    sw.walk = simulate_walk(sw.base, cfg.steps_per_subject, srng.next_u64(), sw.subject_id,
                            stance_duration, cfg.step_jitter);
    out.push_back(std::move(sw));
  }
  return out;
}

}  // namespace gait::sim
