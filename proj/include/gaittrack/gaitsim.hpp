#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gaittrack/imu_data.hpp"
#include "gaittrack/rng.hpp"

namespace gait::sim {

// Kinematic knobs for one synthetic step. Speeds and durations follow the
// ranges the sensor protocol was exercised over; noise is white Gaussian with
// a constant per-run bias.
struct GaitParams {
  double speed = 1.1;          // m/s, in [0.45, 1.75]
  double step_duration = 1.0;  // s, in [0.6, 1.4]
  double clearance = 5.0;      // cm peak foot lift, in [2, 8]
  double sway = 1.5;           // cm lateral amplitude, in [0, 3]
  double pitch_amp = 0.3;      // rad, foot pitch swing amplitude
  double accel_noise_sigma = 0.0;  // m/s^2 per axis
  double gyro_noise_sigma = 0.0;   // rad/s per axis
  Eigen::Vector3d accel_bias = Eigen::Vector3d::Zero();  // m/s^2
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Zero();   // rad/s
  std::uint64_t seed = 0;
};

void validate_params(const GaitParams& params);

// Closed-form C2 swing path over t in [0, duration], local frame, meters.
// X advances as a cycloid (at rest at both ends), Z is a sin^2 lift that
// returns to zero, Y is a full sine sway cycle. Pitch follows the swing.
struct FootPath {
  double duration = 1.0;   // s
  double speed = 1.0;      // m/s
  double clearance_m = 0.05;
  double sway_m = 0.015;
  double pitch_amp = 0.3;  // rad

  Eigen::Vector3d pos(double t) const;
  Eigen::Vector3d vel(double t) const;
  Eigen::Vector3d acc(double t) const;
  double pitch(double t) const;
  double pitch_rate(double t) const;
};

FootPath synth_trajectory(const GaitParams& params);

// Gravity vector entering the accelerometer model: measured world-frame
// acceleration is path acceleration plus this, rotated into the body frame.
inline Eigen::Vector3d gravity_vector() { return {0.0, 0.0, -kGravity}; }

struct StepStreams {
  ImuStream imu;
  GroundTruthStream gt;
};

// Samples the path at 500 Hz / 100 Hz. Throws RangeExceeded if any sample
// leaves the sensor dynamic range (signals are never clipped).
StepStreams imu_from_trajectory(const FootPath& path, const GaitParams& params,
                                const Eigen::Vector3d& origin_cm = Eigen::Vector3d::Zero(),
                                double t0 = 0.0, const std::string& subject_id = {});

struct SyntheticStep {
  StepSegment segment;
  GaitParams params;            // true per-step parameters, bias included
  FootPath path;                // continuous truth, local frame
  Eigen::Vector3d origin_cm;    // lab-frame position of the step start
};

// Draw ranges for per-subject parameters; per-step values jitter around them.
struct CorpusConfig {
  int n_subjects = 10;
  int steps_per_subject = 50;
  double speed_min = 0.45, speed_max = 1.75;
  double duration_min = 0.6, duration_max = 1.4;
  double clearance_min = 2.0, clearance_max = 8.0;
  double sway_min = 0.0, sway_max = 3.0;
  double pitch_min = 0.2, pitch_max = 0.4;
  double accel_bias_mag = 0.2;   // m/s^2, per-subject constant, uniform per axis
  double gyro_bias_mag = 0.02;   // rad/s
  double accel_noise_sigma = 0.0;
  double gyro_noise_sigma = 0.0;
  double step_jitter = 0.05;     // relative per-step spread of the subject values
  std::uint64_t seed = 0;
};

std::vector<SyntheticStep> generate_corpus_detailed(const CorpusConfig& cfg);
std::vector<StepSegment> generate_corpus(const CorpusConfig& cfg);

// A continuous multi-step walk: stance, swing, stance, ... True step
// boundaries sit at stance midpoints, which is also what the gyro-energy
// detector reports; annotations pair consecutive boundaries.
struct SyntheticWalk {
  ImuStream imu;
  GroundTruthStream gt;
  std::vector<Eigen::Index> true_boundaries;  // IMU indices, multiples of 5
  std::vector<Annotation> annotations() const;
};

SyntheticWalk simulate_walk(const GaitParams& base, int n_steps, std::uint64_t seed,
                            const std::string& subject_id = {}, double stance_duration = 0.35,
                            double step_jitter = 0.05);

struct SubjectWalk {
  std::string subject_id;
  GaitParams base;  // subject-level parameters the walk jitters around
  SyntheticWalk walk;
};

// One continuous walk per subject, with subject parameters drawn the same way
// as in generate_corpus_detailed.
std::vector<SubjectWalk> simulate_corpus_walks(const CorpusConfig& cfg,
                                               double stance_duration = 0.35);

}  // namespace gait::sim
