#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "gaittrack/errors.hpp"

namespace gait {

inline constexpr double kGravity = 9.80665;            // m/s^2 per g
inline constexpr double kDegToRad = 0.017453292519943295;
inline constexpr double kImuRateHz = 500.0;
inline constexpr double kGtRateHz = 100.0;
inline constexpr double kAccelRange = 16.0 * kGravity; // m/s^2, per axis
inline constexpr double kGyroRange = 2000.0 * kDegToRad;  // rad/s, per axis
inline constexpr int kRateRatio = 5;                   // IMU samples per ground-truth sample
inline constexpr Eigen::Index kMinStepImuSamples = 150;
inline constexpr Eigen::Index kMaxStepImuSamples = 2000;

enum class UnitSpec { g_dps, si };

// 6-axis inertial series in SI units (accel m/s^2, gyro rad/s), 500 Hz.
struct ImuStream {
  double rate_hz = kImuRateHz;
  Eigen::VectorXd t;       // seconds, strictly increasing
  Eigen::Matrix3Xd accel;  // columns are samples
  Eigen::Matrix3Xd gyro;
  std::string subject_id;

  Eigen::Index size() const { return t.size(); }
  double duration() const { return size() > 0 ? t(size() - 1) - t(0) : 0.0; }
};

// Capture-system positions in centimeters, lab frame
// (X = walking direction, Y = lateral, Z = vertical), 100 Hz.
struct GroundTruthStream {
  double rate_hz = kGtRateHz;
  Eigen::VectorXd t;
  Eigen::Matrix3Xd pos;  // cm
  std::string subject_id;

  Eigen::Index size() const { return t.size(); }
  double duration() const { return size() > 0 ? t(size() - 1) - t(0) : 0.0; }
};

// One walking step: an aligned IMU/ground-truth slice pair.
// imu.size() is a multiple of 5 and gt[k] corresponds to imu[5k].
struct StepSegment {
  ImuStream imu;
  GroundTruthStream gt;
  std::string subject_id;
  int step_index = 0;

  Eigen::Index imu_len() const { return imu.size(); }
  Eigen::Index gt_len() const { return gt.size(); }
};

struct AlignedPair {
  ImuStream imu;
  GroundTruthStream gt;
};

struct Annotation {
  Eigen::Index start = 0;  // IMU sample index, inclusive
  Eigen::Index end = 0;    // exclusive
};

struct DetectorConfig {
  int rms_window = 50;  // moving-RMS span, IMU samples
  double low = 0.3;     // rad/s, enter stance below this
  double high = 0.6;    // rad/s, leave stance above this
};

inline double accel_g_to_si(double g) { return g * kGravity; }
inline double accel_si_to_g(double si) { return si / kGravity; }
inline double gyro_dps_to_si(double dps) { return dps * kDegToRad; }
inline double gyro_si_to_dps(double si) { return si / kDegToRad; }

// CSV schema: optional "# units=g_dps|si" comment, header t,ax,ay,az,gx,gy,gz[,mx,my,mz].
// Magnetometer columns are discarded. A units comment in the file is authoritative;
// the argument applies when the file has none, and a conflict is an error.
ImuStream parse_imu_log(const std::string& path, std::optional<UnitSpec> units = {},
                        std::string subject_id = {});

// CSV schema: header t,x,y,z with positions in millimeters; stored in centimeters.
GroundTruthStream parse_gt_log(const std::string& path, std::string subject_id = {});

// Annotation CSV: header start,end with IMU sample indices (end exclusive).
std::vector<Annotation> parse_annotations(const std::string& path);

std::string serialize_imu_csv(const ImuStream& stream, UnitSpec units = UnitSpec::si);
std::string serialize_gt_csv(const GroundTruthStream& stream);
std::string serialize_annotations_csv(const std::vector<Annotation>& annotations);

// Trims both streams to their common time interval and enforces the exact 5:1
// index correspondence; the trimmed IMU length is a multiple of 5.
AlignedPair align_streams(const ImuStream& imu, const GroundTruthStream& gt);

// One segment per annotation. Starts must be multiples of 5, sorted, and
// non-overlapping. Segments shorter than one window (150 IMU samples) or longer
// than the sanity bound (2000) are dropped; tails are truncated to multiples of 5.
std::vector<StepSegment> segment_steps_annotated(const AlignedPair& pair,
                                                 const std::vector<Annotation>& annotations);

// Gyro-energy detector: moving RMS of |gyro| with hysteresis marks stance
// intervals; a step spans consecutive stance midpoints. May return an empty list.
std::vector<StepSegment> segment_steps_auto(const AlignedPair& pair,
                                            const DetectorConfig& cfg = {});

// Slices [start, start+len) out of aligned streams. start and len must be multiples of 5.
StepSegment slice_step(const AlignedPair& pair, Eigen::Index start, Eigen::Index len,
                       int step_index);

// Stream invariant checks used by parsers and tests.
void validate_imu_stream(const ImuStream& stream, const std::string& context);
void validate_gt_stream(const GroundTruthStream& stream, const std::string& context);

}  // namespace gait
