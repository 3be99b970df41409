#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gaittrack/imu_data.hpp"
#include "gaittrack/rng.hpp"

namespace gait {

enum class AugTag { plain, sliding, random, test };

const char* to_string(AugTag tag);
AugTag aug_tag_from_string(const std::string& s);

// One training example: differential sensor window and differential position
// target, with enough provenance to trace it back to its step.
struct Window {
  Eigen::MatrixXd x;  // 6 x 149 (rows ax,ay,az,gx,gy,gz; consecutive-sample differences)
  Eigen::MatrixXd y;  // 3 x 29 (rows X,Y,Z position differences, cm)
  std::string subject_id;
  int step_index = 0;
  Eigen::Index imu_start = 0;  // multiple of 5
  AugTag tag = AugTag::plain;
};

struct AugmentSpec {
  Eigen::Index win_imu = 150;
  Eigen::Index win_gt = 30;
  Eigen::Index overlap_imu = 10;
  Eigen::Index overlap_gt = 2;
  int random_count = 5;
  enum class Mode { none, sliding, random, combined } mode = Mode::combined;
  bool differential = true;  // false feeds raw windows (ablation; shapes unchanged)
};

void validate_spec(const AugmentSpec& spec);
AugmentSpec::Mode aug_mode_from_string(const std::string& s);
const char* to_string(AugmentSpec::Mode mode);

struct SplitSpec {
  enum class Mode { by_step, by_subject_kfold } mode = Mode::by_step;
  int kfold = 6;
  std::uint64_t seed = 0;
};

SplitSpec::Mode split_mode_from_string(const std::string& s);
const char* to_string(SplitSpec::Mode mode);

enum class SplitKind { train, val, test };

struct Dataset {
  std::vector<Window> windows;
  SplitKind split = SplitKind::train;
  std::uint64_t seed = 0;
};

// Step indices (into the caller's step list) per split; disjoint and exhaustive.
struct StepPartition {
  std::vector<std::size_t> train, val, test;
};

struct SizeReport {
  long long steps = 0;
  long long train_steps = 0, val_steps = 0, test_steps = 0;
  long long train_windows = 0, val_windows = 0, test_windows = 0;
  long long sliding_count = 0, random_count = 0, plain_count = 0;
  long long original_train_points = 0;   // sum of train-step IMU lengths
  long long augmented_train_points = 0;  // train windows x window length
  double multiplier = 0.0;               // augmented / original
  double original_train_seconds = 0.0;
  double augmented_train_seconds = 0.0;
};

struct BuildResult {
  Dataset train, val, test;
  SizeReport report;
};

// out[c,k] = series[c,k+1] - series[c,k]; requires at least two columns.
Eigen::MatrixXd differentiate(const Eigen::MatrixXd& series);

// Overlapping tiling at stride win_imu - overlap_imu, plus a tail window
// anchored at the segment end when the strided grid falls short of it.
std::vector<Window> sliding_windows(const StepSegment& step, const AugmentSpec& spec);

// Exactly spec.random_count windows, starts uniform (with replacement) over
// the multiples of 5 in [0, L - win_imu].
std::vector<Window> random_windows(const StepSegment& step, const AugmentSpec& spec, Rng& rng);

// Non-overlapping tiling from 0; a trailing remainder shorter than one window
// is dropped.
std::vector<Window> test_windows(const StepSegment& step, const AugmentSpec& spec);

// Partitions step indices. by_step returns one 80/10/10 partition;
// by_subject_kfold returns spec.kfold subject-disjoint partitions.
std::vector<StepPartition> split_steps(const std::vector<StepSegment>& steps,
                                       const SplitSpec& split);

// Split first (at step level), then augment training steps per spec.mode;
// validation and test splits always use the non-overlapping tiling.
BuildResult build_dataset(const std::vector<StepSegment>& steps, const AugmentSpec& spec,
                          const SplitSpec& split);

// Same, with an externally chosen partition (used by cross-validation folds).
BuildResult build_dataset_from_partition(const std::vector<StepSegment>& steps,
                                         const AugmentSpec& spec, const StepPartition& partition,
                                         std::uint64_t seed);

// Directory of tensor blobs plus provenance manifests; see README for layout.
void save_dataset(const std::string& dir, const BuildResult& result);
BuildResult load_dataset(const std::string& dir);

// Segmented steps as a directory (steps.meta.csv + steps.bin); round-trips
// bit-exactly so downstream stages see identical numbers.
void save_steps(const std::string& dir, const std::vector<StepSegment>& steps);
std::vector<StepSegment> load_steps(const std::string& dir);

std::string size_report_csv(const SizeReport& report);
std::string size_report_text(const SizeReport& report);

}  // namespace gait
