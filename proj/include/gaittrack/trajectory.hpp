#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gaittrack/model.hpp"
#include "gaittrack/pipeline.hpp"
#include "gaittrack/training.hpp"

namespace gait {

// Foot path in lab coordinates, centimeters, at the capture rate.
struct Trajectory {
  Eigen::Matrix3Xd pos;
};

// Running sum of predicted differences from a known start: point 0 is the
// origin, point k+1 adds column k of diffs.
Trajectory reconstruct(const Eigen::Vector3d& origin_cm, const Eigen::MatrixXd& diffs);

// Mean absolute deviation per axis over pred's columns; gt must be at least
// as long and is compared prefix-to-prefix.
Eigen::Vector3d per_axis_error(const Eigen::Matrix3Xd& pred, const Eigen::Matrix3Xd& gt);

struct StepEval {
  std::string subject_id;
  int step_index = 0;
  Eigen::Vector3d error = Eigen::Vector3d::Zero();  // cm, per axis
  Eigen::Matrix3Xd pred;                            // reconstructed points, cm
};

// Mean and population standard deviation of the per-step axis errors.
struct ErrorReport {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d stddev = Eigen::Vector3d::Zero();
  long long steps = 0;
};

ErrorReport aggregate_report(const std::vector<StepEval>& evals);
std::string report_csv(const ErrorReport& report);
std::string report_text(const ErrorReport& report);

// Runs the network over each step's non-overlapping test windows, rebuilds the
// trajectory (cumulative from the step's true start when the windows hold
// differences, direct positions otherwise), and scores it against the capture.
template <class S>
std::vector<StepEval> evaluate_steps(nn::Network<S>& net, const std::vector<StepSegment>& steps,
                                     const std::vector<std::size_t>& idx,
                                     const AugmentSpec& spec) {
  std::vector<StepEval> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    const StepSegment& step = steps.at(i);
    const std::vector<Window> windows = test_windows(step, spec);
    std::vector<std::size_t> all(windows.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const nn::FeatureMap<S> x = nn::batch_input<S>(windows, all);
    const std::array<nn::Mat<S>, 3> preds = net.forward(x, false);
    const Eigen::Index per_win = preds[0].rows();
    const Eigen::Index n_win = preds[0].cols();
    Eigen::MatrixXd concat(3, per_win * n_win);
    for (Eigen::Index w = 0; w < n_win; ++w)
      for (int a = 0; a < 3; ++a)
        concat.row(a).segment(w * per_win, per_win) =
            preds[static_cast<std::size_t>(a)].col(w).transpose().template cast<double>();

    StepEval ev;
    ev.subject_id = step.subject_id;
    ev.step_index = step.step_index;
    if (spec.differential) {
      ev.pred = reconstruct(step.gt.pos.col(0), concat).pos;
    } else {
      ev.pred = concat;
    }
    ev.error = per_axis_error(ev.pred, step.gt.pos);
    out.push_back(std::move(ev));
  }
  return out;
}

// Per-step audit trail: reconstructed vs captured points.
std::string step_points_csv(const StepEval& ev, const StepSegment& step);

// Three-panel SVG (side, top, oblique) comparing the reconstruction with the
// capture; byte-stable for identical inputs.
std::string step_plot_svg(const StepEval& ev, const StepSegment& step);

}  // namespace gait
