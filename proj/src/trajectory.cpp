#include "gaittrack/trajectory.hpp"

#include <algorithm>
#include <sstream>

#include "gaittrack/csv.hpp"

namespace gait {

Trajectory reconstruct(const Eigen::Vector3d& origin_cm, const Eigen::MatrixXd& diffs) {
  require(diffs.rows() == 3, ErrorCode::shape_mismatch, "reconstruct: differences must have 3 rows");
  Trajectory t;
  t.pos.resize(3, diffs.cols() + 1);
  t.pos.col(0) = origin_cm;
  for (Eigen::Index k = 0; k < diffs.cols(); ++k) t.pos.col(k + 1) = t.pos.col(k) + diffs.col(k);
  return t;
}

Eigen::Vector3d per_axis_error(const Eigen::Matrix3Xd& pred, const Eigen::Matrix3Xd& gt) {
  require(pred.cols() > 0, ErrorCode::empty, "per_axis_error: empty trajectory");
  require(gt.cols() >= pred.cols(), ErrorCode::length_mismatch,
          "per_axis_error: capture has " + std::to_string(gt.cols()) +
              " points, reconstruction has " + std::to_string(pred.cols()));
  return (pred - gt.leftCols(pred.cols())).cwiseAbs().rowwise().mean();
}

ErrorReport aggregate_report(const std::vector<StepEval>& evals) {
  require(!evals.empty(), ErrorCode::empty, "aggregate_report: no step evaluations");
  ErrorReport r;
  r.steps = static_cast<long long>(evals.size());
  for (const StepEval& ev : evals) r.mean += ev.error;
  r.mean /= static_cast<double>(evals.size());
  for (const StepEval& ev : evals) r.stddev += (ev.error - r.mean).cwiseAbs2();
  r.stddev = (r.stddev / static_cast<double>(evals.size())).cwiseSqrt();
  return r;
}

std::string report_csv(const ErrorReport& r) {
  std::string s = "axis,mean_cm,std_cm\n";
  const char* names[3] = {"X", "Y", "Z"};
  for (int a = 0; a < 3; ++a)
    s += std::string(names[a]) + ',' + csv::format(r.mean(a)) + ',' + csv::format(r.stddev(a)) +
         '\n';
  return s;
}

std::string report_text(const ErrorReport& r) {
  std::ostringstream os;
  const char* names[3] = {"X", "Y", "Z"};
  os << "per-step trajectory error over " << r.steps << " steps (cm, mean +/- std)\n";
  for (int a = 0; a < 3; ++a)
    os << "  " << names[a] << ": " << csv::format(r.mean(a)) << " +/- " << csv::format(r.stddev(a))
       << "\n";
  return os.str();
}

std::string step_points_csv(const StepEval& ev, const StepSegment& step) {
  require(step.gt.size() >= ev.pred.cols(), ErrorCode::length_mismatch,
          "step_points_csv: reconstruction longer than capture");
  std::string s = "index,gt_x,gt_y,gt_z,pred_x,pred_y,pred_z\n";
  for (Eigen::Index k = 0; k < ev.pred.cols(); ++k) {
    s += csv::format(static_cast<long long>(k));
    for (int a = 0; a < 3; ++a) s += ',' + csv::format(step.gt.pos(a, k));
    for (int a = 0; a < 3; ++a) s += ',' + csv::format(ev.pred(a, k));
    s += '\n';
  }
  return s;
}

namespace {

struct Panel {
  const char* title;
  int ax, ay;       // axis drawn on the panel's x / y
  double ox, oy;    // panel origin in the page
};

void append_polyline(std::string& svg, const Eigen::Matrix3Xd& pts, int ax, int ay, double ox,
                     double oy, double sx, double sy, double min_x, double min_y,
                     const char* color) {
  svg += "<polyline fill=\"none\" stroke=\"";
  svg += color;
  svg += "\" stroke-width=\"1.5\" points=\"";
  for (Eigen::Index k = 0; k < pts.cols(); ++k) {
    const double px = ox + (pts(ax, k) - min_x) * sx;
    const double py = oy - (pts(ay, k) - min_y) * sy;
    svg += csv::format(std::round(px * 100.0) / 100.0) + ',' +
           csv::format(std::round(py * 100.0) / 100.0) + ' ';
  }
  svg += "\"/>\n";
}

}  // namespace

std::string step_plot_svg(const StepEval& ev, const StepSegment& step) {
  const Eigen::Matrix3Xd& gt = step.gt.pos;
  const Eigen::Matrix3Xd& pred = ev.pred;

  // Oblique projection for the third panel: u = x + 0.4 z-ish mix on y.
  const auto oblique = [](const Eigen::Matrix3Xd& p) {
    Eigen::Matrix3Xd q(3, p.cols());
    q.row(0) = p.row(0) + 0.35 * p.row(1);
    q.row(1) = p.row(2) + 0.35 * p.row(1);
    q.row(2).setZero();
    return q;
  };
  const Eigen::Matrix3Xd gt_ob = oblique(gt);
  const Eigen::Matrix3Xd pred_ob = oblique(pred);

  const double panel_w = 300.0, panel_h = 170.0, margin = 45.0;
  const double width = 3 * panel_w + 4 * margin, height = panel_h + 2 * margin + 30.0;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    csv::format(width) + "\" height=\"" + csv::format(height) +
                    "\" viewBox=\"0 0 " + csv::format(width) + " " + csv::format(height) +
                    "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + csv::format(margin) + "\" y=\"20\" font-family=\"sans-serif\" "
         "font-size=\"13\">step " + ev.subject_id + "/" + std::to_string(ev.step_index) +
         " - capture (gray) vs reconstruction (red), cm</text>\n";

  const Panel panels[3] = {{"side (X-Z)", 0, 2, margin, 0},
                           {"top (X-Y)", 0, 1, 2 * margin + panel_w, 0},
                           {"oblique", 0, 1, 3 * margin + 2 * panel_w, 0}};
  for (int i = 0; i < 3; ++i) {
    const Panel& p = panels[i];
    const Eigen::Matrix3Xd& g = i == 2 ? gt_ob : gt;
    const Eigen::Matrix3Xd& q = i == 2 ? pred_ob : pred;
    double min_x = std::min(g.row(p.ax).minCoeff(), q.row(p.ax).minCoeff());
    double max_x = std::max(g.row(p.ax).maxCoeff(), q.row(p.ax).maxCoeff());
    double min_y = std::min(g.row(p.ay).minCoeff(), q.row(p.ay).minCoeff());
    double max_y = std::max(g.row(p.ay).maxCoeff(), q.row(p.ay).maxCoeff());
    if (max_x - min_x < 1e-9) max_x = min_x + 1.0;
    if (max_y - min_y < 1e-9) max_y = min_y + 1.0;
    const double sx = panel_w / (max_x - min_x);
    const double sy = panel_h / (max_y - min_y);
    const double oy = margin + 30.0 + panel_h;
    svg += "<rect x=\"" + csv::format(p.ox) + "\" y=\"" + csv::format(margin + 30.0) +
           "\" width=\"" + csv::format(panel_w) + "\" height=\"" + csv::format(panel_h) +
           "\" fill=\"none\" stroke=\"#ccc\"/>\n";
    svg += "<text x=\"" + csv::format(p.ox) + "\" y=\"" + csv::format(margin + 22.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + p.title + "</text>\n";
    append_polyline(svg, g, p.ax, p.ay, p.ox, oy, sx, sy, min_x, min_y, "#888888");
    append_polyline(svg, q, p.ax, p.ay, p.ox, oy, sx, sy, min_x, min_y, "#cc2222");
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace gait
