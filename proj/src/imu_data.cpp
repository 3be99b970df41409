#include "gaittrack/imu_data.hpp"

#include <algorithm>
#include <cmath>

#include "gaittrack/csv.hpp"

namespace gait {

namespace {

constexpr double kRangeSlack = 1.0 + 1e-9;

std::optional<UnitSpec> units_from_comments(const std::vector<std::string>& comments,
                                            const std::string& path) {
  for (const auto& c : comments) {
    auto pos = c.find("units=");
    if (pos == std::string::npos) continue;
    std::string value = c.substr(pos + 6);
    while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) value.pop_back();
    if (value == "g_dps") return UnitSpec::g_dps;
    if (value == "si") return UnitSpec::si;
    fail(ErrorCode::invalid_config, path + ": unknown units '" + value + "'");
  }
  return {};
}

void check_imu_spacing(const Eigen::VectorXd& t, double rate_hz, const std::string& context) {
  const double period = 1.0 / rate_hz;
  for (Eigen::Index i = 1; i < t.size(); ++i) {
    const double dt = t(i) - t(i - 1);
    if (dt <= 0.0)
      fail(ErrorCode::non_monotone_time,
           context + ": non-monotone timestamp at sample " + std::to_string(i));
    const double ratio = dt / period;
    const bool nominal = ratio >= 0.99 && ratio <= 1.01;
    const bool dropped_one = ratio >= 1.98 && ratio <= 2.02;  // single missing sample
    if (!nominal && !dropped_one)
      fail(ErrorCode::rate_gap, context + ": spacing " + csv::format(dt) + " s at sample " +
                                    std::to_string(i) + " violates 1/" + csv::format(rate_hz) +
                                    " s (max gap: 2 periods)");
  }
}

}  // namespace

void validate_imu_stream(const ImuStream& stream, const std::string& context) {
  require(stream.size() > 0, ErrorCode::empty_stream, context + ": empty IMU stream");
  check_imu_spacing(stream.t, stream.rate_hz, context);
  for (Eigen::Index i = 0; i < stream.size(); ++i) {
    if (!stream.accel.col(i).allFinite() || !stream.gyro.col(i).allFinite())
      fail(ErrorCode::malformed_row, context + ": non-finite sample " + std::to_string(i));
    if (stream.accel.col(i).cwiseAbs().maxCoeff() > kAccelRange * kRangeSlack)
      fail(ErrorCode::range_violation,
           context + ": accel sample " + std::to_string(i) + " exceeds +/-16 g");
    if (stream.gyro.col(i).cwiseAbs().maxCoeff() > kGyroRange * kRangeSlack)
      fail(ErrorCode::range_violation,
           context + ": gyro sample " + std::to_string(i) + " exceeds +/-2000 deg/s");
  }
}

void validate_gt_stream(const GroundTruthStream& stream, const std::string& context) {
  require(stream.size() > 0, ErrorCode::empty_stream, context + ": empty ground-truth stream");
  for (Eigen::Index i = 1; i < stream.size(); ++i) {
    if (stream.t(i) <= stream.t(i - 1))
      fail(ErrorCode::non_monotone_time,
           context + ": non-monotone timestamp at sample " + std::to_string(i));
  }
  if (!stream.pos.allFinite()) fail(ErrorCode::malformed_row, context + ": non-finite position");
}

ImuStream parse_imu_log(const std::string& path, std::optional<UnitSpec> units,
                        std::string subject_id) {
  const csv::File file = csv::load(path);
  const auto file_units = units_from_comments(file.comments, path);
  if (file_units && units && *file_units != *units)
    fail(ErrorCode::invalid_config, path + ": units comment conflicts with requested units");
  const UnitSpec spec = file_units ? *file_units : (units ? *units : UnitSpec::si);

  const auto header = csv::split_fields(file.header);
  if (header.size() != 7 && header.size() != 10)
    fail(ErrorCode::malformed_row, path + ": expected header t,ax,ay,az,gx,gy,gz[,mx,my,mz]");
  if (file.rows.empty()) fail(ErrorCode::empty_stream, path + ": no samples");

  ImuStream stream;
  stream.subject_id = std::move(subject_id);
  const Eigen::Index n = static_cast<Eigen::Index>(file.rows.size());
  stream.t.resize(n);
  stream.accel.resize(3, n);
  stream.gyro.resize(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = file.rows[static_cast<std::size_t>(i)];
    const auto fields = csv::split_fields(row.text);
    if (fields.size() != header.size())
      fail(ErrorCode::malformed_row, path + ":" + std::to_string(row.line_no) + ": expected " +
                                         std::to_string(header.size()) + " fields, got " +
                                         std::to_string(fields.size()));
    stream.t(i) = csv::parse_double(fields[0], row.line_no, path);
    for (int a = 0; a < 3; ++a) {
      double acc = csv::parse_double(fields[1 + a], row.line_no, path);
      double gyr = csv::parse_double(fields[4 + a], row.line_no, path);
      if (spec == UnitSpec::g_dps) {
        acc = accel_g_to_si(acc);
        gyr = gyro_dps_to_si(gyr);
      }
      stream.accel(a, i) = acc;
      stream.gyro(a, i) = gyr;
    }
  }
  validate_imu_stream(stream, path);
  return stream;
}

GroundTruthStream parse_gt_log(const std::string& path, std::string subject_id) {
  const csv::File file = csv::load(path);
  const auto header = csv::split_fields(file.header);
  if (header.size() != 4)
    fail(ErrorCode::malformed_row, path + ": expected header t,x,y,z");
  if (file.rows.empty()) fail(ErrorCode::empty_stream, path + ": no samples");

  GroundTruthStream stream;
  stream.subject_id = std::move(subject_id);
  const Eigen::Index n = static_cast<Eigen::Index>(file.rows.size());
  stream.t.resize(n);
  stream.pos.resize(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = file.rows[static_cast<std::size_t>(i)];
    const auto fields = csv::split_fields(row.text);
    if (fields.size() != 4)
      fail(ErrorCode::malformed_row,
           path + ":" + std::to_string(row.line_no) + ": expected 4 fields");
    stream.t(i) = csv::parse_double(fields[0], row.line_no, path);
    for (int a = 0; a < 3; ++a)  // file is in millimeters
      stream.pos(a, i) = 0.1 * csv::parse_double(fields[1 + a], row.line_no, path);
  }
  validate_gt_stream(stream, path);
  return stream;
}

std::vector<Annotation> parse_annotations(const std::string& path) {
  const csv::File file = csv::load(path);
  const auto header = csv::split_fields(file.header);
  if (header.size() != 2)
    fail(ErrorCode::malformed_row, path + ": expected header start,end");
  std::vector<Annotation> out;
  out.reserve(file.rows.size());
  for (const auto& row : file.rows) {
    const auto fields = csv::split_fields(row.text);
    if (fields.size() != 2)
      fail(ErrorCode::malformed_row,
           path + ":" + std::to_string(row.line_no) + ": expected 2 fields");
    Annotation a;
    a.start = csv::parse_int(fields[0], row.line_no, path);
    a.end = csv::parse_int(fields[1], row.line_no, path);
    out.push_back(a);
  }
  return out;
}

std::string serialize_imu_csv(const ImuStream& stream, UnitSpec units) {
  std::string out = units == UnitSpec::si ? "# units=si\n" : "# units=g_dps\n";
  out += "t,ax,ay,az,gx,gy,gz\n";
  for (Eigen::Index i = 0; i < stream.size(); ++i) {
    out += csv::format(stream.t(i));
    for (int a = 0; a < 3; ++a) {
      const double v = units == UnitSpec::si ? stream.accel(a, i) : accel_si_to_g(stream.accel(a, i));
      out += ',';
      out += csv::format(v);
    }
    for (int a = 0; a < 3; ++a) {
      const double v = units == UnitSpec::si ? stream.gyro(a, i) : gyro_si_to_dps(stream.gyro(a, i));
      out += ',';
      out += csv::format(v);
    }
    out += '\n';
  }
  return out;
}

std::string serialize_gt_csv(const GroundTruthStream& stream) {
  std::string out = "t,x,y,z\n";
  for (Eigen::Index i = 0; i < stream.size(); ++i) {
    out += csv::format(stream.t(i));
    for (int a = 0; a < 3; ++a) {
      out += ',';
      out += csv::format(stream.pos(a, i) * 10.0);  // back to millimeters
    }
    out += '\n';
  }
  return out;
}

std::string serialize_annotations_csv(const std::vector<Annotation>& annotations) {
  std::string out = "start,end\n";
  for (const auto& a : annotations) {
    out += std::to_string(a.start);
    out += ',';
    out += std::to_string(a.end);
    out += '\n';
  }
  return out;
}

AlignedPair align_streams(const ImuStream& imu, const GroundTruthStream& gt) {
  require(imu.size() > 0 && gt.size() > 0, ErrorCode::empty_stream, "align: empty stream");
  if (!imu.subject_id.empty() && !gt.subject_id.empty() && imu.subject_id != gt.subject_id)
    fail(ErrorCode::invalid_config, "align: subject mismatch " + imu.subject_id + " vs " +
                                        gt.subject_id);

  const double t0 = std::max(imu.t(0), gt.t(0));
  const double t1 = std::min(imu.t(imu.size() - 1), gt.t(gt.size() - 1));
  if (t1 - t0 < 1.0)
    fail(ErrorCode::no_overlap, "align: common interval is " + csv::format(t1 - t0) +
                                    " s, need at least 1 s");

  // Effective rate ratio from median spacings.
  const double imu_dt = imu.duration() / static_cast<double>(imu.size() - 1);
  const double gt_dt = gt.duration() / static_cast<double>(gt.size() - 1);
  const double ratio = gt_dt / imu_dt;
  if (std::abs(ratio / kRateRatio - 1.0) > 0.01)
    fail(ErrorCode::rate_mismatch,
         "align: IMU/ground-truth rate ratio " + csv::format(ratio) + " deviates from 5 by >1%");

  const double eps = 0.5 / imu.rate_hz;
  Eigen::Index g0 = 0;
  while (g0 < gt.size() && gt.t(g0) < t0 - eps) ++g0;
  require(g0 < gt.size(), ErrorCode::no_overlap, "align: no ground-truth sample in overlap");

  // IMU sample nearest in time to the first kept ground-truth sample.
  Eigen::Index i0 = 0;
  double best = std::abs(imu.t(0) - gt.t(g0));
  for (Eigen::Index i = 1; i < imu.size(); ++i) {
    const double d = std::abs(imu.t(i) - gt.t(g0));
    if (d < best) {
      best = d;
      i0 = i;
    }
  }
  if (best > 0.5 / gt.rate_hz)
    fail(ErrorCode::rate_mismatch, "align: streams cannot phase-align (offset " +
                                       csv::format(best) + " s)");

  Eigen::Index n_gt = 0;
  while (g0 + n_gt < gt.size() && gt.t(g0 + n_gt) <= t1 + eps) ++n_gt;
  n_gt = std::min(n_gt, (imu.size() - i0) / kRateRatio);
  require(n_gt > 0, ErrorCode::no_overlap, "align: empty trimmed range");

  const Eigen::Index last_imu = i0 + kRateRatio * (n_gt - 1);
  if (std::abs(imu.t(last_imu) - gt.t(g0 + n_gt - 1)) > 0.5 / gt.rate_hz)
    fail(ErrorCode::rate_mismatch, "align: index correspondence drifts beyond half a period");

  AlignedPair out;
  const Eigen::Index n_imu = kRateRatio * n_gt;
  out.imu.rate_hz = imu.rate_hz;
  out.imu.subject_id = imu.subject_id;
  out.imu.t = imu.t.segment(i0, n_imu);
  out.imu.accel = imu.accel.middleCols(i0, n_imu);
  out.imu.gyro = imu.gyro.middleCols(i0, n_imu);
  out.gt.rate_hz = gt.rate_hz;
  out.gt.subject_id = gt.subject_id.empty() ? imu.subject_id : gt.subject_id;
  out.gt.t = gt.t.segment(g0, n_gt);
  out.gt.pos = gt.pos.middleCols(g0, n_gt);
  return out;
}

StepSegment slice_step(const AlignedPair& pair, Eigen::Index start, Eigen::Index len,
                       int step_index) {
  require(start % kRateRatio == 0, ErrorCode::unaligned_start,
          "slice: start " + std::to_string(start) + " not divisible by 5");
  require(len % kRateRatio == 0 && len > 0, ErrorCode::shape_mismatch, "slice: bad length");
  require(start >= 0 && start + len <= pair.imu.size(), ErrorCode::shape_mismatch,
          "slice: out of bounds");
  StepSegment seg;
  seg.subject_id = pair.imu.subject_id;
  seg.step_index = step_index;
  seg.imu.rate_hz = pair.imu.rate_hz;
  seg.imu.subject_id = pair.imu.subject_id;
  seg.imu.t = pair.imu.t.segment(start, len);
  seg.imu.accel = pair.imu.accel.middleCols(start, len);
  seg.imu.gyro = pair.imu.gyro.middleCols(start, len);
  const Eigen::Index g0 = start / kRateRatio;
  const Eigen::Index gl = len / kRateRatio;
  seg.gt.rate_hz = pair.gt.rate_hz;
  seg.gt.subject_id = pair.gt.subject_id;
  seg.gt.t = pair.gt.t.segment(g0, gl);
  seg.gt.pos = pair.gt.pos.middleCols(g0, gl);
  return seg;
}

std::vector<StepSegment> segment_steps_annotated(const AlignedPair& pair,
                                                 const std::vector<Annotation>& annotations) {
  std::vector<StepSegment> steps;
  Eigen::Index prev_end = 0;
  int index = 0;
  for (std::size_t k = 0; k < annotations.size(); ++k) {
    const Annotation& a = annotations[k];
    require(a.end > a.start && a.start >= 0, ErrorCode::malformed_row,
            "annotation " + std::to_string(k) + ": empty or negative range");
    if (k > 0 && a.start < prev_end)
      fail(ErrorCode::overlapping_annotations,
           "annotation " + std::to_string(k) + " overlaps previous (start " +
               std::to_string(a.start) + " < end " + std::to_string(prev_end) + ")");
    require(a.start % kRateRatio == 0, ErrorCode::unaligned_start,
            "annotation " + std::to_string(k) + ": start " + std::to_string(a.start) +
                " not divisible by 5");
    require(a.end <= pair.imu.size(), ErrorCode::shape_mismatch,
            "annotation " + std::to_string(k) + ": end beyond stream");
    prev_end = a.end;

    const Eigen::Index len = kRateRatio * ((a.end - a.start) / kRateRatio);
    if (len < kMinStepImuSamples || len > kMaxStepImuSamples) continue;
    steps.push_back(slice_step(pair, a.start, len, index++));
  }
  return steps;
}

std::vector<StepSegment> segment_steps_auto(const AlignedPair& pair, const DetectorConfig& cfg) {
  const Eigen::Index n = pair.imu.size();
  require(cfg.rms_window > 0 && cfg.low <= cfg.high, ErrorCode::invalid_config,
          "detector: bad config");

  // Centered moving RMS of the gyro magnitude.
  Eigen::VectorXd energy(n);
  for (Eigen::Index i = 0; i < n; ++i) energy(i) = pair.imu.gyro.col(i).squaredNorm();
  Eigen::VectorXd rms(n);
  const Eigen::Index half = cfg.rms_window / 2;
  double acc = 0.0;
  Eigen::Index lo = 0, hi = -1;  // current inclusive window [lo, hi]
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index want_lo = std::max<Eigen::Index>(0, i - half);
    const Eigen::Index want_hi = std::min<Eigen::Index>(n - 1, i + half);
    while (hi < want_hi) acc += energy(++hi);
    while (lo < want_lo) acc -= energy(lo++);
    rms(i) = std::sqrt(std::max(0.0, acc) / static_cast<double>(want_hi - want_lo + 1));
  }

  // Hysteresis: stance below low, motion above high.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> stances;  // inclusive runs
  bool in_stance = rms(0) < cfg.high;
  Eigen::Index run_start = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    if (in_stance && rms(i) > cfg.high) {
      stances.emplace_back(run_start, i - 1);
      in_stance = false;
    } else if (!in_stance && rms(i) < cfg.low) {
      in_stance = true;
      run_start = i;
    }
  }
  if (in_stance) stances.emplace_back(run_start, n - 1);

  std::vector<StepSegment> steps;
  if (stances.size() < 2) return steps;

  int index = 0;
  for (std::size_t k = 0; k + 1 < stances.size(); ++k) {
    const Eigen::Index b0 = (stances[k].first + stances[k].second) / 2;
    const Eigen::Index b1 = (stances[k + 1].first + stances[k + 1].second) / 2;
    const Eigen::Index s = kRateRatio * (b0 / kRateRatio);
    const Eigen::Index e = kRateRatio * (b1 / kRateRatio);
    const Eigen::Index len = e - s;
    if (len < kMinStepImuSamples || len > kMaxStepImuSamples) continue;
    steps.push_back(slice_step(pair, s, len, index++));
  }
  return steps;
}

}  // namespace gait
