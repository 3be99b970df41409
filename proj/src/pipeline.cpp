#include "gaittrack/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "gaittrack/blob.hpp"
#include "gaittrack/csv.hpp"

namespace gait {

namespace {

constexpr std::uint64_t kWindowStreamBase = 1'000'000;  // keeps step streams clear of split streams

std::string step_label(const StepSegment& step) {
  return step.subject_id + "/step" + std::to_string(step.step_index);
}

void check_step(const StepSegment& step) {
  require(step.imu_len() == kRateRatio * step.gt_len(), ErrorCode::shape_mismatch,
          step_label(step) + ": IMU length is not 5x the ground-truth length");
}

// Stacks the six sensor rows for [start, start+len) and the matching
// ground-truth slice; start and len are IMU sample counts (multiples of 5).
Window make_window(const StepSegment& step, const AugmentSpec& spec, Eigen::Index start,
                   AugTag tag) {
  Window w;
  w.subject_id = step.subject_id;
  w.step_index = step.step_index;
  w.imu_start = start;
  w.tag = tag;
  Eigen::MatrixXd x(6, spec.win_imu);
  x.topRows(3) = step.imu.accel.middleCols(start, spec.win_imu);
  x.bottomRows(3) = step.imu.gyro.middleCols(start, spec.win_imu);
  Eigen::MatrixXd y = step.gt.pos.middleCols(start / kRateRatio, spec.win_gt);
  if (spec.differential) {
    w.x = differentiate(x);
    w.y = differentiate(y);
  } else {
    w.x = x.leftCols(spec.win_imu - 1);
    w.y = y.leftCols(spec.win_gt - 1);
  }
  return w;
}

std::vector<Window> tiled_windows(const StepSegment& step, const AugmentSpec& spec, AugTag tag) {
  check_step(step);
  const Eigen::Index len = step.imu_len();
  require(len >= spec.win_imu, ErrorCode::too_short,
          step_label(step) + ": " + std::to_string(len) + " samples, window needs " +
              std::to_string(spec.win_imu));
  std::vector<Window> out;
  for (Eigen::Index start = 0; start + spec.win_imu <= len; start += spec.win_imu)
    out.push_back(make_window(step, spec, start, tag));
  return out;
}

std::vector<Window> augment_step(const StepSegment& step, const AugmentSpec& spec, Rng& rng) {
  switch (spec.mode) {
    case AugmentSpec::Mode::none:
      return tiled_windows(step, spec, AugTag::plain);
    case AugmentSpec::Mode::sliding:
      return sliding_windows(step, spec);
    case AugmentSpec::Mode::random:
      return random_windows(step, spec, rng);
    case AugmentSpec::Mode::combined: {
      std::vector<Window> out = sliding_windows(step, spec);
      std::vector<Window> extra = random_windows(step, spec, rng);
      out.insert(out.end(), extra.begin(), extra.end());
      return out;
    }
  }
  fail(ErrorCode::invalid_params, "unknown augmentation mode");
}

}  // namespace

const char* to_string(AugTag tag) {
  switch (tag) {
    case AugTag::plain: return "plain";
    case AugTag::sliding: return "sliding";
    case AugTag::random: return "random";
    case AugTag::test: return "test";
  }
  return "?";
}

AugTag aug_tag_from_string(const std::string& s) {
  if (s == "plain") return AugTag::plain;
  if (s == "sliding") return AugTag::sliding;
  if (s == "random") return AugTag::random;
  if (s == "test") return AugTag::test;
  fail(ErrorCode::invalid_params, "unknown window tag '" + s + "'");
}

const char* to_string(AugmentSpec::Mode mode) {
  switch (mode) {
    case AugmentSpec::Mode::none: return "none";
    case AugmentSpec::Mode::sliding: return "sliding";
    case AugmentSpec::Mode::random: return "random";
    case AugmentSpec::Mode::combined: return "combined";
  }
  return "?";
}

AugmentSpec::Mode aug_mode_from_string(const std::string& s) {
  if (s == "none") return AugmentSpec::Mode::none;
  if (s == "sliding") return AugmentSpec::Mode::sliding;
  if (s == "random") return AugmentSpec::Mode::random;
  if (s == "combined") return AugmentSpec::Mode::combined;
  fail(ErrorCode::invalid_params, "unknown augmentation mode '" + s + "'");
}

const char* to_string(SplitSpec::Mode mode) {
  return mode == SplitSpec::Mode::by_step ? "by_step" : "by_subject_kfold";
}

SplitSpec::Mode split_mode_from_string(const std::string& s) {
  if (s == "by_step") return SplitSpec::Mode::by_step;
  if (s == "by_subject_kfold") return SplitSpec::Mode::by_subject_kfold;
  fail(ErrorCode::invalid_params, "unknown split mode '" + s + "'");
}

void validate_spec(const AugmentSpec& spec) {
  require(spec.win_imu > 1 && spec.win_gt > 1, ErrorCode::invalid_params,
          "window lengths must exceed one sample");
  require(spec.win_imu == kRateRatio * spec.win_gt, ErrorCode::invalid_params,
          "IMU window must be 5x the ground-truth window");
  require(spec.overlap_imu >= 0 && spec.overlap_imu < spec.win_imu, ErrorCode::invalid_params,
          "overlap must be in [0, window)");
  require(spec.overlap_imu == kRateRatio * spec.overlap_gt, ErrorCode::invalid_params,
          "IMU overlap must be 5x the ground-truth overlap");
  require(spec.random_count >= 0, ErrorCode::invalid_params, "random window count must be >= 0");
}

Eigen::MatrixXd differentiate(const Eigen::MatrixXd& series) {
  const Eigen::Index n = series.cols();
  require(n >= 2, ErrorCode::too_short, "need at least two samples to difference");
  return series.rightCols(n - 1) - series.leftCols(n - 1);
}

std::vector<Window> sliding_windows(const StepSegment& step, const AugmentSpec& spec) {
  check_step(step);
  const Eigen::Index len = step.imu_len();
  require(len >= spec.win_imu, ErrorCode::too_short,
          step_label(step) + ": " + std::to_string(len) + " samples, window needs " +
              std::to_string(spec.win_imu));
  const Eigen::Index stride = spec.win_imu - spec.overlap_imu;
  std::vector<Window> out;
  Eigen::Index start = 0;
  for (; start + spec.win_imu <= len; start += stride)
    out.push_back(make_window(step, spec, start, AugTag::sliding));
  // Anchor a final window at the last aligned start so the tail is covered.
  const Eigen::Index tail = kRateRatio * ((len - spec.win_imu) / kRateRatio);
  if (tail > start - stride) out.push_back(make_window(step, spec, tail, AugTag::sliding));
  return out;
}

std::vector<Window> random_windows(const StepSegment& step, const AugmentSpec& spec, Rng& rng) {
  check_step(step);
  const Eigen::Index len = step.imu_len();
  require(len >= spec.win_imu, ErrorCode::too_short,
          step_label(step) + ": " + std::to_string(len) + " samples, window needs " +
              std::to_string(spec.win_imu));
  const std::uint64_t n_starts =
      static_cast<std::uint64_t>((len - spec.win_imu) / kRateRatio) + 1;
  std::vector<Window> out;
  out.reserve(static_cast<std::size_t>(spec.random_count));
  for (int k = 0; k < spec.random_count; ++k) {
    const Eigen::Index start =
        kRateRatio * static_cast<Eigen::Index>(rng.uniform_index(n_starts));
    out.push_back(make_window(step, spec, start, AugTag::random));
  }
  return out;
}

std::vector<Window> test_windows(const StepSegment& step, const AugmentSpec& spec) {
  return tiled_windows(step, spec, AugTag::test);
}

std::vector<StepPartition> split_steps(const std::vector<StepSegment>& steps,
                                       const SplitSpec& split) {
  const std::size_t n = steps.size();
  Rng master(split.seed);
  if (split.mode == SplitSpec::Mode::by_step) {
    require(n >= 10, ErrorCode::too_few_steps,
            "by-step split needs at least 10 steps, got " + std::to_string(n));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    master.shuffle(idx);
    const std::size_t n_val = n / 10, n_test = n / 10;
    const std::size_t n_train = n - n_val - n_test;
    StepPartition p;
    p.train.assign(idx.begin(), idx.begin() + n_train);
    p.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
    p.test.assign(idx.begin() + n_train + n_val, idx.end());
    std::sort(p.train.begin(), p.train.end());
    std::sort(p.val.begin(), p.val.end());
    std::sort(p.test.begin(), p.test.end());
    return {p};
  }

  require(split.kfold >= 2, ErrorCode::invalid_params, "k-fold split needs k >= 2");
  std::vector<std::string> subjects;
  std::map<std::string, std::size_t> subject_pos;
  for (const StepSegment& step : steps)
    if (subject_pos.emplace(step.subject_id, subjects.size()).second)
      subjects.push_back(step.subject_id);
  require(subjects.size() >= static_cast<std::size_t>(split.kfold),
          ErrorCode::not_enough_subjects,
          "k-fold split needs at least " + std::to_string(split.kfold) + " subjects, got " +
              std::to_string(subjects.size()));

  Rng subject_rng = master.split(1);
  subject_rng.shuffle(subjects);
  std::vector<int> fold_of_subject(subjects.size());
  for (std::size_t i = 0; i < subjects.size(); ++i)
    fold_of_subject[subject_pos.at(subjects[i])] = static_cast<int>(i % split.kfold);

  std::vector<StepPartition> parts(static_cast<std::size_t>(split.kfold));
  for (int f = 0; f < split.kfold; ++f) {
    StepPartition& p = parts[static_cast<std::size_t>(f)];
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of_subject[subject_pos.at(steps[i].subject_id)] == f)
        p.test.push_back(i);
      else
        pool.push_back(i);
    }
    Rng pool_rng = master.split(2 + static_cast<std::uint64_t>(f));
    pool_rng.shuffle(pool);
    std::size_t n_val = pool.size() / 10;
    if (n_val == 0 && pool.size() >= 2) n_val = 1;
    p.val.assign(pool.begin(), pool.begin() + n_val);
    p.train.assign(pool.begin() + n_val, pool.end());
    std::sort(p.train.begin(), p.train.end());
    std::sort(p.val.begin(), p.val.end());
  }
  return parts;
}

BuildResult build_dataset_from_partition(const std::vector<StepSegment>& steps,
                                         const AugmentSpec& spec, const StepPartition& partition,
                                         std::uint64_t seed) {
  validate_spec(spec);
  Rng master(seed);
  BuildResult out;
  out.train.split = SplitKind::train;
  out.val.split = SplitKind::val;
  out.test.split = SplitKind::test;
  out.train.seed = out.val.seed = out.test.seed = seed;

  for (std::size_t i : partition.train) {
    Rng step_rng = master.split(kWindowStreamBase + i);
    std::vector<Window> ws = augment_step(steps.at(i), spec, step_rng);
    out.train.windows.insert(out.train.windows.end(), ws.begin(), ws.end());
  }
  for (std::size_t i : partition.val) {
    std::vector<Window> ws = test_windows(steps.at(i), spec);
    out.val.windows.insert(out.val.windows.end(), ws.begin(), ws.end());
  }
  for (std::size_t i : partition.test) {
    std::vector<Window> ws = test_windows(steps.at(i), spec);
    out.test.windows.insert(out.test.windows.end(), ws.begin(), ws.end());
  }

  SizeReport& r = out.report;
  r.steps = static_cast<long long>(steps.size());
  r.train_steps = static_cast<long long>(partition.train.size());
  r.val_steps = static_cast<long long>(partition.val.size());
  r.test_steps = static_cast<long long>(partition.test.size());
  r.train_windows = static_cast<long long>(out.train.windows.size());
  r.val_windows = static_cast<long long>(out.val.windows.size());
  r.test_windows = static_cast<long long>(out.test.windows.size());
  for (const Window& w : out.train.windows) {
    if (w.tag == AugTag::sliding) ++r.sliding_count;
    else if (w.tag == AugTag::random) ++r.random_count;
    else ++r.plain_count;
  }
  for (std::size_t i : partition.train)
    r.original_train_points += static_cast<long long>(steps.at(i).imu_len());
  r.augmented_train_points = r.train_windows * static_cast<long long>(spec.win_imu);
  r.multiplier = r.original_train_points > 0
                     ? static_cast<double>(r.augmented_train_points) /
                           static_cast<double>(r.original_train_points)
                     : 0.0;
  r.original_train_seconds = static_cast<double>(r.original_train_points) / kImuRateHz;
  r.augmented_train_seconds = static_cast<double>(r.augmented_train_points) / kImuRateHz;
  return out;
}

BuildResult build_dataset(const std::vector<StepSegment>& steps, const AugmentSpec& spec,
                          const SplitSpec& split) {
  const std::vector<StepPartition> parts = split_steps(steps, split);
  return build_dataset_from_partition(steps, spec, parts.front(), split.seed);
}

namespace {

const char* split_name(SplitKind kind) {
  switch (kind) {
    case SplitKind::train: return "train";
    case SplitKind::val: return "val";
    case SplitKind::test: return "test";
  }
  return "?";
}

void save_split(const std::filesystem::path& dir, const Dataset& ds) {
  const std::string name = split_name(ds.split);
  std::string meta = "subject_id,step_index,imu_start,tag\n";
  for (const Window& w : ds.windows) {
    meta += w.subject_id + ',' + std::to_string(w.step_index) + ',' +
            std::to_string(w.imu_start) + ',' + to_string(w.tag) + '\n';
  }
  csv::write_file((dir / (name + ".meta.csv")).string(), meta);

  const std::int64_t n = static_cast<std::int64_t>(ds.windows.size());
  const std::int64_t xr = n > 0 ? ds.windows[0].x.rows() : 0;
  const std::int64_t xc = n > 0 ? ds.windows[0].x.cols() : 0;
  const std::int64_t yr = n > 0 ? ds.windows[0].y.rows() : 0;
  const std::int64_t yc = n > 0 ? ds.windows[0].y.cols() : 0;
  std::vector<double> xs(static_cast<std::size_t>(n * xr * xc));
  std::vector<double> ys(static_cast<std::size_t>(n * yr * yc));
  for (std::int64_t i = 0; i < n; ++i) {
    const Window& w = ds.windows[static_cast<std::size_t>(i)];
    require(w.x.rows() == xr && w.x.cols() == xc && w.y.rows() == yr && w.y.cols() == yc,
            ErrorCode::shape_mismatch, "ragged window shapes in split " + name);
    for (std::int64_t r = 0; r < xr; ++r)
      for (std::int64_t c = 0; c < xc; ++c)
        xs[static_cast<std::size_t>((i * xr + r) * xc + c)] = w.x(r, c);
    for (std::int64_t r = 0; r < yr; ++r)
      for (std::int64_t c = 0; c < yc; ++c)
        ys[static_cast<std::size_t>((i * yr + r) * yc + c)] = w.y(r, c);
  }
  std::ofstream xo((dir / (name + ".x.bin")).string(), std::ios::binary | std::ios::trunc);
  blob::write<double>(xo, {n, xr, xc}, xs.data());
  std::ofstream yo((dir / (name + ".y.bin")).string(), std::ios::binary | std::ios::trunc);
  blob::write<double>(yo, {n, yr, yc}, ys.data());
}

Dataset load_split(const std::filesystem::path& dir, SplitKind kind, std::uint64_t seed) {
  Dataset ds;
  ds.split = kind;
  ds.seed = seed;
  const std::string name = split_name(kind);
  const std::string meta_path = (dir / (name + ".meta.csv")).string();
  csv::File meta = csv::load(meta_path);

  std::ifstream xin((dir / (name + ".x.bin")).string(), std::ios::binary);
  if (!xin) fail(ErrorCode::io_error, "cannot open " + (dir / (name + ".x.bin")).string());
  blob::Tensor<double> xt = blob::read<double>(xin, name + ".x.bin");
  std::ifstream yin((dir / (name + ".y.bin")).string(), std::ios::binary);
  if (!yin) fail(ErrorCode::io_error, "cannot open " + (dir / (name + ".y.bin")).string());
  blob::Tensor<double> yt = blob::read<double>(yin, name + ".y.bin");
  require(xt.dims.size() == 3 && yt.dims.size() == 3, ErrorCode::shape_mismatch,
          name + ": dataset blobs must be rank 3");
  require(xt.dims[0] == yt.dims[0] &&
              xt.dims[0] == static_cast<std::int64_t>(meta.rows.size()),
          ErrorCode::shape_mismatch, name + ": metadata and tensor counts disagree");

  const std::int64_t xr = xt.dims[1], xc = xt.dims[2], yr = yt.dims[1], yc = yt.dims[2];
  ds.windows.resize(meta.rows.size());
  for (std::size_t i = 0; i < meta.rows.size(); ++i) {
    const auto fields = csv::split_fields(meta.rows[i].text);
    require(fields.size() == 4, ErrorCode::malformed_row,
            meta_path + ":" + std::to_string(meta.rows[i].line_no) + ": expected 4 fields");
    Window& w = ds.windows[i];
    w.subject_id = std::string(fields[0]);
    w.step_index = static_cast<int>(csv::parse_int(fields[1], meta.rows[i].line_no, meta_path));
    w.imu_start = csv::parse_int(fields[2], meta.rows[i].line_no, meta_path);
    w.tag = aug_tag_from_string(std::string(fields[3]));
    w.x.resize(xr, xc);
    w.y.resize(yr, yc);
    const std::int64_t ii = static_cast<std::int64_t>(i);
    for (std::int64_t r = 0; r < xr; ++r)
      for (std::int64_t c = 0; c < xc; ++c)
        w.x(r, c) = xt.data[static_cast<std::size_t>((ii * xr + r) * xc + c)];
    for (std::int64_t r = 0; r < yr; ++r)
      for (std::int64_t c = 0; c < yc; ++c)
        w.y(r, c) = yt.data[static_cast<std::size_t>((ii * yr + r) * yc + c)];
  }
  return ds;
}

}  // namespace

std::string size_report_csv(const SizeReport& r) {
  std::string s = "key,value\n";
  const auto kv = [&s](const char* key, const std::string& value) {
    s += key;
    s += ',';
    s += value;
    s += '\n';
  };
  kv("steps", csv::format(r.steps));
  kv("train_steps", csv::format(r.train_steps));
  kv("val_steps", csv::format(r.val_steps));
  kv("test_steps", csv::format(r.test_steps));
  kv("train_windows", csv::format(r.train_windows));
  kv("val_windows", csv::format(r.val_windows));
  kv("test_windows", csv::format(r.test_windows));
  kv("sliding_windows", csv::format(r.sliding_count));
  kv("random_windows", csv::format(r.random_count));
  kv("plain_windows", csv::format(r.plain_count));
  kv("original_train_points", csv::format(r.original_train_points));
  kv("augmented_train_points", csv::format(r.augmented_train_points));
  kv("multiplier", csv::format(r.multiplier));
  kv("original_train_seconds", csv::format(r.original_train_seconds));
  kv("augmented_train_seconds", csv::format(r.augmented_train_seconds));
  return s;
}

std::string size_report_text(const SizeReport& r) {
  std::ostringstream os;
  os << "steps: " << r.steps << " (train " << r.train_steps << ", val " << r.val_steps
     << ", test " << r.test_steps << ")\n";
  os << "train windows: " << r.train_windows << " (sliding " << r.sliding_count << ", random "
     << r.random_count << ", plain " << r.plain_count << ")\n";
  os << "val windows: " << r.val_windows << ", test windows: " << r.test_windows << "\n";
  os << "train coverage: " << csv::format(r.augmented_train_seconds) << " s from "
     << csv::format(r.original_train_seconds) << " s of recording (x"
     << csv::format(r.multiplier) << ")\n";
  return os.str();
}

namespace {

SizeReport parse_size_report(const std::string& path) {
  csv::File f = csv::load(path);
  SizeReport r;
  for (const csv::Row& row : f.rows) {
    const auto fields = csv::split_fields(row.text);
    require(fields.size() == 2, ErrorCode::malformed_row,
            path + ":" + std::to_string(row.line_no) + ": expected key,value");
    const std::string key(fields[0]);
    const auto i = [&] { return csv::parse_int(fields[1], row.line_no, path); };
    const auto d = [&] { return csv::parse_double(fields[1], row.line_no, path); };
    if (key == "steps") r.steps = i();
    else if (key == "train_steps") r.train_steps = i();
    else if (key == "val_steps") r.val_steps = i();
    else if (key == "test_steps") r.test_steps = i();
    else if (key == "train_windows") r.train_windows = i();
    else if (key == "val_windows") r.val_windows = i();
    else if (key == "test_windows") r.test_windows = i();
    else if (key == "sliding_windows") r.sliding_count = i();
    else if (key == "random_windows") r.random_count = i();
    else if (key == "plain_windows") r.plain_count = i();
    else if (key == "original_train_points") r.original_train_points = i();
    else if (key == "augmented_train_points") r.augmented_train_points = i();
    else if (key == "multiplier") r.multiplier = d();
    else if (key == "original_train_seconds") r.original_train_seconds = d();
    else if (key == "augmented_train_seconds") r.augmented_train_seconds = d();
  }
  return r;
}

}  // namespace

void save_dataset(const std::string& dir, const BuildResult& result) {
  const std::filesystem::path root(dir);
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create " + dir + ": " + ec.message());
  csv::write_file((root / "manifest.txt").string(),
                  "format=gait-dataset-v1\nseed=" + std::to_string(result.train.seed) + "\n");
  csv::write_file((root / "size_report.csv").string(), size_report_csv(result.report));
  save_split(root, result.train);
  save_split(root, result.val);
  save_split(root, result.test);
}

void save_steps(const std::string& dir, const std::vector<StepSegment>& steps) {
  const std::filesystem::path root(dir);
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create " + dir + ": " + ec.message());
  std::string meta = "subject_id,step_index,imu_len,gt_len\n";
  for (const StepSegment& step : steps) {
    check_step(step);
    meta += step.subject_id + ',' + std::to_string(step.step_index) + ',' +
            std::to_string(step.imu_len()) + ',' + std::to_string(step.gt_len()) + '\n';
  }
  csv::write_file((root / "steps.meta.csv").string(), meta);
  std::ofstream bin((root / "steps.bin").string(), std::ios::binary | std::ios::trunc);
  if (!bin) fail(ErrorCode::io_error, "cannot write " + (root / "steps.bin").string());
  for (const StepSegment& step : steps) {
    blob::write<double>(bin, {step.imu_len()}, step.imu.t.data());
    blob::write<double>(bin, {3, step.imu_len()}, step.imu.accel.data());
    blob::write<double>(bin, {3, step.imu_len()}, step.imu.gyro.data());
    blob::write<double>(bin, {step.gt_len()}, step.gt.t.data());
    blob::write<double>(bin, {3, step.gt_len()}, step.gt.pos.data());
  }
}

std::vector<StepSegment> load_steps(const std::string& dir) {
  const std::filesystem::path root(dir);
  const std::string meta_path = (root / "steps.meta.csv").string();
  csv::File meta = csv::load(meta_path);
  std::ifstream bin((root / "steps.bin").string(), std::ios::binary);
  if (!bin) fail(ErrorCode::io_error, "cannot open " + (root / "steps.bin").string());
  std::vector<StepSegment> steps(meta.rows.size());
  for (std::size_t i = 0; i < meta.rows.size(); ++i) {
    const auto fields = csv::split_fields(meta.rows[i].text);
    require(fields.size() == 4, ErrorCode::malformed_row,
            meta_path + ":" + std::to_string(meta.rows[i].line_no) + ": expected 4 fields");
    StepSegment& step = steps[i];
    step.subject_id = std::string(fields[0]);
    step.step_index = static_cast<int>(csv::parse_int(fields[1], meta.rows[i].line_no, meta_path));
    const Eigen::Index imu_len = csv::parse_int(fields[2], meta.rows[i].line_no, meta_path);
    const Eigen::Index gt_len = csv::parse_int(fields[3], meta.rows[i].line_no, meta_path);
    const std::string ctx = "steps.bin[" + std::to_string(i) + "]";
    blob::Tensor<double> imu_t = blob::read<double>(bin, ctx + ".imu_t");
    blob::Tensor<double> accel = blob::read<double>(bin, ctx + ".accel");
    blob::Tensor<double> gyro = blob::read<double>(bin, ctx + ".gyro");
    blob::Tensor<double> gt_t = blob::read<double>(bin, ctx + ".gt_t");
    blob::Tensor<double> gt_pos = blob::read<double>(bin, ctx + ".gt_pos");
    require(imu_t.dims == std::vector<std::int64_t>{imu_len} &&
                accel.dims == (std::vector<std::int64_t>{3, imu_len}) &&
                gyro.dims == (std::vector<std::int64_t>{3, imu_len}) &&
                gt_t.dims == std::vector<std::int64_t>{gt_len} &&
                gt_pos.dims == (std::vector<std::int64_t>{3, gt_len}),
            ErrorCode::shape_mismatch, ctx + ": tensor shapes disagree with metadata");
    step.imu.subject_id = step.subject_id;
    step.imu.t = Eigen::Map<const Eigen::VectorXd>(imu_t.data.data(), imu_len);
    step.imu.accel = Eigen::Map<const Eigen::Matrix3Xd>(accel.data.data(), 3, imu_len);
    step.imu.gyro = Eigen::Map<const Eigen::Matrix3Xd>(gyro.data.data(), 3, imu_len);
    step.gt.subject_id = step.subject_id;
    step.gt.t = Eigen::Map<const Eigen::VectorXd>(gt_t.data.data(), gt_len);
    step.gt.pos = Eigen::Map<const Eigen::Matrix3Xd>(gt_pos.data.data(), 3, gt_len);
    check_step(step);
  }
  return steps;
}

BuildResult load_dataset(const std::string& dir) {
  const std::filesystem::path root(dir);
  const std::string manifest = csv::read_file((root / "manifest.txt").string());
  std::uint64_t seed = 0;
  bool format_ok = false;
  std::istringstream in(manifest);
  std::string line;
  while (std::getline(in, line)) {
    if (line == "format=gait-dataset-v1") format_ok = true;
    if (line.rfind("seed=", 0) == 0) seed = std::stoull(line.substr(5));
  }
  require(format_ok, ErrorCode::io_error, dir + ": not a dataset directory");
  BuildResult out;
  out.train = load_split(root, SplitKind::train, seed);
  out.val = load_split(root, SplitKind::val, seed);
  out.test = load_split(root, SplitKind::test, seed);
  out.report = parse_size_report((root / "size_report.csv").string());
  return out;
}

}  // namespace gait
