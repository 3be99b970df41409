#include "gaittrack/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "gaittrack/csv.hpp"
#include "gaittrack/trajectory.hpp"

namespace gait::cli {

namespace fs = std::filesystem;

sim::CorpusConfig corpus_config(const Config& cfg) {
  sim::CorpusConfig c;
  c.n_subjects = static_cast<int>(cfg.get_int("sim.subjects", c.n_subjects));
  c.steps_per_subject = static_cast<int>(cfg.get_int("sim.steps", c.steps_per_subject));
  c.speed_min = cfg.get_double("sim.speed_min", c.speed_min);
  c.speed_max = cfg.get_double("sim.speed_max", c.speed_max);
  c.duration_min = cfg.get_double("sim.duration_min", c.duration_min);
  c.duration_max = cfg.get_double("sim.duration_max", c.duration_max);
  c.clearance_min = cfg.get_double("sim.clearance_min", c.clearance_min);
  c.clearance_max = cfg.get_double("sim.clearance_max", c.clearance_max);
  c.sway_min = cfg.get_double("sim.sway_min", c.sway_min);
  c.sway_max = cfg.get_double("sim.sway_max", c.sway_max);
  c.pitch_min = cfg.get_double("sim.pitch_min", c.pitch_min);
  c.pitch_max = cfg.get_double("sim.pitch_max", c.pitch_max);
  c.accel_bias_mag = cfg.get_double("sim.accel_bias", c.accel_bias_mag);
  c.gyro_bias_mag = cfg.get_double("sim.gyro_bias", c.gyro_bias_mag);
  c.accel_noise_sigma = cfg.get_double("sim.accel_noise", c.accel_noise_sigma);
  c.gyro_noise_sigma = cfg.get_double("sim.gyro_noise", c.gyro_noise_sigma);
  c.step_jitter = cfg.get_double("sim.jitter", c.step_jitter);
  c.seed = cfg.get_u64("sim.seed", c.seed);
  return c;
}

DetectorConfig detector_config(const Config& cfg) {
  DetectorConfig d;
  d.rms_window = static_cast<int>(cfg.get_int("detector.rms_window", d.rms_window));
  d.low = cfg.get_double("detector.low", d.low);
  d.high = cfg.get_double("detector.high", d.high);
  return d;
}

AugmentSpec augment_spec(const Config& cfg) {
  AugmentSpec spec;
  spec.mode = aug_mode_from_string(cfg.get_string("aug.mode", to_string(spec.mode)));
  spec.win_imu = cfg.get_int("aug.win_imu", spec.win_imu);
  spec.win_gt = cfg.get_int("aug.win_gt", spec.win_gt);
  spec.overlap_imu = cfg.get_int("aug.overlap_imu", spec.overlap_imu);
  spec.overlap_gt = cfg.get_int("aug.overlap_gt", spec.overlap_gt);
  spec.random_count = static_cast<int>(cfg.get_int("aug.random_count", spec.random_count));
  spec.differential = cfg.get_bool("aug.differential", spec.differential);
  validate_spec(spec);
  return spec;
}

SplitSpec split_spec(const Config& cfg) {
  SplitSpec split;
  split.mode = split_mode_from_string(cfg.get_string("split.mode", to_string(split.mode)));
  split.kfold = static_cast<int>(cfg.get_int("split.kfold", split.kfold));
  split.seed = cfg.get_u64("split.seed", split.seed);
  return split;
}

nn::ModelConfig model_config(const Config& cfg) {
  nn::ModelConfig mc;
  mc.variant = nn::variant_from_string(cfg.get_string("model.variant", to_string(mc.variant)));
  mc.depth = nn::depth_from_string(cfg.get_string("model.depth", to_string(mc.depth)));
  mc.scale = nn::scale_from_string(cfg.get_string("model.scale", to_string(mc.scale)));
  mc.dropout = cfg.get_double("model.dropout", mc.dropout);
  mc.init = nn::init_from_string(cfg.get_string("model.init", to_string(mc.init)));
  mc.init_sigma = cfg.get_double("model.init_sigma", mc.init_sigma);
  mc.bn_order = nn::bn_order_from_string(cfg.get_string("model.bn_order", to_string(mc.bn_order)));
  mc.seed = cfg.get_u64("model.seed", mc.seed);
  return mc;
}

nn::TrainConfig train_config(const Config& cfg) {
  nn::TrainConfig tc;
  tc.epochs = static_cast<int>(cfg.get_int("train.epochs", tc.epochs));
  tc.batch_size = static_cast<int>(cfg.get_int("train.batch", tc.batch_size));
  tc.lr = cfg.get_double("train.lr", tc.lr);
  tc.beta1 = cfg.get_double("train.beta1", tc.beta1);
  tc.beta2 = cfg.get_double("train.beta2", tc.beta2);
  tc.eps = cfg.get_double("train.eps", tc.eps);
  tc.w_y = cfg.get_double("train.w_y", tc.w_y);
  tc.w_z = cfg.get_double("train.w_z", tc.w_z);
  tc.seed = cfg.get_u64("train.seed", tc.seed);
  nn::validate_train_config(tc);
  return tc;
}

namespace {

UnitSpec sim_units(const Config& cfg) {
  const std::string u = cfg.get_string("sim.units", "si");
  if (u == "si") return UnitSpec::si;
  if (u == "g_dps") return UnitSpec::g_dps;
  fail(ErrorCode::invalid_config, "sim.units must be si or g_dps");
}

double sim_stance(const Config& cfg) { return cfg.get_double("sim.stance", 0.35); }

int eval_plots(const Config& cfg) { return static_cast<int>(cfg.get_int("eval.plots", 3)); }

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create " + dir + ": " + ec.message());
}

nn::ModelConfig model_config_for(const Config& cfg, const BuildResult& data) {
  require(!data.train.windows.empty(), ErrorCode::empty_windows, "dataset has no training windows");
  nn::ModelConfig mc = model_config(cfg);
  const Window& w = data.train.windows.front();
  mc.in_rows = w.x.rows();
  mc.in_cols = w.x.cols();
  mc.out_len = static_cast<int>(w.y.cols());
  nn::validate_config(mc);
  return mc;
}

std::string metrics_text(const nn::TrainSummary& summary, const nn::EvalStats& test) {
  std::string s;
  s += "best_epoch=" + std::to_string(summary.best_epoch) + "\n";
  s += "best_val_loss=" + csv::format(summary.best_val_loss) + "\n";
  s += "test_loss=" + csv::format(test.loss) + "\n";
  s += "test_rmse_x=" + csv::format(test.rmse[0]) + "\n";
  s += "test_rmse_y=" + csv::format(test.rmse[1]) + "\n";
  s += "test_rmse_z=" + csv::format(test.rmse[2]) + "\n";
  return s;
}

}  // namespace

void consume_all(const Config& cfg) {
  corpus_config(cfg);
  detector_config(cfg);
  augment_spec(cfg);
  split_spec(cfg);
  model_config(cfg);
  train_config(cfg);
  sim_units(cfg);
  sim_stance(cfg);
  eval_plots(cfg);
  cfg.reject_unused();
}

void write_manifest(const std::string& dir, const std::string& command, const Config& cfg) {
  make_dir(dir);
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(cfg.hash()));
  std::string text;
  text += std::string("version=") + kVersionString + "\n";
  text += "command=" + command + "\n";
  text += std::string("config_hash=") + hash + "\n";
  text += cfg.canonical_text();
  csv::write_file(dir + "/manifest.txt", text);
}

int run_simulate(const std::string& out_dir, const Config& cfg) {
  consume_all(cfg);
  const sim::CorpusConfig corpus = corpus_config(cfg);
  const UnitSpec units = sim_units(cfg);
  const std::vector<sim::SubjectWalk> walks = sim::simulate_corpus_walks(corpus, sim_stance(cfg));
  write_manifest(out_dir, "simulate", cfg);
  long long total_samples = 0;
  for (const sim::SubjectWalk& sw : walks) {
    const std::string base = out_dir + "/" + sw.subject_id;
    csv::write_file(base + ".imu.csv", serialize_imu_csv(sw.walk.imu, units));
    csv::write_file(base + ".gt.csv", serialize_gt_csv(sw.walk.gt));
    csv::write_file(base + ".annotations.csv", serialize_annotations_csv(sw.walk.annotations()));
    total_samples += sw.walk.imu.size();
  }
  std::cout << "simulated " << walks.size() << " subjects, " << total_samples
            << " IMU samples total -> " << out_dir << "\n";
  return 0;
}

int run_ingest(const std::string& in_dir, const std::string& out_dir, const Config& cfg) {
  consume_all(cfg);
  const DetectorConfig detector = detector_config(cfg);
  std::vector<std::string> subjects;
  for (const fs::directory_entry& e : fs::directory_iterator(in_dir)) {
    const std::string name = e.path().filename().string();
    const std::string suffix = ".imu.csv";
    if (name.size() > suffix.size() && name.rfind(suffix) == name.size() - suffix.size())
      subjects.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(subjects.begin(), subjects.end());
  require(!subjects.empty(), ErrorCode::empty, in_dir + ": no *.imu.csv recordings found");

  std::vector<StepSegment> steps;
  std::ostringstream summary;
  for (const std::string& subject : subjects) {
    const std::string base = in_dir + "/" + subject;
    const ImuStream imu = parse_imu_log(base + ".imu.csv", {}, subject);
    const GroundTruthStream gt = parse_gt_log(base + ".gt.csv", subject);
    const AlignedPair pair = align_streams(imu, gt);
    std::vector<StepSegment> segs;
    if (fs::exists(base + ".annotations.csv"))
      segs = segment_steps_annotated(pair, parse_annotations(base + ".annotations.csv"));
    else
      segs = segment_steps_auto(pair, detector);
    summary << subject << ": " << segs.size() << " steps\n";
    steps.insert(steps.end(), std::make_move_iterator(segs.begin()),
                 std::make_move_iterator(segs.end()));
  }
  require(!steps.empty(), ErrorCode::too_few_steps, in_dir + ": no usable steps after segmentation");
  write_manifest(out_dir, "ingest", cfg);
  save_steps(out_dir, steps);
  std::cout << summary.str() << "total " << steps.size() << " steps -> " << out_dir << "\n";
  return 0;
}

int run_augment(const std::string& steps_dir, const std::string& out_dir, const Config& cfg) {
  consume_all(cfg);
  const std::vector<StepSegment> steps = load_steps(steps_dir);
  const BuildResult result = build_dataset(steps, augment_spec(cfg), split_spec(cfg));
  write_manifest(out_dir, "augment", cfg);
  save_dataset(out_dir, result);
  std::cout << size_report_text(result.report);
  return 0;
}

int run_train(const std::string& dataset_dir, const std::string& out_dir, const Config& cfg) {
  consume_all(cfg);
  const BuildResult data = load_dataset(dataset_dir);
  const nn::ModelConfig mc = model_config_for(cfg, data);
  const nn::TrainConfig tc = train_config(cfg);
  nn::Network<float> net(mc);
  std::cout << "training " << to_string(mc.variant) << " " << to_string(mc.depth) << " (scale "
            << to_string(mc.scale) << ", " << net.param_count() << " parameters) on "
            << data.train.windows.size() << " windows\n";
  const nn::TrainSummary summary = nn::train<float>(net, data.train, data.val, tc, &std::cout);
  const nn::EvalStats test = nn::evaluate<float>(net, data.test, tc);
  write_manifest(out_dir, "train", cfg);
  nn::save_checkpoint<float>(out_dir, net);
  csv::write_file(out_dir + "/history.csv", summary.history.csv());
  csv::write_file(out_dir + "/metrics.txt", metrics_text(summary, test));
  std::cout << "best epoch " << summary.best_epoch << " (val loss "
            << csv::format(summary.best_val_loss) << "), test loss " << csv::format(test.loss)
            << " -> " << out_dir << "\n";
  return 0;
}

namespace {

void write_step_outputs(const std::string& dir, const std::vector<StepSegment>& steps,
                        const std::vector<std::size_t>& test_idx, int n_plots,
                        const std::vector<StepEval>& evals) {
  if (n_plots <= 0) return;
  make_dir(dir);
  const std::size_t n = std::min<std::size_t>(evals.size(), static_cast<std::size_t>(n_plots));
  for (std::size_t i = 0; i < n; ++i) {
    const StepEval& ev = evals[i];
    const StepSegment& step = steps.at(test_idx[i]);
    const std::string base =
        dir + "/" + ev.subject_id + "_step" + std::to_string(ev.step_index);
    csv::write_file(base + ".svg", step_plot_svg(ev, step));
    csv::write_file(base + ".points.csv", step_points_csv(ev, step));
  }
}

}  // namespace

int run_eval(const std::string& model_dir, const std::string& steps_dir,
             const std::string& out_dir, const Config& cfg) {
  consume_all(cfg);
  nn::Network<float> net = nn::load_checkpoint<float>(model_dir);
  const std::vector<StepSegment> steps = load_steps(steps_dir);
  const AugmentSpec spec = augment_spec(cfg);
  const SplitSpec split = split_spec(cfg);
  const StepPartition partition = split_steps(steps, split).front();
  const std::vector<StepEval> evals =
      evaluate_steps<float>(net, steps, partition.test, spec);
  const ErrorReport report = aggregate_report(evals);
  write_manifest(out_dir, "eval", cfg);
  csv::write_file(out_dir + "/report.csv", report_csv(report));
  csv::write_file(out_dir + "/report.txt", report_text(report));
  write_step_outputs(out_dir + "/plots", steps, partition.test, eval_plots(cfg), evals);
  std::cout << report_text(report);
  return 0;
}

int run_crossval(const std::string& steps_dir, const std::string& out_dir, const Config& cfg) {
  consume_all(cfg);
  const std::vector<StepSegment> steps = load_steps(steps_dir);
  const AugmentSpec spec = augment_spec(cfg);
  SplitSpec split = split_spec(cfg);
  split.mode = SplitSpec::Mode::by_subject_kfold;
  const std::vector<StepPartition> partitions = split_steps(steps, split);
  const nn::ModelConfig base_mc = model_config(cfg);
  const nn::TrainConfig base_tc = train_config(cfg);

  write_manifest(out_dir, "crossval", cfg);
  std::string folds_csv = "fold,axis,mean_cm,std_cm\n";
  Eigen::Vector3d mean_sum = Eigen::Vector3d::Zero();
  const char* axes[3] = {"X", "Y", "Z"};
  for (std::size_t f = 0; f < partitions.size(); ++f) {
    const BuildResult data = build_dataset_from_partition(steps, spec, partitions[f], split.seed);
    nn::ModelConfig mc = base_mc;
    mc.seed = Rng(base_mc.seed).split(100 + f).seed();
    const Window& w = data.train.windows.front();
    mc.in_rows = w.x.rows();
    mc.in_cols = w.x.cols();
    mc.out_len = static_cast<int>(w.y.cols());
    nn::TrainConfig tc = base_tc;
    tc.seed = Rng(base_tc.seed).split(200 + f).seed();

    nn::Network<float> net(mc);
    std::cout << "fold " << f + 1 << "/" << partitions.size() << ": "
              << data.train.windows.size() << " train windows, " << partitions[f].test.size()
              << " test steps\n";
    const nn::TrainSummary summary = nn::train<float>(net, data.train, data.val, tc);
    const std::vector<StepEval> evals =
        evaluate_steps<float>(net, steps, partitions[f].test, spec);
    const ErrorReport report = aggregate_report(evals);
    const std::string fold_dir = out_dir + "/fold" + std::to_string(f + 1);
    make_dir(fold_dir);
    csv::write_file(fold_dir + "/report.csv", report_csv(report));
    csv::write_file(fold_dir + "/history.csv", summary.history.csv());
    for (int a = 0; a < 3; ++a)
      folds_csv += std::to_string(f + 1) + ',' + axes[a] + ',' + csv::format(report.mean(a)) +
                   ',' + csv::format(report.stddev(a)) + '\n';
    mean_sum += report.mean;
    std::cout << report_text(report);
  }
  const Eigen::Vector3d overall = mean_sum / static_cast<double>(partitions.size());
  for (int a = 0; a < 3; ++a)
    folds_csv += std::string("mean,") + axes[a] + ',' + csv::format(overall(a)) + ",\n";
  csv::write_file(out_dir + "/crossval.csv", folds_csv);
  std::cout << "cross-validation mean error (cm): X " << csv::format(overall(0)) << ", Y "
            << csv::format(overall(1)) << ", Z " << csv::format(overall(2)) << "\n";
  return 0;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::invalid_config:
    case ErrorCode::invalid_params:
      return 1;
    case ErrorCode::diverged:
      return 3;
    default:
      return 2;
  }
}

}  // namespace gait::cli
