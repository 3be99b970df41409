#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "gaittrack/cli.hpp"

namespace {

gait::Config load_config(const std::string& config_path, const std::vector<std::string>& sets,
                         bool seed_given, std::uint64_t seed) {
  gait::Config cfg =
      config_path.empty() ? gait::Config() : gait::Config::from_file(config_path);
  for (const std::string& pair : sets) cfg.set_pair(pair);
  if (seed_given) {
    // One flag that retargets every stage's stream for quick reruns.
    cfg.set("sim.seed", std::to_string(seed));
    cfg.set("split.seed", std::to_string(seed));
    cfg.set("model.seed", std::to_string(seed));
    cfg.set("train.seed", std::to_string(seed));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"foot-trajectory regression from 6-axis IMU data"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool seed_given = false;
  app.add_option("--config", config_path, "key=value configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--set", sets, "override a configuration key (key=value, repeatable)");
  app.add_option("--seed", seed, "override sim/split/model/train seeds at once")
      ->each([&seed_given](const std::string&) { seed_given = true; });

  std::string in_dir, out_dir, steps_dir, dataset_dir, model_dir;

  CLI::App* c_sim = app.add_subcommand("simulate", "write a synthetic walking corpus");
  c_sim->add_option("--out", out_dir, "output directory")->required();

  CLI::App* c_ing = app.add_subcommand("ingest", "parse, align, and segment recordings");
  c_ing->add_option("--in", in_dir, "directory of *.imu.csv / *.gt.csv recordings")->required();
  c_ing->add_option("--out", out_dir, "output steps directory")->required();

  CLI::App* c_aug = app.add_subcommand("augment", "split steps and build training windows");
  c_aug->add_option("--steps", steps_dir, "steps directory from ingest")->required();
  c_aug->add_option("--out", out_dir, "output dataset directory")->required();

  CLI::App* c_tr = app.add_subcommand("train", "train the regression network");
  c_tr->add_option("--data", dataset_dir, "dataset directory from augment")->required();
  c_tr->add_option("--out", out_dir, "output model directory")->required();

  CLI::App* c_ev = app.add_subcommand("eval", "reconstruct test-step trajectories and score them");
  c_ev->add_option("--model", model_dir, "model directory from train")->required();
  c_ev->add_option("--steps", steps_dir, "steps directory from ingest")->required();
  c_ev->add_option("--out", out_dir, "output report directory")->required();

  CLI::App* c_cv = app.add_subcommand("crossval", "subject-disjoint k-fold cross-validation");
  c_cv->add_option("--steps", steps_dir, "steps directory from ingest")->required();
  c_cv->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const gait::Config cfg = load_config(config_path, sets, seed_given, seed);
    if (c_sim->parsed()) return gait::cli::run_simulate(out_dir, cfg);
    if (c_ing->parsed()) return gait::cli::run_ingest(in_dir, out_dir, cfg);
    if (c_aug->parsed()) return gait::cli::run_augment(steps_dir, out_dir, cfg);
    if (c_tr->parsed()) return gait::cli::run_train(dataset_dir, out_dir, cfg);
    if (c_ev->parsed()) return gait::cli::run_eval(model_dir, steps_dir, out_dir, cfg);
    if (c_cv->parsed()) return gait::cli::run_crossval(steps_dir, out_dir, cfg);
  } catch (const gait::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return gait::cli::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
