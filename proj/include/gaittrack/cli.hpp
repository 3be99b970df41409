#pragma once

#include <string>

#include "gaittrack/config.hpp"
#include "gaittrack/gaitsim.hpp"
#include "gaittrack/model.hpp"
#include "gaittrack/pipeline.hpp"
#include "gaittrack/training.hpp"

namespace gait::cli {

// Typed views over one shared flat configuration; every command consumes the
// whole key set so unknown keys are rejected no matter which stage runs.
sim::CorpusConfig corpus_config(const Config& cfg);
DetectorConfig detector_config(const Config& cfg);
AugmentSpec augment_spec(const Config& cfg);
SplitSpec split_spec(const Config& cfg);
nn::ModelConfig model_config(const Config& cfg);
nn::TrainConfig train_config(const Config& cfg);

// Reads every recognized key (so reject_unused sees them) and validates.
void consume_all(const Config& cfg);

void write_manifest(const std::string& dir, const std::string& command, const Config& cfg);

int run_simulate(const std::string& out_dir, const Config& cfg);
int run_ingest(const std::string& in_dir, const std::string& out_dir, const Config& cfg);
int run_augment(const std::string& steps_dir, const std::string& out_dir, const Config& cfg);
int run_train(const std::string& dataset_dir, const std::string& out_dir, const Config& cfg);
int run_eval(const std::string& model_dir, const std::string& steps_dir,
             const std::string& out_dir, const Config& cfg);
int run_crossval(const std::string& steps_dir, const std::string& out_dir, const Config& cfg);

// 1 = configuration/usage problem, 3 = training divergence, 2 = everything else.
int exit_code_for(const Error& e);

}  // namespace gait::cli
