#include "gaittrack/training.hpp"

#include <sstream>

#include "gaittrack/csv.hpp"

namespace gait::nn {

void validate_train_config(const TrainConfig& cfg) {
  require(cfg.epochs > 0, ErrorCode::invalid_config, "epochs must be positive");
  require(cfg.batch_size > 0, ErrorCode::invalid_config, "batch size must be positive");
  require(cfg.lr > 0.0, ErrorCode::invalid_config, "learning rate must be positive");
  require(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0,
          ErrorCode::invalid_config, "Adam betas must be in [0, 1)");
  require(cfg.eps > 0.0, ErrorCode::invalid_config, "Adam epsilon must be positive");
  require(cfg.w_y >= 0.0 && cfg.w_z >= 0.0, ErrorCode::invalid_config,
          "loss weights must be non-negative");
}

std::string train_config_text(const TrainConfig& cfg) {
  std::ostringstream os;
  os << "epochs=" << cfg.epochs << "\n";
  os << "batch_size=" << cfg.batch_size << "\n";
  os << "lr=" << csv::format(cfg.lr) << "\n";
  os << "beta1=" << csv::format(cfg.beta1) << "\n";
  os << "beta2=" << csv::format(cfg.beta2) << "\n";
  os << "eps=" << csv::format(cfg.eps) << "\n";
  os << "w_y=" << csv::format(cfg.w_y) << "\n";
  os << "w_z=" << csv::format(cfg.w_z) << "\n";
  os << "seed=" << cfg.seed << "\n";
  return os.str();
}

TrainConfig train_config_from_text(const std::string& text) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::invalid_config,
            "train config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "epochs") cfg.epochs = static_cast<int>(csv::parse_int(value, line_no, "train config"));
    else if (key == "batch_size") cfg.batch_size = static_cast<int>(csv::parse_int(value, line_no, "train config"));
    else if (key == "lr") cfg.lr = csv::parse_double(value, line_no, "train config");
    else if (key == "beta1") cfg.beta1 = csv::parse_double(value, line_no, "train config");
    else if (key == "beta2") cfg.beta2 = csv::parse_double(value, line_no, "train config");
    else if (key == "eps") cfg.eps = csv::parse_double(value, line_no, "train config");
    else if (key == "w_y") cfg.w_y = csv::parse_double(value, line_no, "train config");
    else if (key == "w_z") cfg.w_z = csv::parse_double(value, line_no, "train config");
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(csv::parse_int(value, line_no, "train config"));
    else fail(ErrorCode::invalid_config, "train config: unknown key '" + key + "'");
  }
  validate_train_config(cfg);
  return cfg;
}

std::string History::csv() const {
  std::string s = "epoch,train_loss,val_loss,val_rmse_x,val_rmse_y,val_rmse_z\n";
  for (const EpochRow& r : rows) {
    s += csv::format(static_cast<long long>(r.epoch)) + ',' + csv::format(r.train_loss) + ',' +
         csv::format(r.val_loss) + ',' + csv::format(r.val_rmse_x) + ',' +
         csv::format(r.val_rmse_y) + ',' + csv::format(r.val_rmse_z) + '\n';
  }
  return s;
}

}  // namespace gait::nn
