#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "gaittrack/model.hpp"
#include "gaittrack/pipeline.hpp"

namespace gait::nn {

struct TrainConfig {
  int epochs = 1000;
  int batch_size = 100;
  double lr = 0.01;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double w_y = 10.0, w_z = 10.0;  // lateral/vertical loss weights
  std::uint64_t seed = 0;
};

void validate_train_config(const TrainConfig& cfg);
std::string train_config_text(const TrainConfig& cfg);
TrainConfig train_config_from_text(const std::string& text);

// Stacks selected windows into the network input layout (one channel, sensor
// rows as image rows, time as image columns).
template <class S>
FeatureMap<S> batch_input(const std::vector<Window>& windows, const std::vector<std::size_t>& idx) {
  require(!idx.empty(), ErrorCode::empty_windows, "batch_input: empty index list");
  const Eigen::Index H = windows[idx[0]].x.rows();
  const Eigen::Index W = windows[idx[0]].x.cols();
  const Eigen::Index B = static_cast<Eigen::Index>(idx.size());
  FeatureMap<S> m = FeatureMap<S>::zeros(1, B, H, W);
  for (Eigen::Index b = 0; b < B; ++b) {
    const Eigen::MatrixXd& x = windows[idx[static_cast<std::size_t>(b)]].x;
    require(x.rows() == H && x.cols() == W, ErrorCode::shape_mismatch,
            "batch_input: ragged window shapes");
    for (Eigen::Index h = 0; h < H; ++h)
      m.data.row(0).segment((b * H + h) * W, W) = x.row(h).cast<S>();
  }
  return m;
}

// Per-axis out_len x batch target matrices.
template <class S>
std::array<Mat<S>, 3> batch_targets(const std::vector<Window>& windows,
                                    const std::vector<std::size_t>& idx) {
  require(!idx.empty(), ErrorCode::empty_windows, "batch_targets: empty index list");
  const Eigen::Index L = windows[idx[0]].y.cols();
  const Eigen::Index B = static_cast<Eigen::Index>(idx.size());
  std::array<Mat<S>, 3> t;
  for (int a = 0; a < 3; ++a) t[a].resize(L, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const Eigen::MatrixXd& y = windows[idx[static_cast<std::size_t>(b)]].y;
    require(y.rows() == 3 && y.cols() == L, ErrorCode::shape_mismatch,
            "batch_targets: ragged window shapes");
    for (int a = 0; a < 3; ++a) t[static_cast<std::size_t>(a)].col(b) = y.row(a).transpose().cast<S>();
  }
  return t;
}

template <class S>
struct LossGrad {
  double loss = 0.0;
  std::array<double, 3> rmse{};
  std::array<Mat<S>, 3> grad;
};

// Loss = RMSE_x + w_y * RMSE_y + w_z * RMSE_z over the whole batch; the
// gradient of each RMSE is (pred - target) / (n * rmse), zero at rmse == 0.
template <class S>
LossGrad<S> fused_loss(const std::array<Mat<S>, 3>& preds, const std::array<Mat<S>, 3>& targets,
                       double w_y, double w_z) {
  LossGrad<S> out;
  const double weights[3] = {1.0, w_y, w_z};
  for (int a = 0; a < 3; ++a) {
    const auto& p = preds[static_cast<std::size_t>(a)];
    const auto& t = targets[static_cast<std::size_t>(a)];
    require(p.rows() == t.rows() && p.cols() == t.cols(), ErrorCode::shape_mismatch,
            "loss: prediction and target shapes differ");
    const Eigen::MatrixXd diff = (p - t).template cast<double>();
    const double n = static_cast<double>(diff.size());
    const double rmse = std::sqrt(diff.array().square().sum() / n);
    out.rmse[static_cast<std::size_t>(a)] = rmse;
    out.loss += weights[a] * rmse;
    if (rmse < 1e-12)
      out.grad[static_cast<std::size_t>(a)] = Mat<S>::Zero(p.rows(), p.cols());
    else
      out.grad[static_cast<std::size_t>(a)] =
          ((weights[a] / (n * rmse)) * diff).template cast<S>();
  }
  return out;
}

// Adam with bias correction over a fixed parameter list.
template <class S>
class Adam {
 public:
  Adam(std::vector<ParamRef<S>> params, const TrainConfig& cfg)
      : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const ParamRef<S>& p : params_) {
      m_.push_back(Mat<S>::Zero(p.value->rows(), p.value->cols()));
      v_.push_back(Mat<S>::Zero(p.value->rows(), p.value->cols()));
    }
  }

  void step() {
    ++t_;
    const S bc1 = S(1) - static_cast<S>(std::pow(cfg_.beta1, t_));
    const S bc2 = S(1) - static_cast<S>(std::pow(cfg_.beta2, t_));
    const S b1 = static_cast<S>(cfg_.beta1), b2 = static_cast<S>(cfg_.beta2);
    const S lr = static_cast<S>(cfg_.lr), eps = static_cast<S>(cfg_.eps);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const Mat<S>& g = *params_[i].grad;
      m_[i] = b1 * m_[i] + (S(1) - b1) * g;
      v_[i] = (b2 * v_[i].array() + (S(1) - b2) * g.array().square()).matrix();
      params_[i].value->array() -=
          lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + eps);
    }
  }

  long long steps_taken() const { return t_; }

 private:
  std::vector<ParamRef<S>> params_;
  TrainConfig cfg_;
  std::vector<Mat<S>> m_, v_;
  long long t_ = 0;
};

struct EvalStats {
  double loss = 0.0;
  std::array<double, 3> rmse{};
};

// Whole-dataset metrics in inference mode, exact regardless of batch size.
template <class S>
EvalStats evaluate(Network<S>& net, const Dataset& ds, const TrainConfig& cfg) {
  require(!ds.windows.empty(), ErrorCode::empty_windows, "evaluate: empty dataset");
  std::array<double, 3> sq_sum{};
  double count = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < ds.windows.size();
       start += static_cast<std::size_t>(cfg.batch_size)) {
    const std::size_t stop =
        std::min(ds.windows.size(), start + static_cast<std::size_t>(cfg.batch_size));
    idx.resize(stop - start);
    std::iota(idx.begin(), idx.end(), start);
    const FeatureMap<S> x = batch_input<S>(ds.windows, idx);
    const std::array<Mat<S>, 3> t = batch_targets<S>(ds.windows, idx);
    const std::array<Mat<S>, 3> p = net.forward(x, false);
    for (int a = 0; a < 3; ++a)
      sq_sum[static_cast<std::size_t>(a)] +=
          (p[static_cast<std::size_t>(a)] - t[static_cast<std::size_t>(a)])
              .template cast<double>()
              .array()
              .square()
              .sum();
    count += static_cast<double>(t[0].size());
  }
  EvalStats out;
  for (int a = 0; a < 3; ++a)
    out.rmse[static_cast<std::size_t>(a)] = std::sqrt(sq_sum[static_cast<std::size_t>(a)] / count);
  out.loss = out.rmse[0] + cfg.w_y * out.rmse[1] + cfg.w_z * out.rmse[2];
  return out;
}

struct EpochRow {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_rmse_x = 0.0, val_rmse_y = 0.0, val_rmse_z = 0.0;
};

struct History {
  std::vector<EpochRow> rows;
  std::string csv() const;
};

struct TrainSummary {
  History history;
  int best_epoch = 0;  // 1-based; 0 means no epoch ran
  double best_val_loss = std::numeric_limits<double>::infinity();
};

// Seeded mini-batch training with the weighted-RMSE loss and Adam. The
// last partial batch of each epoch is kept. Weights revert to the best
// validation epoch before returning. Throws on a non-finite loss.
template <class S>
TrainSummary train(Network<S>& net, const Dataset& train_ds, const Dataset& val_ds,
                   const TrainConfig& cfg, std::ostream* log = nullptr) {
  validate_train_config(cfg);
  require(!train_ds.windows.empty(), ErrorCode::empty_windows, "train: empty training split");
  require(!val_ds.windows.empty(), ErrorCode::empty_windows, "train: empty validation split");

  std::vector<ParamRef<S>> params = net.params();
  std::vector<ParamRef<S>> state = net.state();
  Adam<S> adam(params, cfg);
  Rng shuffle_rng = Rng(cfg.seed).split(3);

  std::vector<ParamRef<S>> tracked = params;
  tracked.insert(tracked.end(), state.begin(), state.end());
  std::vector<Mat<S>> best;
  best.reserve(tracked.size());

  TrainSummary out;
  std::vector<std::size_t> order(train_ds.windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> batch;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.assign(order.begin() + start, order.begin() + stop);
      const FeatureMap<S> x = batch_input<S>(train_ds.windows, batch);
      const std::array<Mat<S>, 3> t = batch_targets<S>(train_ds.windows, batch);
      const std::array<Mat<S>, 3> p = net.forward(x, true);
      LossGrad<S> lg = fused_loss<S>(p, t, cfg.w_y, cfg.w_z);
      require(std::isfinite(lg.loss), ErrorCode::diverged,
              "training diverged at epoch " + std::to_string(epoch));
      loss_sum += lg.loss * static_cast<double>(batch.size());
      net.backward(lg.grad);
      adam.step();
    }
    const EvalStats val = evaluate<S>(net, val_ds, cfg);
    require(std::isfinite(val.loss), ErrorCode::diverged,
            "validation loss diverged at epoch " + std::to_string(epoch));
    EpochRow row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(order.size());
    row.val_loss = val.loss;
    row.val_rmse_x = val.rmse[0];
    row.val_rmse_y = val.rmse[1];
    row.val_rmse_z = val.rmse[2];
    out.history.rows.push_back(row);
    if (val.loss < out.best_val_loss) {
      out.best_val_loss = val.loss;
      out.best_epoch = epoch;
      best.clear();
      for (const ParamRef<S>& p : tracked) best.push_back(*p.value);
    }
    if (log)
      (*log) << "epoch " << epoch << "/" << cfg.epochs << " train " << row.train_loss << " val "
             << row.val_loss << "\n";
  }
  if (!best.empty())
    for (std::size_t i = 0; i < tracked.size(); ++i) *tracked[i].value = best[i];
  return out;
}

}  // namespace gait::nn
