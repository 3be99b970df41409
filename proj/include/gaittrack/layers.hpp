#pragma once

#include <string>
#include <vector>

#include "gaittrack/rng.hpp"
#include "gaittrack/tensor.hpp"

namespace gait::nn {

// Named view of one trainable (or stateful) tensor inside a network.
template <class S>
struct ParamRef {
  std::string name;
  Mat<S>* value = nullptr;
  Mat<S>* grad = nullptr;  // null for non-trainable state (running statistics)
};

// 3x3 convolution, stride 1, zero padding, square output. Weights are stored
// as one C_out x (C_in*9) matrix so forward/backward are single products
// against the im2col patch matrix; w(o, c, di, dj) indexes it kernel-first.
template <class S>
class ConvLayer {
 public:
  ConvLayer(Eigen::Index in_channels, Eigen::Index out_channels)
      : weight(Mat<S>::Zero(out_channels, in_channels * 9)),
        bias(Mat<S>::Zero(out_channels, 1)),
        grad_weight(Mat<S>::Zero(out_channels, in_channels * 9)),
        grad_bias(Mat<S>::Zero(out_channels, 1)),
        in_channels_(in_channels) {}

  Eigen::Index in_channels() const { return in_channels_; }
  Eigen::Index out_channels() const { return weight.rows(); }

  S& w(Eigen::Index o, Eigen::Index c, Eigen::Index di, Eigen::Index dj) {
    return weight(o, (di * 3 + dj) * in_channels_ + c);
  }
  S w(Eigen::Index o, Eigen::Index c, Eigen::Index di, Eigen::Index dj) const {
    return weight(o, (di * 3 + dj) * in_channels_ + c);
  }

  FeatureMap<S> forward(const FeatureMap<S>& x) {
    require(x.channels() == in_channels_, ErrorCode::shape_mismatch,
            "conv: input has " + std::to_string(x.channels()) + " channels, layer expects " +
                std::to_string(in_channels_));
    batch_ = x.batch;
    height_ = x.height;
    width_ = x.width;
    cols_ = im2col_3x3(x);
    FeatureMap<S> y;
    y.batch = x.batch;
    y.height = x.height;
    y.width = x.width;
    y.data.noalias() = weight * cols_;
    y.data.colwise() += bias.col(0);
    return y;
  }

  FeatureMap<S> backward(const FeatureMap<S>& grad_out) {
    require(grad_out.data.rows() == out_channels() && grad_out.data.cols() == cols_.cols(),
            ErrorCode::shape_mismatch, "conv backward: gradient does not match forward pass");
    grad_bias = grad_out.data.rowwise().sum();
    grad_weight.noalias() = grad_out.data * cols_.transpose();
    Mat<S> grad_cols;
    grad_cols.noalias() = weight.transpose() * grad_out.data;
    return col2im_3x3(grad_cols, in_channels_, batch_, height_, width_);
  }

  void release_cache() { cols_.resize(0, 0); }

  void collect_params(const std::string& prefix, std::vector<ParamRef<S>>& out) {
    out.push_back({prefix + ".weight", &weight, &grad_weight});
    out.push_back({prefix + ".bias", &bias, &grad_bias});
  }

  Mat<S> weight, bias, grad_weight, grad_bias;

 private:
  Eigen::Index in_channels_ = 0;
  Eigen::Index batch_ = 0, height_ = 0, width_ = 0;
  Mat<S> cols_;
};

// Per-channel batch normalization over all batch and grid positions. Batch
// statistics use the population variance; running statistics follow the same
// convention with momentum 0.1.
template <class S>
class BatchNormLayer {
 public:
  explicit BatchNormLayer(Eigen::Index channels)
      : gamma(Mat<S>::Ones(channels, 1)),
        beta(Mat<S>::Zero(channels, 1)),
        grad_gamma(Mat<S>::Zero(channels, 1)),
        grad_beta(Mat<S>::Zero(channels, 1)),
        running_mean(Mat<S>::Zero(channels, 1)),
        running_var(Mat<S>::Ones(channels, 1)) {}

  Eigen::Index channels() const { return gamma.rows(); }

  FeatureMap<S> forward(const FeatureMap<S>& x, bool train) {
    require(x.channels() == channels(), ErrorCode::shape_mismatch,
            "batchnorm: channel count mismatch");
    FeatureMap<S> y = x;
    if (train) {
      const S n = static_cast<S>(x.data.cols());
      require(n > 0, ErrorCode::shape_mismatch, "batchnorm: empty batch");
      Vec<S> mean = x.data.rowwise().mean();
      Mat<S> centered = x.data.colwise() - mean;
      Vec<S> var = centered.array().square().rowwise().mean();
      inv_std_ = (var.array() + S(kEps)).sqrt().inverse();
      xhat_ = centered.array().colwise() * inv_std_.array();
      y.data = (xhat_.array().colwise() * gamma.col(0).array()).colwise() + beta.col(0).array();
      running_mean.col(0) = (S(1) - S(kMomentum)) * running_mean.col(0) + S(kMomentum) * mean;
      running_var.col(0) = (S(1) - S(kMomentum)) * running_var.col(0) + S(kMomentum) * var;
      trained_pass_ = true;
    } else {
      Vec<S> scale = (running_var.col(0).array() + S(kEps)).sqrt().inverse();
      Mat<S> centered = x.data.colwise() - running_mean.col(0);
      Mat<S> xhat = centered.array().colwise() * scale.array();
      y.data = (xhat.array().colwise() * gamma.col(0).array()).colwise() + beta.col(0).array();
    }
    return y;
  }

  FeatureMap<S> backward(const FeatureMap<S>& grad_out) {
    require(trained_pass_, ErrorCode::invalid_params,
            "batchnorm backward: no training-mode forward pass cached");
    require(grad_out.data.rows() == channels() && grad_out.data.cols() == xhat_.cols(),
            ErrorCode::shape_mismatch, "batchnorm backward: gradient shape mismatch");
    const S n = static_cast<S>(xhat_.cols());
    grad_beta.col(0) = grad_out.data.rowwise().sum();
    grad_gamma.col(0) = (grad_out.data.array() * xhat_.array()).rowwise().sum();
    // dX = gamma/std * (dY - mean(dY) - xhat * mean(dY .* xhat)), means per channel.
    Vec<S> mean_dy = grad_beta.col(0) / n;
    Vec<S> mean_dy_xhat = grad_gamma.col(0) / n;
    FeatureMap<S> g = grad_out;
    g.data = (((grad_out.data.colwise() - mean_dy).array() -
               xhat_.array().colwise() * mean_dy_xhat.array())
                  .colwise() *
              (gamma.col(0).array() * inv_std_.array()))
                 .matrix();
    return g;
  }

  void release_cache() {
    xhat_.resize(0, 0);
    trained_pass_ = false;
  }

  void collect_params(const std::string& prefix, std::vector<ParamRef<S>>& out) {
    out.push_back({prefix + ".gamma", &gamma, &grad_gamma});
    out.push_back({prefix + ".beta", &beta, &grad_beta});
  }

  void collect_state(const std::string& prefix, std::vector<ParamRef<S>>& out) {
    out.push_back({prefix + ".running_mean", &running_mean, nullptr});
    out.push_back({prefix + ".running_var", &running_var, nullptr});
  }

  static constexpr double kMomentum = 0.1;
  static constexpr double kEps = 1e-5;

  Mat<S> gamma, beta, grad_gamma, grad_beta;
  Mat<S> running_mean, running_var;

 private:
  Mat<S> xhat_;
  Vec<S> inv_std_;
  bool trained_pass_ = false;
};

// Fully connected layer on column-vector batches: y = W x + b.
template <class S>
class DenseLayer {
 public:
  DenseLayer(Eigen::Index in_features, Eigen::Index out_features)
      : weight(Mat<S>::Zero(out_features, in_features)),
        bias(Mat<S>::Zero(out_features, 1)),
        grad_weight(Mat<S>::Zero(out_features, in_features)),
        grad_bias(Mat<S>::Zero(out_features, 1)) {}

  Eigen::Index in_features() const { return weight.cols(); }
  Eigen::Index out_features() const { return weight.rows(); }

  Mat<S> forward(const Mat<S>& x) {
    require(x.rows() == in_features(), ErrorCode::shape_mismatch,
            "dense: input has " + std::to_string(x.rows()) + " features, layer expects " +
                std::to_string(in_features()));
    input_ = x;
    Mat<S> y;
    y.noalias() = weight * x;
    y.colwise() += bias.col(0);
    return y;
  }

  Mat<S> backward(const Mat<S>& grad_out) {
    require(grad_out.rows() == out_features() && grad_out.cols() == input_.cols(),
            ErrorCode::shape_mismatch, "dense backward: gradient does not match forward pass");
    grad_bias = grad_out.rowwise().sum();
    grad_weight.noalias() = grad_out * input_.transpose();
    Mat<S> grad_in;
    grad_in.noalias() = weight.transpose() * grad_out;
    return grad_in;
  }

  void release_cache() { input_.resize(0, 0); }

  void collect_params(const std::string& prefix, std::vector<ParamRef<S>>& out) {
    out.push_back({prefix + ".weight", &weight, &grad_weight});
    out.push_back({prefix + ".bias", &bias, &grad_bias});
  }

  Mat<S> weight, bias, grad_weight, grad_bias;

 private:
  Mat<S> input_;
};

// Inverted dropout: training scales kept units by 1/(1-p) so inference is the
// identity. Mask entries are drawn column-major from the supplied generator.
template <class S>
class DropoutLayer {
 public:
  explicit DropoutLayer(double p) : p_(p) {
    require(p >= 0.0 && p < 1.0, ErrorCode::invalid_params, "dropout rate must be in [0, 1)");
  }

  double rate() const { return p_; }

  Mat<S> forward(const Mat<S>& x, bool train, Rng& rng) {
    train_ = train;
    if (!train || p_ == 0.0) return x;
    const S keep_scale = S(1.0 / (1.0 - p_));
    mask_.resize(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      for (Eigen::Index r = 0; r < x.rows(); ++r)
        mask_(r, c) = rng.uniform() < p_ ? S(0) : keep_scale;
    return x.cwiseProduct(mask_);
  }

  Mat<S> backward(const Mat<S>& grad_out) {
    if (!train_ || p_ == 0.0) return grad_out;
    require(grad_out.rows() == mask_.rows() && grad_out.cols() == mask_.cols(),
            ErrorCode::shape_mismatch, "dropout backward: gradient does not match mask");
    return grad_out.cwiseProduct(mask_);
  }

  const Mat<S>& mask() const { return mask_; }

 private:
  double p_;
  bool train_ = false;
  Mat<S> mask_;
};

}  // namespace gait::nn
