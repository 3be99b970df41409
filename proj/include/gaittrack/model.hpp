#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gaittrack/layers.hpp"

namespace gait::nn {

// Width multiplier applied to every channel/feature count, as a rational so
// configs stay exact ("1/8"); results round to nearest and never drop below 1.
struct ChannelScale {
  int num = 1, den = 1;
};

Eigen::Index apply_scale(Eigen::Index width, ChannelScale scale);
ChannelScale scale_from_string(const std::string& text);
std::string to_string(ChannelScale scale);

struct ModelConfig {
  enum class Variant { fused, independent };
  enum class Depth { conv9, conv5 };
  enum class BnOrder { conv_relu_bn, conv_bn_relu };
  enum class Init { normal, he };

  Variant variant = Variant::fused;
  Depth depth = Depth::conv9;
  ChannelScale scale;
  int out_len = 29;        // predicted differences per axis
  double dropout = 0.5;
  Init init = Init::normal;
  double init_sigma = 0.01;
  BnOrder bn_order = BnOrder::conv_relu_bn;
  Eigen::Index in_rows = 6;    // sensor channels laid out as image rows
  Eigen::Index in_cols = 149;  // time axis
  std::uint64_t seed = 0;      // drives weight init and dropout masks
};

ModelConfig::Variant variant_from_string(const std::string& s);
ModelConfig::Depth depth_from_string(const std::string& s);
ModelConfig::BnOrder bn_order_from_string(const std::string& s);
ModelConfig::Init init_from_string(const std::string& s);
const char* to_string(ModelConfig::Variant v);
const char* to_string(ModelConfig::Depth d);
const char* to_string(ModelConfig::BnOrder o);
const char* to_string(ModelConfig::Init i);

// Scaled per-layer output channels and which layers are followed by pooling.
std::vector<Eigen::Index> conv_channels(const ModelConfig& cfg);
std::vector<bool> pool_flags(ModelConfig::Depth depth);
std::vector<Eigen::Index> dense_widths(const ModelConfig& cfg);

std::string config_text(const ModelConfig& cfg);
ModelConfig config_from_text(const std::string& text);

void validate_config(const ModelConfig& cfg);

// One named layer size, for parameter accounting reports.
struct LayerCount {
  std::string name;
  long long params = 0;
};

template <class S>
struct ConvBlock {
  ConvLayer<S> conv;
  BatchNormLayer<S> bn;
  bool pool = false;
  Mat<S> pre_act;  // input to the ReLU, kept for its backward pass
  PoolCache pool_cache;

  ConvBlock(Eigen::Index in_c, Eigen::Index out_c, bool pool_after)
      : conv(in_c, out_c), bn(out_c), pool(pool_after) {}
};

// Convolutional feature extractor plus the hidden dense stack (ReLU + dropout
// after each hidden dense layer). Output is the feature fed to linear heads.
template <class S>
class Trunk {
 public:
  Trunk(const ModelConfig& cfg) : order_(cfg.bn_order), in_rows_(cfg.in_rows), in_cols_(cfg.in_cols) {
    const std::vector<Eigen::Index> channels = conv_channels(cfg);
    const std::vector<bool> pools = pool_flags(cfg.depth);
    Eigen::Index c_in = 1;
    Eigen::Index w = cfg.in_cols;
    for (std::size_t i = 0; i < channels.size(); ++i) {
      blocks.emplace_back(c_in, channels[i], pools[i]);
      c_in = channels[i];
      if (pools[i]) w /= 2;
    }
    require(w >= 1, ErrorCode::invalid_params, "input too narrow for the pooling chain");
    feature_width_ = w;
    Eigen::Index features = c_in * cfg.in_rows * w;
    for (Eigen::Index width : dense_widths(cfg)) {
      dense.emplace_back(features, width);
      drops.emplace_back(cfg.dropout);
      features = width;
    }
    out_features_ = features;
  }

  Eigen::Index out_features() const { return out_features_; }
  Eigen::Index feature_width() const { return feature_width_; }

  Mat<S> forward(const FeatureMap<S>& x, bool train, Rng& drop_rng) {
    require(x.height == in_rows_ && x.width == in_cols_ && x.channels() == 1,
            ErrorCode::shape_mismatch, "trunk: unexpected input shape");
    FeatureMap<S> cur = x;
    for (ConvBlock<S>& blk : blocks) {
      FeatureMap<S> a = blk.conv.forward(cur);
      if (order_ == ModelConfig::BnOrder::conv_relu_bn) {
        blk.pre_act = a.data;
        a.data = relu(a.data);
        a = blk.bn.forward(a, train);
      } else {
        a = blk.bn.forward(a, train);
        blk.pre_act = a.data;
        a.data = relu(a.data);
      }
      if (blk.pool) a = maxpool_time(a, blk.pool_cache);
      cur = std::move(a);
    }
    flat_channels_ = cur.channels();
    flat_batch_ = cur.batch;
    Mat<S> f = flatten(cur);
    dense_pre_.resize(dense.size());
    for (std::size_t i = 0; i < dense.size(); ++i) {
      Mat<S> z = dense[i].forward(f);
      dense_pre_[i] = z;
      f = drops[i].forward(relu(z), train, drop_rng);
    }
    return f;
  }

  FeatureMap<S> backward(const Mat<S>& grad_feature) {
    Mat<S> g = grad_feature;
    for (std::size_t i = dense.size(); i-- > 0;) {
      g = drops[i].backward(g);
      g = relu_backward(g, dense_pre_[i]);
      g = dense[i].backward(g);
    }
    FeatureMap<S> gm = unflatten(g, flat_channels_, flat_batch_, in_rows_, feature_width_);
    for (std::size_t i = blocks.size(); i-- > 0;) {
      ConvBlock<S>& blk = blocks[i];
      if (blk.pool) gm = maxpool_time_backward(gm, blk.pool_cache);
      if (order_ == ModelConfig::BnOrder::conv_relu_bn) {
        gm = blk.bn.backward(gm);
        gm.data = relu_backward(gm.data, blk.pre_act);
        gm = blk.conv.backward(gm);
      } else {
        gm.data = relu_backward(gm.data, blk.pre_act);
        gm = blk.bn.backward(gm);
        gm = blk.conv.backward(gm);
      }
    }
    return gm;
  }

  void collect_params(const std::string& prefix, std::vector<ParamRef<S>>& out) {
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      blocks[i].conv.collect_params(prefix + ".conv" + std::to_string(i + 1), out);
      blocks[i].bn.collect_params(prefix + ".bn" + std::to_string(i + 1), out);
    }
    for (std::size_t i = 0; i < dense.size(); ++i)
      dense[i].collect_params(prefix + ".dense" + std::to_string(i + 1), out);
  }

  void collect_state(const std::string& prefix, std::vector<ParamRef<S>>& out) {
    for (std::size_t i = 0; i < blocks.size(); ++i)
      blocks[i].bn.collect_state(prefix + ".bn" + std::to_string(i + 1), out);
  }

  std::vector<ConvBlock<S>> blocks;
  std::vector<DenseLayer<S>> dense;
  std::vector<DropoutLayer<S>> drops;

 private:
  ModelConfig::BnOrder order_;
  Eigen::Index in_rows_, in_cols_;
  Eigen::Index feature_width_ = 0, out_features_ = 0;
  Eigen::Index flat_channels_ = 0, flat_batch_ = 0;
  std::vector<Mat<S>> dense_pre_;
};

inline const char* axis_name(int axis) {
  static const char* names[3] = {"x", "y", "z"};
  return names[axis];
}

// The regression network: either one shared trunk with three linear heads, or
// three independent trunks each with its own head. forward returns per-axis
// out_len x batch predictions.
template <class S>
class Network {
 public:
  explicit Network(const ModelConfig& cfg) : cfg_(cfg), drop_rng_(Rng(cfg.seed).split(2)) {
    validate_config(cfg);
    const int n_trunks = cfg.variant == ModelConfig::Variant::fused ? 1 : 3;
    for (int i = 0; i < n_trunks; ++i) trunks_.emplace_back(cfg);
    for (int a = 0; a < 3; ++a) {
      const Trunk<S>& t = trunks_[cfg.variant == ModelConfig::Variant::fused ? 0 : a];
      heads_.emplace_back(t.out_features(), cfg.out_len);
    }
    initialize();
  }

  const ModelConfig& config() const { return cfg_; }

  std::array<Mat<S>, 3> forward(const FeatureMap<S>& x, bool train) {
    std::array<Mat<S>, 3> preds;
    if (cfg_.variant == ModelConfig::Variant::fused) {
      Mat<S> f = trunks_[0].forward(x, train, drop_rng_);
      for (int a = 0; a < 3; ++a) preds[a] = heads_[a].forward(f);
    } else {
      for (int a = 0; a < 3; ++a)
        preds[a] = heads_[a].forward(trunks_[a].forward(x, train, drop_rng_));
    }
    return preds;
  }

  FeatureMap<S> backward(const std::array<Mat<S>, 3>& grad_preds) {
    if (cfg_.variant == ModelConfig::Variant::fused) {
      Mat<S> g = heads_[0].backward(grad_preds[0]);
      g += heads_[1].backward(grad_preds[1]);
      g += heads_[2].backward(grad_preds[2]);
      return trunks_[0].backward(g);
    }
    FeatureMap<S> gx = trunks_[0].backward(heads_[0].backward(grad_preds[0]));
    for (int a = 1; a < 3; ++a)
      gx.data += trunks_[a].backward(heads_[a].backward(grad_preds[a])).data;
    return gx;
  }

  std::vector<ParamRef<S>> params() {
    std::vector<ParamRef<S>> out;
    if (cfg_.variant == ModelConfig::Variant::fused) {
      trunks_[0].collect_params("trunk", out);
      for (int a = 0; a < 3; ++a) heads_[a].collect_params(std::string("head_") + axis_name(a), out);
    } else {
      for (int a = 0; a < 3; ++a) {
        const std::string net = std::string("net_") + axis_name(a);
        trunks_[a].collect_params(net + ".trunk", out);
        heads_[a].collect_params(net + ".head", out);
      }
    }
    return out;
  }

  std::vector<ParamRef<S>> state() {
    std::vector<ParamRef<S>> out;
    if (cfg_.variant == ModelConfig::Variant::fused) {
      trunks_[0].collect_state("trunk", out);
    } else {
      for (int a = 0; a < 3; ++a)
        trunks_[a].collect_state(std::string("net_") + axis_name(a) + ".trunk", out);
    }
    return out;
  }

  long long param_count() {
    long long n = 0;
    for (const ParamRef<S>& p : params()) n += p.value->size();
    return n;
  }

  std::vector<LayerCount> layer_counts() {
    std::vector<LayerCount> out;
    for (const ParamRef<S>& p : params()) {
      const std::string layer = p.name.substr(0, p.name.rfind('.'));
      if (!out.empty() && out.back().name == layer)
        out.back().params += p.value->size();
      else
        out.push_back({layer, static_cast<long long>(p.value->size())});
    }
    return out;
  }

  std::vector<Trunk<S>>& trunks() { return trunks_; }
  std::vector<DenseLayer<S>>& heads() { return heads_; }

 private:
  void initialize() {
    Rng init_rng = Rng(cfg_.seed).split(1);
    for (ParamRef<S>& p : params()) {
      const bool is_weight = p.name.size() >= 7 && p.name.rfind(".weight") == p.name.size() - 7;
      if (!is_weight) continue;  // biases and beta start at zero, gamma at one
      double sigma = cfg_.init_sigma;
      if (cfg_.init == ModelConfig::Init::he)
        sigma = std::sqrt(2.0 / static_cast<double>(p.value->cols()));
      for (Eigen::Index c = 0; c < p.value->cols(); ++c)
        for (Eigen::Index r = 0; r < p.value->rows(); ++r)
          (*p.value)(r, c) = static_cast<S>(init_rng.normal(0.0, sigma));
    }
  }

  ModelConfig cfg_;
  std::vector<Trunk<S>> trunks_;
  std::vector<DenseLayer<S>> heads_;
  Rng drop_rng_;
};

// Checkpoint directory: config.txt plus weights.bin (named tensor stream).
template <class S>
void save_checkpoint(const std::string& dir, Network<S>& net);
template <class S>
Network<S> load_checkpoint(const std::string& dir);

}  // namespace gait::nn
