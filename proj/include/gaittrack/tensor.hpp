#pragma once

#include <Eigen/Dense>
#include <algorithm>

#include "gaittrack/errors.hpp"

namespace gait::nn {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Batched feature maps: one row per channel, one column per (batch, cell).
// Column order is batch-major, then row-major over the HxW grid, so a batch
// element occupies a contiguous block of height*width columns.
template <class S>
struct FeatureMap {
  Mat<S> data;  // channels x (batch * height * width)
  Eigen::Index batch = 0, height = 0, width = 0;

  Eigen::Index channels() const { return data.rows(); }
  Eigen::Index spatial() const { return height * width; }
  Eigen::Index col(Eigen::Index b, Eigen::Index h, Eigen::Index w) const {
    return (b * height + h) * width + w;
  }
  S& at(Eigen::Index c, Eigen::Index b, Eigen::Index h, Eigen::Index w) {
    return data(c, col(b, h, w));
  }
  S at(Eigen::Index c, Eigen::Index b, Eigen::Index h, Eigen::Index w) const {
    return data(c, col(b, h, w));
  }

  static FeatureMap zeros(Eigen::Index channels, Eigen::Index batch, Eigen::Index height,
                          Eigen::Index width) {
    FeatureMap m;
    m.batch = batch;
    m.height = height;
    m.width = width;
    m.data = Mat<S>::Zero(channels, batch * height * width);
    return m;
  }
};

// Gathers 3x3 zero-padded patches: row (di*3 + dj)*C + c holds the input
// shifted by (di-1, dj-1), so a convolution is one matrix product against it.
template <class S>
Mat<S> im2col_3x3(const FeatureMap<S>& x) {
  const Eigen::Index C = x.channels(), B = x.batch, H = x.height, W = x.width;
  Mat<S> cols = Mat<S>::Zero(C * 9, B * H * W);
  for (Eigen::Index di = 0; di < 3; ++di) {
    for (Eigen::Index dj = 0; dj < 3; ++dj) {
      const Eigen::Index q = di * 3 + dj;
      const Eigen::Index wlo = std::max<Eigen::Index>(0, 1 - dj);
      const Eigen::Index whi = std::min<Eigen::Index>(W, W + 1 - dj);
      if (whi <= wlo) continue;
      for (Eigen::Index b = 0; b < B; ++b) {
        for (Eigen::Index h = 0; h < H; ++h) {
          const Eigen::Index h2 = h + di - 1;
          if (h2 < 0 || h2 >= H) continue;
          cols.block(q * C, (b * H + h) * W + wlo, C, whi - wlo) =
              x.data.block(0, (b * H + h2) * W + wlo + (dj - 1), C, whi - wlo);
        }
      }
    }
  }
  return cols;
}

// Adjoint of im2col_3x3: scatter-adds patch gradients back onto the grid.
template <class S>
FeatureMap<S> col2im_3x3(const Mat<S>& cols, Eigen::Index channels, Eigen::Index batch,
                         Eigen::Index height, Eigen::Index width) {
  require(cols.rows() == channels * 9 && cols.cols() == batch * height * width,
          ErrorCode::shape_mismatch, "col2im: patch matrix does not match grid");
  FeatureMap<S> g = FeatureMap<S>::zeros(channels, batch, height, width);
  const Eigen::Index C = channels, B = batch, H = height, W = width;
  for (Eigen::Index di = 0; di < 3; ++di) {
    for (Eigen::Index dj = 0; dj < 3; ++dj) {
      const Eigen::Index q = di * 3 + dj;
      const Eigen::Index wlo = std::max<Eigen::Index>(0, 1 - dj);
      const Eigen::Index whi = std::min<Eigen::Index>(W, W + 1 - dj);
      if (whi <= wlo) continue;
      for (Eigen::Index b = 0; b < B; ++b) {
        for (Eigen::Index h = 0; h < H; ++h) {
          const Eigen::Index h2 = h + di - 1;
          if (h2 < 0 || h2 >= H) continue;
          g.data.block(0, (b * H + h2) * W + wlo + (dj - 1), C, whi - wlo) +=
              cols.block(q * C, (b * H + h) * W + wlo, C, whi - wlo);
        }
      }
    }
  }
  return g;
}

struct PoolCache {
  Eigen::Index batch = 0, height = 0, width_in = 0;
  Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> argmax;  // input column per output
};

// 1x2 max pooling along the time axis; an odd trailing column is dropped and
// ties keep the earlier sample.
template <class S>
FeatureMap<S> maxpool_time(const FeatureMap<S>& x, PoolCache& cache) {
  const Eigen::Index C = x.channels(), B = x.batch, H = x.height, W = x.width;
  require(W >= 2, ErrorCode::shape_mismatch, "maxpool: need at least two time columns");
  const Eigen::Index W2 = W / 2;
  FeatureMap<S> y = FeatureMap<S>::zeros(C, B, H, W2);
  cache.batch = B;
  cache.height = H;
  cache.width_in = W;
  cache.argmax.resize(C, B * H * W2);
  for (Eigen::Index b = 0; b < B; ++b) {
    for (Eigen::Index h = 0; h < H; ++h) {
      for (Eigen::Index w = 0; w < W2; ++w) {
        const Eigen::Index i0 = (b * H + h) * W + 2 * w;
        const Eigen::Index j = (b * H + h) * W2 + w;
        for (Eigen::Index c = 0; c < C; ++c) {
          const S a = x.data(c, i0), d = x.data(c, i0 + 1);
          if (d > a) {
            y.data(c, j) = d;
            cache.argmax(c, j) = i0 + 1;
          } else {
            y.data(c, j) = a;
            cache.argmax(c, j) = i0;
          }
        }
      }
    }
  }
  return y;
}

template <class S>
FeatureMap<S> maxpool_time_backward(const FeatureMap<S>& grad_out, const PoolCache& cache) {
  const Eigen::Index C = grad_out.channels();
  require(cache.argmax.rows() == C && cache.argmax.cols() == grad_out.data.cols(),
          ErrorCode::shape_mismatch, "maxpool backward: cache does not match gradient");
  FeatureMap<S> g = FeatureMap<S>::zeros(C, cache.batch, cache.height, cache.width_in);
  for (Eigen::Index j = 0; j < grad_out.data.cols(); ++j)
    for (Eigen::Index c = 0; c < C; ++c) g.data(c, cache.argmax(c, j)) += grad_out.data(c, j);
  return g;
}

template <class S>
Mat<S> relu(const Mat<S>& x) {
  return x.cwiseMax(S(0));
}

template <class S>
Mat<S> relu_backward(const Mat<S>& grad, const Mat<S>& pre_activation) {
  return (grad.array() * (pre_activation.array() > S(0)).template cast<S>()).matrix();
}

// Feature map -> dense column per batch element; row index = c*H*W + h*W + w.
template <class S>
Mat<S> flatten(const FeatureMap<S>& x) {
  const Eigen::Index C = x.channels(), B = x.batch, HW = x.spatial();
  Mat<S> out(C * HW, B);
  for (Eigen::Index b = 0; b < B; ++b)
    for (Eigen::Index c = 0; c < C; ++c)
      out.col(b).segment(c * HW, HW) = x.data.row(c).segment(b * HW, HW).transpose();
  return out;
}

template <class S>
FeatureMap<S> unflatten(const Mat<S>& grad, Eigen::Index channels, Eigen::Index batch,
                        Eigen::Index height, Eigen::Index width) {
  const Eigen::Index HW = height * width;
  require(grad.rows() == channels * HW && grad.cols() == batch, ErrorCode::shape_mismatch,
          "unflatten: gradient does not match feature-map shape");
  FeatureMap<S> x = FeatureMap<S>::zeros(channels, batch, height, width);
  for (Eigen::Index b = 0; b < batch; ++b)
    for (Eigen::Index c = 0; c < channels; ++c)
      x.data.row(c).segment(b * HW, HW) = grad.col(b).segment(c * HW, HW).transpose();
  return x;
}

}  // namespace gait::nn
