#include <doctest.h>

#include "gaittrack/rng.hpp"
#include "gaittrack/tensor.hpp"
#include "test_util.hpp"

using namespace gait;
using namespace gait::nn;
using testutil::exact_equal;
using testutil::random_map;
using testutil::random_mat;

namespace {

// Reads the zero-padded input directly; the reference im2col is this lookup.
double padded_at(const FeatureMap<double>& x, Eigen::Index c, Eigen::Index b, Eigen::Index h,
                 Eigen::Index w) {
  if (h < 0 || h >= x.height || w < 0 || w >= x.width) return 0.0;
  return x.at(c, b, h, w);
}

}  // namespace

TEST_CASE("im2col gathers 3x3 zero-padded patches") {
  FeatureMap<double> x = FeatureMap<double>::zeros(1, 1, 3, 3);
  for (Eigen::Index h = 0; h < 3; ++h)
    for (Eigen::Index w = 0; w < 3; ++w) x.at(0, 0, h, w) = double(h * 3 + w + 1);
  const Mat<double> cols = im2col_3x3(x);
  REQUIRE(cols.rows() == 9);
  REQUIRE(cols.cols() == 9);

  // Center cell sees the whole grid in kernel order.
  for (Eigen::Index q = 0; q < 9; ++q) CHECK(cols(q, x.col(0, 1, 1)) == double(q + 1));

  // Top-left cell: everything above and left of it is padding.
  const Eigen::Index corner = x.col(0, 0, 0);
  const double expected[9] = {0, 0, 0, 0, 1, 2, 0, 4, 5};
  for (Eigen::Index q = 0; q < 9; ++q) CHECK(cols(q, corner) == expected[q]);
}

TEST_CASE("im2col matches the padded lookup on a random map") {
  Rng rng(11);
  const FeatureMap<double> x = random_map(3, 2, 4, 5, rng);
  const Mat<double> cols = im2col_3x3(x);
  REQUIRE(cols.rows() == 3 * 9);
  REQUIRE(cols.cols() == x.data.cols());
  for (Eigen::Index di = 0; di < 3; ++di)
    for (Eigen::Index dj = 0; dj < 3; ++dj)
      for (Eigen::Index c = 0; c < 3; ++c)
        for (Eigen::Index b = 0; b < 2; ++b)
          for (Eigen::Index h = 0; h < 4; ++h)
            for (Eigen::Index w = 0; w < 5; ++w)
              CHECK(cols((di * 3 + dj) * 3 + c, x.col(b, h, w)) ==
                    padded_at(x, c, b, h + di - 1, w + dj - 1));
}

TEST_CASE("col2im is the adjoint of im2col") {
  Rng rng(12);
  const FeatureMap<double> x = random_map(3, 2, 4, 5, rng);
  const Mat<double> g = random_mat(3 * 9, 2 * 4 * 5, rng);
  const double forward_dot = (im2col_3x3(x).array() * g.array()).sum();
  const FeatureMap<double> back = col2im_3x3(g, 3, 2, 4, 5);
  const double adjoint_dot = (x.data.array() * back.data.array()).sum();
  CHECK(forward_dot == doctest::Approx(adjoint_dot).epsilon(1e-12));
}

TEST_CASE("maxpool halves the time axis and keeps the earlier sample on ties") {
  FeatureMap<double> x = FeatureMap<double>::zeros(1, 1, 1, 5);
  x.data << 3, 1, 2, 2, 9;
  PoolCache cache;
  const FeatureMap<double> y = maxpool_time(x, cache);
  REQUIRE(y.width == 2);  // the odd trailing column is dropped
  CHECK(y.data(0, 0) == 3);
  CHECK(y.data(0, 1) == 2);
  CHECK(cache.argmax(0, 0) == 0);
  CHECK(cache.argmax(0, 1) == 2);

  FeatureMap<double> grad = FeatureMap<double>::zeros(1, 1, 1, 2);
  grad.data << 10, 20;
  const FeatureMap<double> gx = maxpool_time_backward(grad, cache);
  Mat<double> expected(1, 5);
  expected << 10, 0, 20, 0, 0;
  CHECK(exact_equal(gx.data, expected));
}

TEST_CASE("maxpool picks the pairwise maximum everywhere") {
  Rng rng(13);
  const FeatureMap<double> x = random_map(4, 2, 3, 6, rng);
  PoolCache cache;
  const FeatureMap<double> y = maxpool_time(x, cache);
  REQUIRE(y.width == 3);
  for (Eigen::Index c = 0; c < 4; ++c)
    for (Eigen::Index b = 0; b < 2; ++b)
      for (Eigen::Index h = 0; h < 3; ++h)
        for (Eigen::Index w = 0; w < 3; ++w) {
          const double a = x.at(c, b, h, 2 * w), d = x.at(c, b, h, 2 * w + 1);
          CHECK(y.at(c, b, h, w) == std::max(a, d));
        }

  // Every routed gradient lands on the argmax; mass is conserved.
  const FeatureMap<double> grad = random_map(4, 2, 3, 3, rng);
  const FeatureMap<double> gx = maxpool_time_backward(grad, cache);
  CHECK(gx.data.sum() == doctest::Approx(grad.data.sum()).epsilon(1e-12));
  for (Eigen::Index j = 0; j < grad.data.cols(); ++j)
    for (Eigen::Index c = 0; c < 4; ++c) CHECK(gx.data(c, cache.argmax(c, j)) == grad.data(c, j));
}

TEST_CASE("relu clips negatives and gates the gradient on the pre-activation sign") {
  Mat<double> x(2, 3);
  x << -1.5, 0.0, 2.0, 3.0, -0.25, 1e-9;
  const Mat<double> y = relu(x);
  Mat<double> expected(2, 3);
  expected << 0, 0, 2.0, 3.0, 0, 1e-9;
  CHECK(exact_equal(y, expected));

  Mat<double> g(2, 3);
  g << 1, 2, 3, 4, 5, 6;
  const Mat<double> gx = relu_backward(g, x);
  Mat<double> expected_g(2, 3);
  expected_g << 0, 0, 3, 4, 0, 6;  // the exact zero passes nothing through
  CHECK(exact_equal(gx, expected_g));
}

TEST_CASE("flatten is channel-major per batch element and unflatten inverts it") {
  Rng rng(14);
  const FeatureMap<double> x = random_map(3, 2, 2, 4, rng);
  const Mat<double> flat = flatten(x);
  REQUIRE(flat.rows() == 3 * 2 * 4);
  REQUIRE(flat.cols() == 2);
  for (Eigen::Index c = 0; c < 3; ++c)
    for (Eigen::Index b = 0; b < 2; ++b)
      for (Eigen::Index h = 0; h < 2; ++h)
        for (Eigen::Index w = 0; w < 4; ++w)
          CHECK(flat(c * 8 + h * 4 + w, b) == x.at(c, b, h, w));

  const FeatureMap<double> back = unflatten(flat, 3, 2, 2, 4);
  CHECK(exact_equal(back.data, x.data));
}
