#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "gaittrack/training.hpp"
#include "test_util.hpp"

using namespace gait;
using namespace gait::nn;
using testutil::expect_error;
using testutil::random_mat;

namespace {

std::array<Mat<double>, 3> random_triple(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::array<Mat<double>, 3> out;
  for (auto& m : out) m = random_mat(rows, cols, rng);
  return out;
}

// Windows sized for a narrow conv5 network so training tests stay fast.
Dataset toy_dataset(int n, Eigen::Index in_cols, const Eigen::Vector3d& level, Rng& rng,
                    SplitKind kind) {
  Dataset ds;
  ds.split = kind;
  for (int i = 0; i < n; ++i) {
    Window w;
    w.x = Eigen::MatrixXd::Zero(6, in_cols);
    for (Eigen::Index j = 0; j < w.x.size(); ++j) w.x(j % 6, j / 6) = rng.normal();
    w.y = Eigen::MatrixXd::Zero(3, 29);
    for (int a = 0; a < 3; ++a) w.y.row(a).setConstant(level(a));
    w.subject_id = "s01";
    w.step_index = i;
    ds.windows.push_back(std::move(w));
  }
  return ds;
}

ModelConfig toy_model(std::uint64_t seed) {
  ModelConfig cfg;
  cfg.depth = ModelConfig::Depth::conv5;
  cfg.scale = {1, 16};
  cfg.in_cols = 32;
  cfg.dropout = 0.0;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("fused loss matches a brute-force recomputation") {
  Rng rng(41);
  const auto preds = random_triple(29, 4, rng);
  const auto targets = random_triple(29, 4, rng);
  const LossGrad<double> lg = fused_loss<double>(preds, targets, 10.0, 7.0);

  double expected = 0.0;
  const double weights[3] = {1.0, 10.0, 7.0};
  for (int a = 0; a < 3; ++a) {
    double sq = 0.0;
    for (Eigen::Index j = 0; j < 4; ++j)
      for (Eigen::Index i = 0; i < 29; ++i) {
        const double d = preds[a](i, j) - targets[a](i, j);
        sq += d * d;
      }
    const double rmse = std::sqrt(sq / (29.0 * 4.0));
    CHECK(lg.rmse[a] == doctest::Approx(rmse).epsilon(1e-12));
    expected += weights[a] * rmse;
  }
  CHECK(lg.loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fused loss is zero exactly when all axes agree") {
  Rng rng(42);
  const auto targets = random_triple(29, 3, rng);
  const LossGrad<double> zero = fused_loss<double>(targets, targets, 10.0, 10.0);
  CHECK(zero.loss == 0.0);
  for (const auto& g : zero.grad) CHECK(g.cwiseAbs().maxCoeff() == 0.0);

  auto bumped = targets;
  bumped[2](0, 0) += 1e-6;
  CHECK(fused_loss<double>(bumped, targets, 10.0, 10.0).loss > 0.0);
}

TEST_CASE("a constant lateral residual costs its weight times the offset") {
  Rng rng(43);
  const auto targets = random_triple(29, 5, rng);
  auto preds = targets;
  preds[1].array() += 0.37;  // Y only
  const LossGrad<double> lg = fused_loss<double>(preds, targets, 10.0, 10.0);
  CHECK(lg.loss == doctest::Approx(10.0 * 0.37).epsilon(1e-12));
  CHECK(lg.rmse[0] == 0.0);
  CHECK(lg.rmse[2] == 0.0);
}

TEST_CASE("loss gradient matches central finite differences") {
  Rng rng(44);
  auto preds = random_triple(5, 3, rng);
  const auto targets = random_triple(5, 3, rng);
  const LossGrad<double> lg = fused_loss<double>(preds, targets, 10.0, 10.0);
  const double h = 1e-7;
  for (int a = 0; a < 3; ++a)
    for (Eigen::Index j = 0; j < 3; ++j)
      for (Eigen::Index i = 0; i < 5; ++i) {
        const double orig = preds[a](i, j);
        preds[a](i, j) = orig + h;
        const double up = fused_loss<double>(preds, targets, 10.0, 10.0).loss;
        preds[a](i, j) = orig - h;
        const double down = fused_loss<double>(preds, targets, 10.0, 10.0).loss;
        preds[a](i, j) = orig;
        const double numeric = (up - down) / (2.0 * h);
        CHECK(lg.grad[a](i, j) == doctest::Approx(numeric).epsilon(1e-6));
      }
}

TEST_CASE("adam follows the bias-corrected update rule") {
  Mat<double> value = Mat<double>::Zero(2, 1);
  Mat<double> grad = Mat<double>::Zero(2, 1);
  TrainConfig cfg;
  cfg.lr = 0.1;

  Adam<double> adam({{"p", &value, &grad}}, cfg);
  const double grads[5][2] = {{1.0, -2.0}, {-0.5, 0.3}, {2.0, 1.1}, {0.0, -0.7}, {1.5, 0.2}};

  // Plain transcription of the update rule, kept separate from the class.
  Eigen::Vector2d theta = Eigen::Vector2d::Zero(), m = Eigen::Vector2d::Zero(),
                  v = Eigen::Vector2d::Zero();
  for (int t = 1; t <= 5; ++t) {
    grad(0, 0) = grads[t - 1][0];
    grad(1, 0) = grads[t - 1][1];
    adam.step();
    for (int i = 0; i < 2; ++i) {
      const double g = grads[t - 1][i];
      m(i) = 0.9 * m(i) + 0.1 * g;
      v(i) = 0.999 * v(i) + 0.001 * g * g;
      const double mhat = m(i) / (1.0 - std::pow(0.9, t));
      const double vhat = v(i) / (1.0 - std::pow(0.999, t));
      theta(i) -= 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
      CHECK(value(i, 0) == doctest::Approx(theta(i)).epsilon(1e-12));
    }
  }
  CHECK(adam.steps_taken() == 5);
}

TEST_CASE("batch assembly lays windows out row by row") {
  std::vector<Window> windows(2);
  for (int k = 0; k < 2; ++k) {
    windows[k].x = Eigen::MatrixXd::Zero(6, 10);
    for (Eigen::Index h = 0; h < 6; ++h)
      for (Eigen::Index w = 0; w < 10; ++w) windows[k].x(h, w) = 1000.0 * k + 100.0 * double(h) + double(w);
    windows[k].y = Eigen::MatrixXd::Zero(3, 4);
    for (int a = 0; a < 3; ++a)
      for (Eigen::Index l = 0; l < 4; ++l) windows[k].y(a, l) = 10.0 * k + 3.0 * a + double(l);
  }
  const std::vector<std::size_t> idx{0, 1};
  const FeatureMap<double> m = batch_input<double>(windows, idx);
  CHECK(m.channels() == 1);
  CHECK(m.batch == 2);
  CHECK(m.height == 6);
  CHECK(m.width == 10);
  for (Eigen::Index b = 0; b < 2; ++b)
    for (Eigen::Index h = 0; h < 6; ++h)
      for (Eigen::Index w = 0; w < 10; ++w)
        CHECK(m.at(0, b, h, w) == windows[std::size_t(b)].x(h, w));

  const std::array<Mat<double>, 3> t = batch_targets<double>(windows, idx);
  for (int a = 0; a < 3; ++a)
    for (Eigen::Index b = 0; b < 2; ++b)
      for (Eigen::Index l = 0; l < 4; ++l)
        CHECK(t[std::size_t(a)](l, b) == windows[std::size_t(b)].y(a, l));

  expect_error(ErrorCode::empty_windows, [&] { batch_input<double>(windows, {}); });
}

TEST_CASE("training fits a learnable constant and logs one row per epoch") {
  Rng rng(45);
  const Eigen::Vector3d level(0.8, -0.3, 0.5);
  const Dataset train_ds = toy_dataset(30, 32, level, rng, SplitKind::train);
  const Dataset val_ds = toy_dataset(6, 32, level, rng, SplitKind::val);

  Network<double> net(toy_model(46));
  TrainConfig cfg;
  cfg.epochs = 25;
  cfg.batch_size = 10;
  cfg.lr = 0.01;
  cfg.seed = 47;
  const TrainSummary summary = train(net, train_ds, val_ds, cfg);

  REQUIRE(summary.history.rows.size() == 25);
  CHECK(summary.history.rows.front().epoch == 1);
  CHECK(summary.history.rows.back().epoch == 25);
  CHECK(summary.best_epoch >= 1);
  CHECK(summary.best_epoch <= 25);
  double min_val = summary.history.rows.front().val_loss;
  for (const EpochRow& row : summary.history.rows) min_val = std::min(min_val, row.val_loss);
  CHECK(summary.best_val_loss == doctest::Approx(min_val).epsilon(1e-15));
  CHECK(summary.history.rows.back().train_loss <
        0.5 * summary.history.rows.front().train_loss);

  // The returned weights are the best-validation snapshot, running stats included.
  const EvalStats stats = evaluate<double>(net, val_ds, cfg);
  CHECK(stats.loss == doctest::Approx(summary.best_val_loss).epsilon(1e-12));

  const std::string csv = summary.history.csv();
  CHECK(csv.rfind("epoch,train_loss,val_loss", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 26);  // header + one line per epoch
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
  Rng rng(48);
  const Eigen::Vector3d level(0.1, 0.2, -0.4);
  const Dataset train_ds = toy_dataset(20, 32, level, rng, SplitKind::train);
  const Dataset val_ds = toy_dataset(4, 32, level, rng, SplitKind::val);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 8;
  cfg.seed = 49;

  Network<double> a(toy_model(50)), b(toy_model(50));
  const TrainSummary sa = train(a, train_ds, val_ds, cfg);
  const TrainSummary sb = train(b, train_ds, val_ds, cfg);

  REQUIRE(sa.history.rows.size() == sb.history.rows.size());
  for (std::size_t i = 0; i < sa.history.rows.size(); ++i) {
    CHECK(sa.history.rows[i].train_loss == sb.history.rows[i].train_loss);
    CHECK(sa.history.rows[i].val_loss == sb.history.rows[i].val_loss);
  }
  auto pa = a.params(), pb = b.params();
  for (std::size_t i = 0; i < pa.size(); ++i)
    CHECK((pa[i].value->array() == pb[i].value->array()).all());

  Network<double> c(toy_model(50));
  TrainConfig other = cfg;
  other.seed = 51;
  const TrainSummary sc = train(c, train_ds, val_ds, other);
  CHECK(sc.history.rows.back().train_loss != sa.history.rows.back().train_loss);
}

TEST_CASE("an absurd learning rate raises the divergence error") {
  Rng rng(52);
  const Eigen::Vector3d level(0.0, 0.0, 0.0);
  const Dataset train_ds = toy_dataset(12, 32, level, rng, SplitKind::train);
  const Dataset val_ds = toy_dataset(3, 32, level, rng, SplitKind::val);
  Network<double> net(toy_model(53));
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.batch_size = 6;
  cfg.lr = 1e30;
  cfg.seed = 54;
  expect_error(ErrorCode::diverged, [&] { train(net, train_ds, val_ds, cfg); });
}

TEST_CASE("whole-dataset metrics do not depend on the batch size") {
  Rng rng(55);
  const Eigen::Vector3d level(0.3, 0.1, -0.2);
  const Dataset ds = toy_dataset(17, 32, level, rng, SplitKind::test);
  Network<double> net(toy_model(56));

  TrainConfig small, large;
  small.batch_size = 5;
  large.batch_size = 100;
  const EvalStats a = evaluate<double>(net, ds, small);
  const EvalStats b = evaluate<double>(net, ds, large);
  CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-12));
  for (int axis = 0; axis < 3; ++axis)
    CHECK(a.rmse[axis] == doctest::Approx(b.rmse[axis]).epsilon(1e-12));
}

TEST_CASE("train config text round-trips and rejects nonsense") {
  TrainConfig cfg;
  cfg.epochs = 123;
  cfg.batch_size = 7;
  cfg.lr = 0.25;
  cfg.beta1 = 0.8;
  cfg.beta2 = 0.9;
  cfg.eps = 1e-9;
  cfg.w_y = 4.0;
  cfg.w_z = 2.5;
  cfg.seed = 77;
  const TrainConfig back = train_config_from_text(train_config_text(cfg));
  CHECK(back.epochs == 123);
  CHECK(back.batch_size == 7);
  CHECK(back.lr == 0.25);
  CHECK(back.beta1 == 0.8);
  CHECK(back.beta2 == 0.9);
  CHECK(back.eps == 1e-9);
  CHECK(back.w_y == 4.0);
  CHECK(back.w_z == 2.5);
  CHECK(back.seed == 77);

  TrainConfig bad;
  bad.epochs = 0;
  expect_error(ErrorCode::invalid_config, [&] { validate_train_config(bad); });
  bad = TrainConfig{};
  bad.lr = -1.0;
  expect_error(ErrorCode::invalid_config, [&] { validate_train_config(bad); });
  bad = TrainConfig{};
  bad.batch_size = 0;
  expect_error(ErrorCode::invalid_config, [&] { validate_train_config(bad); });
}
