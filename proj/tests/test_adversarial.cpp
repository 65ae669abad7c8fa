#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "samrobust/adversarial.hpp"
#include "samrobust/datagen.hpp"
#include "samrobust/error.hpp"

using namespace samrobust;

namespace {

ModelParams linear_model(const Matrix& w, const Vector& b) {
  ModelParams m;
  m.layers.push_back(DenseLayer{w, b});
  return m;
}

double norm_of(const Eigen::RowVectorXd& v, Norm norm) {
  return norm == Norm::linf ? v.cwiseAbs().maxCoeff() : v.norm();
}

Dataset small_synthetic(std::uint64_t seed, int n = 400) {
  SyntheticSpec spec;
  spec.tp = TheoryParams{0.9, 0.3, 10};
  spec.n_train = n;
  spec.n_eval = 10;
  spec.seed = seed;
  return sample(spec).train;
}

// softplus(-margin), the two-class cross-entropy.
double two_class_loss(double margin) { return std::log1p(std::exp(-margin)); }

}  // namespace

TEST_CASE("linf projection clamps coordinates") {
  std::vector<double> adv = {0.2, -0.05};
  const std::vector<double> x = {0.0, 0.0};
  project(adv, x, Norm::linf, 0.1);
  CHECK(adv[0] == 0.1);
  CHECK(adv[1] == -0.05);
}

TEST_CASE("l2 projection rescales radially") {
  std::vector<double> adv = {3.0, 4.0};
  const std::vector<double> x = {0.0, 0.0};
  project(adv, x, Norm::l2, 1.0);
  CHECK(adv[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(adv[1] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("projection leaves points inside the ball bit-identical") {
  CounterRng rng(21, 0);
  for (Norm norm : {Norm::linf, Norm::l2}) {
    for (int t = 0; t < 100; ++t) {
      std::vector<double> x(6);
      std::vector<double> adv(6);
      for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] = rng.uniform(-1.0, 1.0);
        adv[j] = x[j] + rng.uniform(-0.03, 0.03);
      }
      const auto before = adv;
      project(adv, x, norm, 0.1);
      CHECK(adv == before);
    }
  }
}

TEST_CASE("projection respects the clip domain and frozen prefix") {
  std::vector<double> adv = {5.0, 1.3, -0.4};
  const std::vector<double> x = {0.5, 0.9, 0.1};
  project(adv, x, Norm::linf, 0.5, ClipDomain{0.0, 1.0}, 1);
  CHECK(adv[0] == 0.5);
  CHECK(adv[1] == 1.0);
  CHECK(adv[2] == 0.0);
}

TEST_CASE("degenerate attacks return the input exactly") {
  CounterRng rng(22, 0);
  const auto model = oracle::random_model({4, 6, 3}, Activation::relu, rng);
  const auto batch = oracle::random_batch(5, 4, 3, rng);
  CHECK(pgd_attack(model, batch, AttackConfig::pgd(Norm::linf, 0.3, 0), 1) == batch.inputs);
  CHECK(pgd_attack(model, batch, AttackConfig::pgd(Norm::l2, 0.0, 10), 1) == batch.inputs);

  // A model whose logits ignore the input has zero input gradient.
  const auto constant = linear_model(Matrix::Zero(2, 4), Vector::Zero(2));
  const auto b2 = oracle::random_batch(5, 4, 2, rng);
  CHECK(pgd_attack(constant, b2, AttackConfig::pgd(Norm::linf, 0.3, 10), 1) == b2.inputs);
}

TEST_CASE("10-step linf PGD attains the closed-form worst case on a linear model") {
  CounterRng rng(23, 0);
  for (int t = 0; t < 50; ++t) {
    Matrix w(2, 5);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-2.0, 2.0);
    Vector b(2);
    b << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
    const auto model = linear_model(w, b);
    const auto batch = oracle::random_batch(8, 5, 2, rng);
    const double eps = rng.uniform(0.01, 0.5);
    const Matrix adv = pgd_attack(model, batch, AttackConfig::pgd(Norm::linf, eps, 10), 3);
    const auto losses = per_sample_loss(model, adv, batch.labels);
    for (Eigen::Index i = 0; i < adv.rows(); ++i) {
      const int y = batch.labels[static_cast<std::size_t>(i)];
      const Eigen::RowVectorXd dir = w.row(y) - w.row(1 - y);
      const double margin = batch.inputs.row(i).dot(dir) + b(y) - b(1 - y);
      const double worst = two_class_loss(margin - eps * dir.cwiseAbs().sum());
      CHECK(std::abs(losses[static_cast<std::size_t>(i)] - worst) <= 1e-6);
    }
  }
}

TEST_CASE("PGD outputs stay feasible") {
  CounterRng rng(24, 0);
  for (int t = 0; t < 40; ++t) {
    const auto model = oracle::random_model({6, 10, 3}, Activation::relu, rng);
    const auto batch = oracle::random_batch(7, 6, 3, rng);
    auto cfg = AttackConfig::pgd(t % 2 ? Norm::l2 : Norm::linf, rng.uniform(0.0, 1.0), 1 + t % 12);
    cfg.random_start = t % 3 == 0;
    if (t % 4 == 0) cfg.clip_domain = ClipDomain{-1.0, 1.0};
    if (t % 5 == 0) cfg.frozen_prefix = 2;
    Batch clipped = batch;
    if (cfg.clip_domain) clipped.inputs = batch.inputs.cwiseMax(-1.0).cwiseMin(1.0);
    const Matrix adv = pgd_attack(model, clipped, cfg, static_cast<std::uint64_t>(t));
    for (Eigen::Index i = 0; i < adv.rows(); ++i) {
      const Eigen::RowVectorXd delta = adv.row(i) - clipped.inputs.row(i);
      CHECK(norm_of(delta, cfg.norm) <= cfg.epsilon + 1e-9);
      if (cfg.clip_domain) {
        CHECK(adv.row(i).maxCoeff() <= 1.0);
        CHECK(adv.row(i).minCoeff() >= -1.0);
      }
      for (int j = 0; j < cfg.frozen_prefix; ++j) CHECK(adv(i, j) == clipped.inputs(i, j));
    }
  }
}

TEST_CASE("per-sample loss is non-decreasing across PGD iterations on linear models") {
  CounterRng rng(25, 0);
  for (int t = 0; t < 20; ++t) {
    Matrix w(3, 4);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-1.0, 1.0);
    const auto model = linear_model(w, Vector::Zero(3));
    const auto batch = oracle::random_batch(6, 4, 3, rng);
    const Norm norm = t % 2 ? Norm::l2 : Norm::linf;
    const double eps = 0.4;
    std::vector<double> prev = per_sample_loss(model, batch.inputs, batch.labels);
    for (int steps = 1; steps <= 10; ++steps) {
      auto cfg = AttackConfig::pgd(norm, eps, 10);
      cfg.steps = steps;  // same step size, one more iteration each round
      const auto cur = per_sample_loss(model, pgd_attack(model, batch, cfg, 0), batch.labels);
      for (std::size_t i = 0; i < cur.size(); ++i) CHECK(cur[i] >= prev[i] - 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("random starts are keyed by row, so chunking does not change the attack") {
  CounterRng rng(26, 0);
  const auto model = oracle::random_model({4, 5, 2}, Activation::relu, rng);
  const auto batch = oracle::random_batch(10, 4, 2, rng);
  auto cfg = AttackConfig::pgd(Norm::l2, 0.5, 3);
  cfg.random_start = true;
  const Matrix whole = pgd_attack(model, batch, cfg, 99);
  Batch tail{batch.inputs.bottomRows(4),
             std::vector<int>(batch.labels.begin() + 6, batch.labels.end())};
  const Matrix part = pgd_attack(model, tail, cfg, 99, 6);
  // Matrix products blocked for a different batch size may differ in the
  // last bits; a different random start would differ at order one.
  CHECK((part - whole.bottomRows(4)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("attack config validation") {
  AttackConfig bad = AttackConfig::pgd(Norm::linf, 0.1, 5);
  bad.alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(AttackConfig::pgd(Norm::linf, -0.1, 5).validate(), ConfigError);
  CHECK(AttackConfig::pgd(Norm::l2, 0.8, 10).alpha == doctest::Approx(0.2));
}

TEST_CASE("evaluation reference cases") {
  const Dataset data = small_synthetic(5, 300);
  CounterRng rng(27, 0);
  const auto model = oracle::random_model({11, 8, 2}, Activation::relu, rng);

  const auto none = evaluate(model, data, {}, 1);
  CHECK(none.robust.empty());
  CHECK(none.n_samples == 300);

  const std::vector<AttackConfig> zero = {AttackConfig::pgd(Norm::linf, 0.0, 10)};
  const auto r0 = evaluate(model, data, zero, 1);
  CHECK(r0.robust[0].robust_accuracy == r0.natural_accuracy);

  const std::vector<AttackConfig> attacks = {AttackConfig::pgd(Norm::linf, 0.2, 10),
                                             AttackConfig::pgd(Norm::l2, 1.0, 10)};
  const auto r = evaluate(model, data, attacks, 1);
  for (const auto& e : r.robust) CHECK(e.robust_accuracy <= r.natural_accuracy + 1.0 / 300);

  Dataset empty;
  empty.inputs = Matrix(0, 11);
  CHECK_THROWS_AS(evaluate(model, empty, attacks, 1), UsageError);
}

TEST_CASE("a constant classifier scores the class frequency under any attack") {
  const Dataset data = small_synthetic(6, 500);
  Vector b(2);
  b << 0.0, 1.0;  // always predicts class 1
  const auto model = linear_model(Matrix::Zero(2, 11), b);
  const double freq =
      static_cast<double>(std::count(data.labels.begin(), data.labels.end(), 1)) / 500.0;
  const std::vector<AttackConfig> attacks = {AttackConfig::pgd(Norm::linf, 0.5, 10)};
  const auto r = evaluate(model, data, attacks, 3);
  CHECK(r.natural_accuracy == freq);
  CHECK(r.robust[0].robust_accuracy == freq);
}

TEST_CASE("adversarial training with zero steps is standard training") {
  const Dataset data = small_synthetic(7, 300);
  CounterRng rng(28, 0);
  const auto init = oracle::random_model({11, 6, 2}, Activation::relu, rng);
  auto a = init;
  auto b = init;
  SgdState sa;
  SgdState sb;
  const SgdConfig opt{0.05, 0.9, 5e-4};
  const auto st = train_epoch(a, data, 32, opt, sa, 44);
  const auto at = adv_train_epoch(b, data, 32, AttackConfig::pgd(Norm::linf, 0.1, 0), opt, sb, 44, 9);
  CHECK(st.mean_loss == at.mean_loss);
  CHECK(st.grad_evals == at.grad_evals);
  for (std::size_t k = 0; k < a.layers.size(); ++k) {
    CHECK(a.layers[k].weights == b.layers[k].weights);
    CHECK(a.layers[k].bias == b.layers[k].bias);
  }
}

TEST_CASE("one adversarial step matches a hand-composed attack and update") {
  Matrix w(2, 2);
  w << 0.5, -0.25, -0.5, 0.75;
  Vector bias(2);
  bias << 0.1, -0.1;
  Dataset data;
  data.inputs = Matrix(1, 2);
  data.inputs << 0.4, -0.2;
  data.labels = {1};
  auto model = linear_model(w, bias);
  const double eps = 0.1;
  const double lr = 0.5;

  // Hand composition. The input gradient of CE is W^T (softmax - onehot); for
  // a fixed linear model its sign never changes, so PGD lands on the corner.
  Eigen::RowVector2d x = data.inputs.row(0);
  const Eigen::RowVector2d dir = w.row(1) - w.row(0);  // gradient of the label-1 margin
  Eigen::RowVector2d adv;
  for (int j = 0; j < 2; ++j) adv(j) = x(j) - eps * (dir(j) > 0 ? 1.0 : -1.0);
  const Eigen::Vector2d z = w * adv.transpose() + bias;
  const double p1 = 1.0 / (1.0 + std::exp(z(0) - z(1)));
  const Eigen::Vector2d resid(1.0 - p1, p1 - 1.0);  // softmax - onehot(1)
  const Matrix w_expect = w - lr * resid * adv;
  const Vector b_expect = bias - lr * resid;

  SgdState s;
  adv_train_epoch(model, data, 1, AttackConfig::pgd(Norm::linf, eps, 10), SgdConfig{lr, 0.0, 0.0}, s,
                  1, 2);
  CHECK((model.layers[0].weights - w_expect).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((model.layers[0].bias - b_expect).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("adversarial training leans harder on the robust feature") {
  SyntheticSpec spec;
  spec.tp = TheoryParams{0.9, 0.1, 50};
  spec.n_train = 3000;
  spec.n_eval = 10;
  spec.seed = 31;
  const Dataset data = sample(spec).train;

  const auto ratio = [&](bool adversarial) {
    ModelParams m = linear_model(Matrix::Zero(2, 51), Vector::Zero(2));
    SgdState s;
    const SgdConfig opt{0.05, 0.9, 0.0};
    for (int epoch = 0; epoch < 10; ++epoch) {
      if (adversarial) {
        adv_train_epoch(m, data, 64, AttackConfig::pgd(Norm::linf, 0.05, 10), opt, s, 100 + epoch, 7);
      } else {
        train_epoch(m, data, 64, opt, s, 100 + epoch);
      }
    }
    const Eigen::RowVectorXd eff = m.layers[0].weights.row(1) - m.layers[0].weights.row(0);
    return eff(0) / eff.tail(50).mean();
  };
  const double st = ratio(false);
  const double at = ratio(true);
  CHECK(st > 0.0);
  CHECK(at > st);
}

TEST_CASE("epoch cost accounting") {
  const Dataset data = small_synthetic(8, 200);
  CounterRng rng(29, 0);
  const auto init = oracle::random_model({11, 4, 2}, Activation::relu, rng);
  SgdState s1, s2, s3;
  auto a = init, b = init, c = init;
  const SgdConfig opt{0.05, 0.9, 5e-4};
  // 200 / 64 -> 4 batches.
  CHECK(train_epoch(a, data, 64, opt, s1, 1).grad_evals == 4);
  CHECK(sam_train_epoch(b, data, 64, SamConfig{0.1, 0.0}, opt, s2, 1).grad_evals == 8);
  CHECK(adv_train_epoch(c, data, 64, AttackConfig::pgd(Norm::l2, 0.5, 10), opt, s3, 1, 1).grad_evals == 44);
}
