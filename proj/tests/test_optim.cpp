#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "samrobust/error.hpp"
#include "samrobust/optim.hpp"

using namespace samrobust;

namespace {

// A 1x1 "model" holding a single scalar weight w.
ModelParams scalar_model(double w) {
  ModelParams m;
  m.layers.push_back(DenseLayer{Matrix::Constant(1, 1, w), Vector::Zero(1)});
  return m;
}

double weight(const ModelParams& m) { return m.layers[0].weights(0, 0); }

LayerStack scalar_grad(double g) {
  return {DenseLayer{Matrix::Constant(1, 1, g), Vector::Zero(1)}};
}

// L(w) = w^2 on the weight; the bias plays no part.
LossGrad quadratic(const ModelParams& m) {
  const double w = weight(m);
  return LossGrad{w * w, scalar_grad(2.0 * w)};
}

bool params_equal(const ModelParams& a, const ModelParams& b) {
  for (std::size_t k = 0; k < a.layers.size(); ++k) {
    if (a.layers[k].weights != b.layers[k].weights) return false;
    if (a.layers[k].bias != b.layers[k].bias) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("plain gradient step") {
  auto m = scalar_model(1.0);
  SgdState s;
  sgd_step(m, scalar_grad(2.0), s, SgdConfig{0.1, 0.0, 0.0});
  CHECK(weight(m) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("momentum accumulates over two identical steps") {
  auto m = scalar_model(0.0);
  SgdState s;
  const SgdConfig cfg{0.1, 0.9, 0.0};
  sgd_step(m, scalar_grad(1.0), s, cfg);
  CHECK(weight(m) == doctest::Approx(-0.1).epsilon(1e-15));
  sgd_step(m, scalar_grad(1.0), s, cfg);
  CHECK(weight(m) == doctest::Approx(-0.29).epsilon(1e-15));
}

TEST_CASE("decay-only step") {
  auto m = scalar_model(2.0);
  SgdState s;
  sgd_step(m, scalar_grad(0.0), s, SgdConfig{0.1, 0.0, 0.5});
  CHECK(weight(m) == doctest::Approx(1.9).epsilon(1e-15));
}

TEST_CASE("sgd_step rejects mismatched shapes and bad configs") {
  auto m = scalar_model(1.0);
  SgdState s;
  LayerStack wrong = {DenseLayer{Matrix::Zero(2, 1), Vector::Zero(2)}};
  CHECK_THROWS_AS(sgd_step(m, wrong, s, SgdConfig{}), UsageError);
  CHECK_THROWS_AS(sgd_step(m, scalar_grad(1.0), s, SgdConfig{0.1, 1.0, 0.0}), UsageError);
  CHECK_THROWS_AS(sgd_step(m, scalar_grad(1.0), s, SgdConfig{-0.1, 0.0, 0.0}), UsageError);
}

TEST_CASE("hand-traced SAM step on a 1-D quadratic") {
  auto m = scalar_model(1.0);
  SgdState s;
  const auto stats = sam_update(m, quadratic, SamConfig{0.5, 0.0}, SgdConfig{0.1, 0.0, 0.0}, s);
  // g1 = 2, eps = 0.5, g2 = 2 * 1.5 = 3, w' = 1 - 0.1 * 3.
  CHECK(weight(m) == 0.7);
  CHECK(stats.loss == 1.0);
  CHECK(stats.perturbed_loss == 2.25);
  CHECK(stats.perturbation_norm == 0.5);
  CHECK(stats.grad_evals == 2);
}

TEST_CASE("SAM lambda adds 2 lambda w to the second gradient") {
  auto m = scalar_model(1.0);
  SgdState s;
  sam_update(m, quadratic, SamConfig{0.5, 0.25}, SgdConfig{0.1, 0.0, 0.0}, s);
  // g2 + 2 * 0.25 * 1 = 3.5
  CHECK(weight(m) == doctest::Approx(0.65).epsilon(1e-15));
}

TEST_CASE("zero gradient skips the perturbation") {
  auto m = scalar_model(0.0);
  SgdState s;
  const auto stats = sam_update(m, quadratic, SamConfig{0.5, 0.0}, SgdConfig{0.1, 0.0, 0.0}, s);
  CHECK(stats.perturbation_norm == 0.0);
  CHECK(weight(m) == 0.0);
}

TEST_CASE("sam_step with rho 0 is bit-identical to sgd_step") {
  CounterRng rng(77, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const auto model = oracle::random_model({4, 8, 3}, Activation::relu, rng);
    const auto batch = oracle::random_batch(6, 4, 3, rng);
    const SgdConfig cfg{0.05, 0.9, 5e-4};

    auto a = model;
    auto b = model;
    SgdState sa;
    SgdState sb;
    for (int step = 0; step < 3; ++step) {
      sam_step(a, batch, SamConfig{0.0, 0.0}, cfg, sa);
      sgd_step(b, loss_and_gradients(b, batch).param_grads, sb, cfg);
    }
    CHECK(params_equal(a, b));
  }
}

TEST_CASE("sam_step with lr 0 leaves the parameters unchanged") {
  CounterRng rng(78, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto model = oracle::random_model({4, 8, 3}, Activation::relu, rng);
    const auto batch = oracle::random_batch(6, 4, 3, rng);
    auto m = model;
    SgdState s;
    const auto stats = sam_step(m, batch, SamConfig{0.3, 0.0}, SgdConfig{0.0, 0.9, 5e-4}, s);
    CHECK(stats.perturbation_norm == doctest::Approx(0.3));
    CHECK(params_equal(m, model));
  }
}

TEST_CASE("the SAM perturbation ascends the loss at small radius") {
  CounterRng rng(79, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto model = oracle::random_model({3, 6, 2}, Activation::identity, rng);
    const auto batch = oracle::random_batch(8, 3, 2, rng);
    const double rho = 0.05 * rng.uniform();
    auto m = model;
    SgdState s;
    const auto stats = sam_step(m, batch, SamConfig{rho, 0.0}, SgdConfig{0.0, 0.0, 0.0}, s);
    CHECK(stats.perturbed_loss >= stats.loss - 1e-9);
  }
}

TEST_CASE("sam_perturbation has norm rho along the gradient") {
  CounterRng rng(80, 0);
  const auto model = oracle::random_model({3, 5, 2}, Activation::relu, rng);
  const auto g = loss_and_gradients(model, oracle::random_batch(4, 3, 2, rng)).param_grads;
  const auto eps = sam_perturbation(g, 0.2);
  CHECK(std::sqrt(squared_norm(eps)) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(squared_norm(sam_perturbation(zeros_like(g), 0.2)) == 0.0);
}

TEST_CASE("step learning-rate schedule") {
  const LrSchedule sched{0.1, {75, 90}, 0.1};
  CHECK(lr_at(sched, 0) == 0.1);
  CHECK(lr_at(sched, 10) == 0.1);
  CHECK(lr_at(sched, 74) == 0.1);
  CHECK(lr_at(sched, 75) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(lr_at(sched, 90) == doctest::Approx(0.001).epsilon(1e-15));
  const LrSchedule flat{0.3, {}, 0.1};
  for (int e = 0; e < 200; e += 17) CHECK(lr_at(flat, e) == 0.3);
}

TEST_CASE("schedule is non-increasing and validates its inputs") {
  const LrSchedule sched{0.2, {3, 7, 11}, 0.5};
  double prev = lr_at(sched, 0);
  for (int e = 1; e < 20; ++e) {
    const double lr = lr_at(sched, e);
    CHECK(lr <= prev);
    prev = lr;
  }
  CHECK_THROWS_AS((LrSchedule{0.1, {5, 5}, 0.1}.validate()), ConfigError);
  CHECK_THROWS_AS((LrSchedule{0.1, {}, 1.5}.validate()), ConfigError);
  CHECK_THROWS_AS((LrSchedule{0.0, {}, 0.1}.validate()), ConfigError);
}
