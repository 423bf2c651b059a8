#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "groupanno/classifier.hpp"
#include "groupanno/mathutil.hpp"
#include "groupanno/rng.hpp"

using namespace groupanno;

namespace {

AnnotationDataset points_dataset(const std::vector<std::vector<double>>& xs) {
  AnnotationDataset d;
  d.feature_dim = xs.empty() ? 0 : xs[0].size();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d.instances.push_back({"i" + std::to_string(i), xs[i], {{"a0", 0}}});
  }
  return d;
}

}  // namespace

TEST_CASE("predict_proba is the clamped logistic of w.x + b") {
  ClassifierParams p;
  p.weights = {1.0, -2.0};
  p.intercept = 0.5;
  // w.x + b = 1*2 - 2*0.5 + 0.5 = 1.5.
  CHECK(predict_proba(p, {2.0, 0.5}) == doctest::Approx(0.8175744761936437).epsilon(1e-15));
  CHECK(predict_proba(p, {0.0, 0.25}) == 0.5);
  // Clamping keeps outputs inside [1e-12, 1-1e-12].
  ClassifierParams q;
  q.weights = {1000.0};
  CHECK(predict_proba(q, {10.0}) == 1.0 - 1e-12);
  CHECK(predict_proba(q, {-10.0}) == 1e-12);
}

TEST_CASE("predict_proba rejects mismatched dimensions") {
  ClassifierParams p;
  p.weights = {1.0, 2.0};
  CHECK_THROWS_AS(predict_proba(p, {1.0}), std::invalid_argument);
}

TEST_CASE("weighted_nll_grad on a single point matches hand arithmetic") {
  // x = (1), mu = 1, w = 0, b = 0, l2 = 0:
  // p = 0.5, objective = ln 0.5, d/dw = (1-0.5)*1, d/db = 0.5.
  auto d = points_dataset({{1.0}});
  ClassifierParams params;
  params.weights = {0.0};
  params.intercept = 0.0;
  const auto og = weighted_nll_grad(params, d, {1.0}, 0.0);
  CHECK(og.objective == doctest::Approx(-0.6931471805599453).epsilon(1e-15));
  REQUIRE(og.grad_weights.size() == 1);
  CHECK(og.grad_weights[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(og.grad_intercept == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("weighted_nll_grad applies the l2 penalty to weights only") {
  auto d = points_dataset({{1.0}});
  ClassifierParams params;
  params.weights = {2.0};
  params.intercept = -1.0;
  const double l2 = 0.3;
  const auto with = weighted_nll_grad(params, d, {1.0}, l2);
  const auto without = weighted_nll_grad(params, d, {1.0}, 0.0);
  CHECK(with.objective == doctest::Approx(without.objective - 0.5 * l2 * 4.0).epsilon(1e-14));
  CHECK(with.grad_weights[0] ==
        doctest::Approx(without.grad_weights[0] - l2 * 2.0).epsilon(1e-14));
  CHECK(with.grad_intercept == without.grad_intercept);  // intercept unpenalised
}

TEST_CASE("weighted_nll_grad matches central finite differences") {
  Rng rng(21);
  std::vector<std::vector<double>> xs;
  std::vector<double> mu;
  for (int i = 0; i < 40; ++i) {
    xs.push_back({rng.normal(), rng.normal(), rng.normal()});
    mu.push_back(rng.uniform01());
  }
  auto d = points_dataset(xs);
  ClassifierParams params;
  params.weights = {0.3, -0.7, 0.1};
  params.intercept = 0.2;
  const double l2 = 0.01;
  const auto og = weighted_nll_grad(params, d, mu, l2);
  const double h = 1e-6;
  for (std::size_t j = 0; j <= params.weights.size(); ++j) {
    auto plus = params;
    auto minus = params;
    if (j < params.weights.size()) {
      plus.weights[j] += h;
      minus.weights[j] -= h;
    } else {
      plus.intercept += h;
      minus.intercept -= h;
    }
    const double fd = (weighted_nll_grad(plus, d, mu, l2).objective -
                       weighted_nll_grad(minus, d, mu, l2).objective) /
                      (2.0 * h);
    const double analytic =
        j < params.weights.size() ? og.grad_weights[j] : og.grad_intercept;
    CHECK(analytic == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("fit separates linearly separable soft labels") {
  Rng rng(33);
  std::vector<std::vector<double>> xs;
  std::vector<double> mu;
  for (int i = 0; i < 100; ++i) {
    const double cls = i < 50 ? 0.0 : 1.0;
    xs.push_back({rng.normal(cls * 4.0 - 2.0, 0.5), rng.normal()});
    mu.push_back(cls);
  }
  auto d = points_dataset(xs);
  TrainConfig cfg;
  const auto params = fit(d, mu, cfg);
  int correct = 0;
  for (int i = 0; i < 100; ++i) {
    const double p = predict_proba(params, xs[i]);
    if ((p >= 0.5) == (mu[i] >= 0.5)) ++correct;
  }
  CHECK(correct >= 98);
  CHECK(params.weights[0] > 0.0);  // feature 0 carries the signal
}

TEST_CASE("fit improves the objective monotonically enough to beat the start") {
  Rng rng(44);
  std::vector<std::vector<double>> xs;
  std::vector<double> mu;
  for (int i = 0; i < 60; ++i) {
    xs.push_back({rng.normal(), rng.normal()});
    mu.push_back(rng.uniform01() < 0.5 ? 0.1 : 0.9);
  }
  auto d = points_dataset(xs);
  TrainConfig cfg;
  cfg.epochs = 50;
  const auto params = fit(d, mu, cfg);
  ClassifierParams zero;
  zero.weights = {0.0, 0.0};
  CHECK(weighted_nll_grad(params, d, mu, cfg.l2).objective >=
        weighted_nll_grad(zero, d, mu, cfg.l2).objective);
}

TEST_CASE("stronger l2 shrinks the learned weights") {
  Rng rng(55);
  std::vector<std::vector<double>> xs;
  std::vector<double> mu;
  for (int i = 0; i < 80; ++i) {
    const double cls = i % 2 ? 1.0 : 0.0;
    xs.push_back({rng.normal(cls * 2.0 - 1.0, 1.0)});
    mu.push_back(cls);
  }
  auto d = points_dataset(xs);
  TrainConfig weak;
  weak.l2 = 1e-6;
  TrainConfig strong;
  strong.l2 = 10.0;
  const double w_weak = std::fabs(fit(d, mu, weak).weights[0]);
  const double w_strong = std::fabs(fit(d, mu, strong).weights[0]);
  CHECK(w_strong < w_weak);
}

TEST_CASE("fit is deterministic and rejects empty datasets") {
  Rng rng(66);
  std::vector<std::vector<double>> xs;
  std::vector<double> mu;
  for (int i = 0; i < 30; ++i) {
    xs.push_back({rng.normal(), rng.normal()});
    mu.push_back(i % 2 ? 0.8 : 0.2);
  }
  auto d = points_dataset(xs);
  TrainConfig cfg;
  const auto p1 = fit(d, mu, cfg);
  const auto p2 = fit(d, mu, cfg);
  CHECK(p1.weights == p2.weights);
  CHECK(p1.intercept == p2.intercept);
  AnnotationDataset empty;
  CHECK_THROWS_AS(fit(empty, {}, cfg), std::invalid_argument);
}

TEST_CASE("weighted_nll_grad rejects mu of the wrong length") {
  auto d = points_dataset({{1.0}, {2.0}});
  ClassifierParams params;
  params.weights = {0.0};
  CHECK_THROWS_AS(weighted_nll_grad(params, d, {1.0}, 0.0), std::invalid_argument);
}
