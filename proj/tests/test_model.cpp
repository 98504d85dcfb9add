#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gols/model.hpp"
#include "gols/oracles.hpp"
#include "gols/rng.hpp"

using namespace gols;

namespace {

Dataset synthetic_dataset(std::size_t rows, std::size_t in, std::size_t out,
                          std::uint64_t seed) {
  Dataset d;
  d.rows = rows;
  d.input_dim = in;
  d.output_dim = out;
  SplitMix64 rng(seed);
  d.inputs.resize(rows * in);
  for (double& v : d.inputs) v = rng.next_gaussian();
  d.targets.assign(rows * out, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    if (out == 1) {
      d.targets[i] = static_cast<double>(rng.next_index(2));
    } else {
      d.targets[i * out + rng.next_index(out)] = 1.0;
    }
  }
  return d;
}

double max_rel_error(std::span<const double> got, std::span<const double> want) {
  double worst = 0.0;
  for (std::size_t j = 0; j < got.size(); ++j) {
    const double denom = std::max(1.0, std::abs(want[j]));
    worst = std::max(worst, std::abs(got[j] - want[j]) / denom);
  }
  return worst;
}

std::vector<std::size_t> iota_batch(std::size_t n) {
  std::vector<std::size_t> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = i;
  return b;
}

}  // namespace

TEST_CASE("parameter counts match the layer arithmetic") {
  CHECK(arch_preset("NetPI", 30, 2).param_count() == 1058);
  CHECK(arch_preset("LogR", 30, 2).param_count() == 62);
  CHECK(arch_preset("NetPII", 30, 2).param_count() == 1058);
  CHECK(arch_preset("NetI", 784, 10).param_count() == 784 * 800 + 800 + 800 * 10 + 10);
  CHECK(arch_preset("NetPI-deep10", 30, 2).layer_widths.size() == 12);
  CHECK_THROWS_AS(arch_preset("NetXYZ", 4, 2), UsageError);
}

TEST_CASE("init_params is seeded and scales with init_std") {
  Architecture a = arch_preset("NetPI", 30, 2);
  auto x1 = init_params(a, 99);
  auto x2 = init_params(a, 99);
  CHECK(x1 == x2);
  CHECK(init_params(a, 100) != x1);

  a.init_std = 0.0;
  for (double v : init_params(a, 99)) REQUIRE(v == 0.0);
}

TEST_CASE("BCE at zero parameters is ln 2") {
  Dataset d = synthetic_dataset(16, 5, 2, 1);
  Architecture a = arch_preset("LogR", 5, 2);
  std::vector<double> x(a.param_count(), 0.0);
  auto batch = iota_batch(16);
  EvalResult r = evaluate(a, x, d, batch);
  CHECK(r.loss == Catch::Approx(std::log(2.0)).epsilon(1e-14));

  SECTION("single-output binary variant") {
    Dataset db = synthetic_dataset(16, 5, 1, 2);
    Architecture ab = arch_preset("LogR", 5, 1);
    std::vector<double> xb(ab.param_count(), 0.0);
    CHECK(loss_value(ab, xb, db, batch) ==
          Catch::Approx(std::log(2.0)).epsilon(1e-14));
  }
}

TEST_CASE("backprop matches central finite differences on small nets") {
  struct Case {
    Activation hidden, output;
    Loss loss;
  };
  for (auto [hidden, output, loss] :
       {Case{Activation::Sigmoid, Activation::Sigmoid, Loss::Bce},
        Case{Activation::Sigmoid, Activation::Sigmoid, Loss::Mse},
        Case{Activation::Tanh, Activation::Tanh, Loss::Mse}}) {
    Architecture a;
    a.layer_widths = {4, 3, 2};
    a.hidden_activation = hidden;
    a.output_activation = output;
    a.loss = loss;
    Dataset d = synthetic_dataset(9, 4, 2, 5);
    auto x = init_params(a, 17);
    auto batch = iota_batch(9);
    EvalResult r = evaluate(a, x, d, batch);
    auto fd = oracles::fd_model_gradient(a, x, d, batch, 1e-6);
    CHECK(max_rel_error(r.gradient, fd) < 1e-6);
  }
}

TEST_CASE("batch aggregation is linear") {
  Architecture a = arch_preset("NetPI", 6, 2);
  Dataset d = synthetic_dataset(10, 6, 2, 3);
  auto x = init_params(a, 4);

  const std::vector<std::size_t> part1 = {0, 1, 2, 3};
  const std::vector<std::size_t> part2 = {4, 5, 6, 7, 8, 9};
  auto whole = iota_batch(10);

  EvalResult r1 = evaluate(a, x, d, part1);
  EvalResult r2 = evaluate(a, x, d, part2);
  EvalResult r = evaluate(a, x, d, whole);
  CHECK(std::abs(r.loss - (0.4 * r1.loss + 0.6 * r2.loss)) < 1e-12);
  for (std::size_t j = 0; j < r.gradient.size(); ++j) {
    REQUIRE(std::abs(r.gradient[j] -
                     (0.4 * r1.gradient[j] + 0.6 * r2.gradient[j])) < 1e-12);
  }

  SECTION("duplicate index weighs its observation twice") {
    const std::vector<std::size_t> dup = {2, 2, 5, 7};
    const std::size_t b2[1] = {2}, b5[1] = {5}, b7[1] = {7};
    const double want = (2.0 * evaluate(a, x, d, b2).loss +
                         evaluate(a, x, d, b5).loss +
                         evaluate(a, x, d, b7).loss) /
                        4.0;
    CHECK(std::abs(evaluate(a, x, d, dup).loss - want) < 1e-12);
  }
}

TEST_CASE("singleton-batch average equals the full-batch evaluation") {
  Architecture a = arch_preset("NetPI", 4, 2);
  Dataset d = synthetic_dataset(25, 4, 2, 8);
  auto x = init_params(a, 11);
  auto [loss, grad] = oracles::exhaustive_expectation(a, x, d);
  EvalResult full = evaluate(a, x, d, iota_batch(25));
  CHECK(std::abs(loss - full.loss) < 1e-12);
  for (std::size_t j = 0; j < grad.size(); ++j) {
    REQUIRE(std::abs(grad[j] - full.gradient[j]) < 1e-12);
  }
}

TEST_CASE("parameter pack/unpack round-trips bit-exactly") {
  Architecture a = arch_preset("NetPII", 7, 3);
  auto x = init_params(a, 21);
  auto layers = unpack_params(a, x);
  REQUIRE(layers.size() == 2);
  CHECK(layers[0].first.size() == 7 * 32);
  CHECK(layers[0].second.size() == 32);
  CHECK(pack_params(a, layers) == x);
}

TEST_CASE("classification error carries the 1e-4 nugget") {
  // 1-input logistic unit: weight 10 classifies sign(x) perfectly.
  Architecture a;
  a.layer_widths = {1, 1};
  a.loss = Loss::Bce;
  Dataset d;
  d.rows = 10;
  d.input_dim = 1;
  d.output_dim = 1;
  for (int i = 0; i < 10; ++i) {
    const double v = i < 5 ? 1.0 : -1.0;
    d.inputs.push_back(v);
    d.targets.push_back(v > 0 ? 1.0 : 0.0);
  }
  const std::vector<double> good = {10.0, 0.0};
  const std::vector<double> bad = {-10.0, 0.0};
  CHECK(classification_error(a, good, d) == 1e-4);
  CHECK(classification_error(a, bad, d) == 1.0 + 1e-4);
}

TEST_CASE("constant predictor on random 3-class targets errs about 2/3") {
  // Zero parameters tie every output; argmax settles on class 0, so the
  // error rate estimates P(target != 0) = 2/3.
  Dataset d = synthetic_dataset(10000, 2, 3, 12345);
  Architecture a;
  a.layer_widths = {2, 3};
  a.loss = Loss::Mse;
  std::vector<double> x(a.param_count(), 0.0);
  const double err = classification_error(a, x, d);
  CHECK(std::abs(err - 2.0 / 3.0) < 0.02);
}

TEST_CASE("evaluate validates its inputs") {
  Architecture a = arch_preset("LogR", 4, 2);
  Dataset d = synthetic_dataset(5, 4, 2, 1);
  std::vector<double> x(a.param_count(), 0.0);
  CHECK_THROWS_AS(evaluate(a, x, d, std::span<const std::size_t>{}),
                  UsageError);
  std::vector<double> short_x(3, 0.0);
  auto batch = iota_batch(5);
  CHECK_THROWS_AS(evaluate(a, short_x, d, batch), UsageError);

  SECTION("overflow raises a numeric error naming the layer") {
    std::vector<double> huge(a.param_count(), 1e308);
    try {
      evaluate(a, huge, d, batch);
      FAIL("expected NumericError");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("layer") != std::string::npos);
    }
  }
}
