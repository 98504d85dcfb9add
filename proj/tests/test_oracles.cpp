#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gols/line_search.hpp"
#include "gols/oracles.hpp"

using namespace gols;

TEST_CASE("central differences recover an analytic derivative") {
  auto f = [](std::span<const double> x) { return x[0] * x[0]; };
  const std::vector<double> x = {3.0};
  auto g = oracles::fd_gradient(f, x, 1e-6);
  REQUIRE(g.size() == 1);
  CHECK(std::abs(g[0] - 6.0) < 1e-6);

  SECTION("zero step size is a precondition error") {
    CHECK_THROWS_AS(oracles::fd_component(f, x, 0, 0.0), UsageError);
  }
}

TEST_CASE("brute sign-change scan finds the first crossing") {
  auto fprime = [](double a) { return 2.0 * (a - 1.0); };
  auto root = oracles::brute_sign_change(fprime, 0.0, 2.0, 2001);
  REQUIRE(root.has_value());
  CHECK(std::abs(*root - 1.0) <= 0.001);

  SECTION("no crossing yields no result") {
    CHECK_FALSE(oracles::brute_sign_change([](double) { return -1.0; }, 0.0,
                                           2.0, 100)
                    .has_value());
  }
  SECTION("invalid ranges are rejected") {
    CHECK_THROWS_AS(oracles::brute_sign_change(fprime, 2.0, 0.0, 100),
                    UsageError);
    CHECK_THROWS_AS(oracles::brute_sign_change(fprime, 0.0, 2.0, 1),
                    UsageError);
  }
}

TEST_CASE("search lands within factor eta of the brute-force root") {
  auto fprime = [](double a) { return std::tanh(a - 3.0); };
  auto root = oracles::brute_sign_change(fprime, 0.0, 10.0, 100001);
  REQUIRE(root.has_value());

  oracles::ScalarLine line{fprime, 1e-3};
  GolsConfig cfg;
  GolsOutcome out = search(line, 1e-4, cfg);
  CHECK(out.termination == StopReason::SignChangeUp);
  CHECK(out.alpha_accepted <= *root * cfg.eta);
  CHECK(out.alpha_accepted >= *root / cfg.eta);
}

TEST_CASE("exhaustive expectation guards its enumeration bound") {
  Dataset tiny;
  tiny.rows = 1;
  tiny.input_dim = 1;
  tiny.output_dim = 1;
  tiny.inputs = {0.7};
  tiny.targets = {1.0};
  Architecture a;
  a.layer_widths = {1, 1};
  a.loss = Loss::Bce;
  std::vector<double> x = {0.3, -0.1};

  auto [loss, grad] = oracles::exhaustive_expectation(a, x, tiny);
  const std::size_t one[1] = {0};
  EvalResult full = evaluate(a, x, tiny, one);
  CHECK(loss == full.loss);  // M = 1: the average is the single evaluation
  CHECK(grad == full.gradient);

  SECTION("datasets beyond 1000 rows are refused") {
    Dataset big;
    big.rows = 1001;
    big.input_dim = 1;
    big.output_dim = 1;
    big.inputs.assign(1001, 0.5);
    big.targets.assign(1001, 1.0);
    CHECK_THROWS_AS(oracles::exhaustive_expectation(a, x, big), UsageError);
  }
}

TEST_CASE("doubling simulation handles immediate and absent crossings") {
  auto up = oracles::simulate_doubling([](double) { return 1.0; }, 0.5, 2.0,
                                       100.0);
  CHECK(up.found_sign_change);
  CHECK(up.accepted == 0.5);
  CHECK(up.total_evals == 1);

  auto none = oracles::simulate_doubling([](double) { return -1.0; }, 0.5, 2.0,
                                         100.0);
  CHECK_FALSE(none.found_sign_change);
  CHECK(none.accepted <= 100.0);
  CHECK(none.accepted * 2.0 > 100.0);
}
