#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gols/dataset.hpp"
#include "gols/errors.hpp"
#include "gols/model.hpp"
#include "gols/probe.hpp"

// Independent checks used by the test suite and the `verify` subcommand.
// Nothing here calls the backward pass it is used to validate.
namespace gols::oracles {

// Central differences of a scalar function, one coordinate.
inline double fd_component(const std::function<double(std::span<const double>)>& f,
                           std::span<const double> x, std::size_t j,
                           double h = 1e-6) {
  if (!(h > 0.0)) throw UsageError("fd_component: h must be > 0");
  std::vector<double> xp(x.begin(), x.end());
  const double orig = xp[j];
  xp[j] = orig + h;
  const double up = f(xp);
  xp[j] = orig - h;
  const double down = f(xp);
  return (up - down) / (2.0 * h);
}

// Central-difference gradient of an arbitrary scalar function.
inline std::vector<double> fd_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) g[j] = fd_component(f, x, j, h);
  return g;
}

// Model-bound variants differencing the forward loss value only.
inline std::vector<double> fd_model_gradient(const Architecture& a,
                                             std::span<const double> x,
                                             const Dataset& d,
                                             std::span<const std::size_t> batch,
                                             double h = 1e-6) {
  return fd_gradient(
      [&](std::span<const double> xs) { return loss_value(a, xs, d, batch); },
      x, h);
}

inline double fd_model_component(const Architecture& a,
                                 std::span<const double> x, const Dataset& d,
                                 std::span<const std::size_t> batch,
                                 std::size_t j, double h = 1e-6) {
  return fd_component(
      [&](std::span<const double> xs) { return loss_value(a, xs, d, batch); },
      x, j, h);
}

// First grid point where a deterministic F' crosses from negative to
// non-negative, scanning [lo, hi] in `steps` equal increments.
inline std::optional<double> brute_sign_change(
    const std::function<double(double)>& fprime, double lo, double hi,
    std::size_t steps) {
  if (!(lo < hi) || steps < 2) {
    throw UsageError("brute_sign_change: need lo < hi and steps >= 2");
  }
  const double dx = (hi - lo) / static_cast<double>(steps - 1);
  double prev = fprime(lo);
  for (std::size_t i = 1; i < steps; ++i) {
    const double alpha = lo + static_cast<double>(i) * dx;
    const double cur = fprime(alpha);
    if (prev < 0.0 && cur >= 0.0) return alpha;
    prev = cur;
  }
  return std::nullopt;
}

// Average of all M singleton-batch evaluations; by linearity this must equal
// the full-batch loss and gradient.
inline std::pair<double, std::vector<double>> exhaustive_expectation(
    const Architecture& a, std::span<const double> x, const Dataset& d) {
  if (d.rows > 1000) {
    throw UsageError("exhaustive_expectation: dataset too large to enumerate");
  }
  double loss = 0.0;
  std::vector<double> grad(a.param_count(), 0.0);
  for (std::size_t i = 0; i < d.rows; ++i) {
    const std::size_t one[1] = {i};
    EvalResult r = evaluate(a, x, d, one);
    loss += r.loss;
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += r.gradient[j];
  }
  const double inv = 1.0 / static_cast<double>(d.rows);
  loss *= inv;
  for (double& g : grad) g *= inv;
  return {loss, std::move(grad)};
}

// Adapts a deterministic 1-D derivative to the line interface the search
// consumes; counts its own evaluations.
struct ScalarLine {
  std::function<double(double)> fprime;
  double norm = 1.0;
  long eval_count = 0;

  LineSample eval_at(double alpha) {
    ++eval_count;
    return {0.0, fprime(alpha)};
  }
  double direction_norm() const { return norm; }
};

struct DoublingTrace {
  double accepted = 0.0;
  long growth_evals = 0;  // evaluations made while doubling
  long total_evals = 0;   // growth plus the initial evaluation at alpha_start
  bool found_sign_change = false;
};

// Brute-force doubling: evaluate at alpha_start, then keep multiplying by eta
// while F' stays negative and the next step fits under alpha_max. Mirrors the
// growth accounting independently of the search implementation.
inline DoublingTrace simulate_doubling(
    const std::function<double(double)>& fprime, double alpha_start, double eta,
    double alpha_max) {
  DoublingTrace t;
  double alpha = alpha_start;
  double fp = fprime(alpha);
  t.total_evals = 1;
  if (fp >= 0.0) {
    t.accepted = alpha;
    t.found_sign_change = true;
    return t;
  }
  while (alpha * eta <= alpha_max) {
    alpha *= eta;
    fp = fprime(alpha);
    ++t.growth_evals;
    ++t.total_evals;
    if (fp >= 0.0) {
      t.accepted = alpha;
      t.found_sign_change = true;
      return t;
    }
  }
  t.accepted = alpha;
  return t;
}

}  // namespace gols::oracles
