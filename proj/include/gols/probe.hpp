#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "gols/dataset.hpp"
#include "gols/errors.hpp"
#include "gols/model.hpp"
#include "gols/sampler.hpp"

namespace gols {

// One univariate evaluation: loss value and directional derivative, both from
// the same batch.
struct LineSample {
  double value = 0.0;
  double slope = 0.0;
};

struct ScanPoint {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;
  long batch_seq = 0;  // evaluation counter value that produced this point
};

// The loss restricted to a ray: F(alpha) = L(x + alpha d) with
// F'(alpha) = d . g(x + alpha d). Each evaluation consumes exactly one batch
// draw from the owning sampler and yields value and slope together.
class LineProbe {
 public:
  LineProbe(const Architecture& arch, const Dataset& data,
            BatchSampler& sampler, std::vector<double> origin,
            std::vector<double> direction)
      : arch_(arch),
        data_(data),
        sampler_(sampler),
        origin_(std::move(origin)),
        direction_(std::move(direction)) {
    if (origin_.size() != arch_.param_count() ||
        direction_.size() != origin_.size()) {
      throw UsageError("probe: origin/direction length mismatch");
    }
    double n2 = 0.0;
    for (double v : direction_) n2 += v * v;
    direction_norm_ = std::sqrt(n2);
  }

  double direction_norm() const { return direction_norm_; }
  long evals() const { return evals_; }

  // Full gradient vector from the most recent evaluation; the next iteration
  // of a training loop projects it onto its new direction for a free F'(0).
  const std::vector<double>& last_gradient() const { return last_gradient_; }

  LineSample eval_at(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
      throw UsageError("probe: alpha must be finite and >= 0");
    }
    point_.assign(origin_.begin(), origin_.end());
    for (std::size_t j = 0; j < point_.size(); ++j) {
      point_[j] += alpha * direction_[j];
    }
    const std::vector<std::size_t> batch = sampler_.draw();
    EvalResult r = evaluate(arch_, point_, data_, batch);
    ++evals_;
    double slope = 0.0;
    for (std::size_t j = 0; j < direction_.size(); ++j) {
      slope += direction_[j] * r.gradient[j];
    }
    last_gradient_ = std::move(r.gradient);
    return {r.loss, slope};
  }

  // Evaluates along an ascending grid; in Dynamic mode every point sees a
  // fresh batch.
  std::vector<ScanPoint> scan(std::span<const double> alpha_grid) {
    std::vector<ScanPoint> out;
    out.reserve(alpha_grid.size());
    for (double alpha : alpha_grid) {
      LineSample s = eval_at(alpha);
      out.push_back({alpha, s.value, s.slope, evals_});
    }
    return out;
  }

 private:
  const Architecture& arch_;
  const Dataset& data_;
  BatchSampler& sampler_;
  std::vector<double> origin_;
  std::vector<double> direction_;
  std::vector<double> point_;
  std::vector<double> last_gradient_;
  double direction_norm_ = 0.0;
  long evals_ = 0;
};

}  // namespace gols
