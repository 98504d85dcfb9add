#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gols/csv.hpp"
#include "gols/dataset.hpp"
#include "gols/errors.hpp"
#include "gols/line_search.hpp"
#include "gols/model.hpp"
#include "gols/probe.hpp"
#include "gols/sampler.hpp"

namespace gols {

enum class OptimizerKind { GolsI, FixedStep };

struct RunConfig {
  Architecture arch;
  SamplerMode mode = SamplerMode::Dynamic;
  std::size_t batch_size = 0;  // ignored for Full
  OptimizerKind optimizer = OptimizerKind::GolsI;
  GolsConfig gols;
  double fixed_alpha = 1.0;
  bool reuse_prev_gradient = true;
  long max_func_evals = 0;
  long metric_cadence = 1;  // recompute metrics once cum_fe advances this much
  std::uint64_t init_seed = 0;
  std::uint64_t sampler_seed = 0;
  std::size_t error_subsample = 0;  // 0 = evaluate on all rows
  double divergence_loss = 1e12;

  void validate() const {
    arch.validate();
    if (max_func_evals <= 0) throw UsageError("run: max_func_evals must be > 0");
    if (metric_cadence < 1) throw UsageError("run: metric_cadence must be >= 1");
    if (optimizer == OptimizerKind::FixedStep &&
        (!(fixed_alpha >= 0.0) || !std::isfinite(fixed_alpha))) {
      throw UsageError("run: fixed_alpha must be finite and >= 0");
    }
  }
};

struct TrainRecord {
  long n = 0;
  long cum_fe = 0;
  double loss = 0.0;       // full training loss at the latest metric point
  double train_err = 0.0;  // classification error (with nugget)
  double test_err = 0.0;
  double alpha = 0.0;  // accepted step size this iteration
  long evals = 0;      // function evaluations charged to this iteration's search
  const char* term = "";
};

enum class RunStatus { Completed, Diverged };

struct RunResult {
  std::vector<TrainRecord> records;
  RunStatus status = RunStatus::Completed;
  std::vector<double> final_params;
};

namespace detail {

inline std::vector<std::size_t> metric_subsample(std::size_t rows,
                                                 std::size_t want,
                                                 std::uint64_t seed) {
  std::vector<std::size_t> idx;
  if (want == 0 || want >= rows) return idx;  // empty = use all rows
  idx.resize(want);
  SplitMix64 rng(seed);
  for (std::size_t& v : idx) v = rng.next_index(rows);
  return idx;
}

}  // namespace detail

// Steepest-descent training. With GolsI every iteration draws a batch to
// define d_n = -g, then resolves the step with the line search run on the
// same sampler; with FixedStep the update is x - alpha g at one evaluation
// per iteration. Metrics are computed outside the evaluation budget.
inline RunResult run(const RunConfig& cfg, const Dataset& train,
                     const Dataset& test) {
  cfg.validate();
  const std::size_t p = cfg.arch.param_count();
  std::vector<double> x = init_params(cfg.arch, cfg.init_seed);
  BatchSampler sampler(cfg.mode, train.rows, cfg.batch_size, cfg.sampler_seed);

  const std::vector<std::size_t> train_sub = detail::metric_subsample(
      train.rows, cfg.error_subsample, derive_seed(cfg.sampler_seed, 101));
  const std::vector<std::size_t> test_sub =
      test.rows == 0 ? std::vector<std::size_t>{}
                     : detail::metric_subsample(
                           test.rows, cfg.error_subsample,
                           derive_seed(cfg.sampler_seed, 202));
  std::vector<std::size_t> all_train(train.rows);
  for (std::size_t i = 0; i < train.rows; ++i) all_train[i] = i;

  RunResult result;
  double m_loss = std::numeric_limits<double>::quiet_NaN();
  double m_train_err = m_loss, m_test_err = m_loss;
  auto compute_metrics = [&]() {
    m_loss = loss_value(cfg.arch, x, train, all_train);
    m_train_err = classification_error(cfg.arch, x, train, train_sub);
    m_test_err = test.rows == 0
                     ? std::numeric_limits<double>::quiet_NaN()
                     : classification_error(cfg.arch, x, test, test_sub);
  };

  double alpha_prev = cfg.gols.alpha_min;  // alpha_{0,0}
  std::vector<double> saved_gradient;      // last line-search gradient
  std::vector<double> direction(p);
  long cum = 0;
  long n = 0;
  long last_metric_fe = -cfg.metric_cadence;  // force metrics on iteration 0

  while (cum < cfg.max_func_evals) {
    if (cfg.mode == SamplerMode::Static && n > 0) sampler.refresh();
    double alpha_used = 0.0;
    long evals_this = 0;
    const char* term = "";
    try {
      const std::vector<std::size_t> batch = sampler.draw();
      EvalResult dir_eval = evaluate(cfg.arch, x, train, batch);
      cum += 1;
      if (dir_eval.loss > cfg.divergence_loss) {
        throw NumericError("training loss exceeded divergence threshold");
      }
      for (std::size_t j = 0; j < p; ++j) direction[j] = -dir_eval.gradient[j];

      if (cfg.optimizer == OptimizerKind::FixedStep) {
        for (std::size_t j = 0; j < p; ++j) {
          x[j] += cfg.fixed_alpha * direction[j];
        }
        alpha_used = cfg.fixed_alpha;
        evals_this = 1;
        term = "fixed";
      } else {
        LineProbe probe(cfg.arch, train, sampler, x, direction);
        std::optional<double> reuse;
        if (cfg.reuse_prev_gradient && !saved_gradient.empty()) {
          double s = 0.0;
          for (std::size_t j = 0; j < p; ++j) {
            s += direction[j] * saved_gradient[j];
          }
          reuse = s;
        }
        GolsOutcome out = search(probe, alpha_prev, cfg.gols, reuse);
        cum += out.evals;
        for (std::size_t j = 0; j < p; ++j) {
          x[j] += out.alpha_accepted * direction[j];
        }
        alpha_prev = out.alpha_accepted;
        if (!probe.last_gradient().empty()) {
          saved_gradient = probe.last_gradient();
        }
        alpha_used = out.alpha_accepted;
        evals_this = out.evals;
        term = to_string(out.termination);
      }
    } catch (const NumericError&) {
      result.status = RunStatus::Diverged;
      result.records.push_back({n, cum, m_loss, m_train_err, m_test_err, 0.0,
                                0, "diverged"});
      break;
    }

    if (cum - last_metric_fe >= cfg.metric_cadence) {
      compute_metrics();
      last_metric_fe = cum;
    }
    result.records.push_back({n, cum, m_loss, m_train_err, m_test_err,
                              alpha_used, evals_this, term});
    ++n;
  }

  // Final record always carries fresh metrics.
  if (result.status == RunStatus::Completed && !result.records.empty() &&
      last_metric_fe != cum) {
    compute_metrics();
    TrainRecord& last = result.records.back();
    last.loss = m_loss;
    last.train_err = m_train_err;
    last.test_err = m_test_err;
  }
  result.final_params = std::move(x);
  return result;
}

inline std::string records_to_csv(long run_id,
                                  std::span<const TrainRecord> records) {
  std::string out = "run_id,n,cum_fe,loss,train_err,test_err,alpha,evals,term\n";
  for (const TrainRecord& r : records) {
    detail::append_long(out, run_id);
    out += ',';
    detail::append_long(out, r.n);
    out += ',';
    detail::append_long(out, r.cum_fe);
    out += ',';
    detail::append_double(out, r.loss);
    out += ',';
    detail::append_double(out, r.train_err);
    out += ',';
    detail::append_double(out, r.test_err);
    out += ',';
    detail::append_double(out, r.alpha);
    out += ',';
    detail::append_long(out, r.evals);
    out += ',';
    out += r.term;
    out += '\n';
  }
  return out;
}

inline void write_records_csv(const std::filesystem::path& path, long run_id,
                              std::span<const TrainRecord> records) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write CSV: " + path.string());
  f << records_to_csv(run_id, records);
}

// Function evaluations per iteration over a record stream (diverged sentinel
// rows are excluded).
struct FeItStats {
  long min_evals = 0;
  long max_evals = 0;
  double mean_evals = 0.0;
  long first_iteration_evals = 0;
  std::size_t iterations = 0;
};

inline FeItStats fe_per_iteration(std::span<const TrainRecord> records) {
  FeItStats s;
  for (const TrainRecord& r : records) {
    if (r.evals == 0) continue;
    if (s.iterations == 0) {
      s.min_evals = s.max_evals = s.first_iteration_evals = r.evals;
    } else {
      s.min_evals = std::min(s.min_evals, r.evals);
      s.max_evals = std::max(s.max_evals, r.evals);
    }
    s.mean_evals += static_cast<double>(r.evals);
    ++s.iterations;
  }
  if (s.iterations > 0) {
    s.mean_evals /= static_cast<double>(s.iterations);
  }
  return s;
}

}  // namespace gols
