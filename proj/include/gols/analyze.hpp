#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
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

// Repeated directional scans under dynamic sub-sampling, counting where
// function-value minima and directional-derivative sign changes land.
struct ScanSpec {
  std::size_t grid_points = 100;
  double spacing = 0.002;
  std::size_t repeats = 100;
  std::vector<std::size_t> batch_sizes = {10, 25, 50, 75, 100, 150};
  std::uint64_t init_seed = 1;         // seeds the reference point x_n
  std::size_t warmup_iterations = 0;   // full-batch line-search steps before the scan
  std::uint64_t base_seed = 1;         // per-repeat sampler streams derive from this
  std::size_t within_cells = 5;        // band half-width for the summary fraction

  void validate(std::size_t dataset_rows) const {
    if (grid_points < 3) {
      throw UsageError("scan: grid_points must be >= 3 for minima detection");
    }
    if (!(spacing > 0.0)) throw UsageError("scan: spacing must be > 0");
    if (repeats < 1) throw UsageError("scan: repeats must be >= 1");
    if (batch_sizes.empty()) throw UsageError("scan: batch_sizes is empty");
    for (std::size_t b : batch_sizes) {
      if (b < 1 || b > dataset_rows) {
        throw UsageError("scan: batch size out of [1, dataset rows]");
      }
    }
  }
};

struct LocalizationHistogram {
  std::size_t batch_size = 0;
  std::size_t repeats_done = 0;
  std::size_t repeats_skipped = 0;
  std::vector<long> minima_counts;  // detections per grid cell, all repeats
  std::vector<long> snngpp_counts;
};

struct LocalizationSummary {
  std::size_t batch_size = 0;
  double minima_per_repeat = 0.0;
  double snngpp_per_repeat = 0.0;
  double minima_spatial_std = 0.0;
  double snngpp_spatial_std = 0.0;
  double frac_within_band = 0.0;  // share of sign changes near the optimum
};

struct LocalizationStudy {
  std::vector<double> grid;
  std::vector<LocalizationHistogram> histograms;
  std::vector<LocalizationSummary> summaries;
  std::size_t true_optimum_cell = 0;  // full-batch sign-change cell
  bool true_optimum_found = false;
};

// Interior indices i with F(i-1) > F(i) < F(i+1).
inline std::vector<std::size_t> detect_minima(std::span<const double> f) {
  std::vector<std::size_t> out;
  if (f.size() < 3) return out;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    if (f[i - 1] > f[i] && f[i] < f[i + 1]) out.push_back(i);
  }
  return out;
}

// Indices i with F'(i-1) <= 0 and F'(i) > 0: a negative-to-positive sign
// change between adjacent grid points.
inline std::vector<std::size_t> detect_snngpp(std::span<const double> fprime) {
  std::vector<std::size_t> out;
  if (fprime.size() < 2) return out;
  for (std::size_t i = 1; i < fprime.size(); ++i) {
    if (fprime[i - 1] <= 0.0 && fprime[i] > 0.0) out.push_back(i);
  }
  return out;
}

namespace detail {

inline double spatial_std(std::span<const long> counts,
                          std::span<const double> grid) {
  double total = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    total += static_cast<double>(counts[i]);
    mean += static_cast<double>(counts[i]) * grid[i];
  }
  if (total == 0.0) return std::numeric_limits<double>::quiet_NaN();
  mean /= total;
  double var = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double dev = grid[i] - mean;
    var += static_cast<double>(counts[i]) * dev * dev;
  }
  return std::sqrt(var / total);
}

}  // namespace detail

// Runs the full protocol: fix x_n and the full-batch steepest-descent
// direction, then for every batch size repeat the grid scan with independent
// seeds and accumulate detection counts. Batch size == M scans the actual
// full batch (deterministic); smaller sizes use dynamic sub-sampling.
inline LocalizationStudy localization_study(const ScanSpec& spec,
                                            const Architecture& arch,
                                            const Dataset& data) {
  spec.validate(data.rows);

  std::vector<double> x = init_params(arch, spec.init_seed);
  std::vector<std::size_t> all(data.rows);
  for (std::size_t i = 0; i < data.rows; ++i) all[i] = i;

  // Optional warm-up: full-batch line-search steps from the seeded start.
  GolsConfig gcfg;
  double alpha_prev = gcfg.alpha_min;
  for (std::size_t w = 0; w < spec.warmup_iterations; ++w) {
    EvalResult g = evaluate(arch, x, data, all);
    std::vector<double> d(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) d[j] = -g.gradient[j];
    BatchSampler full(SamplerMode::Full, data.rows, 0, 0);
    LineProbe probe(arch, data, full, x, d);
    GolsOutcome o = search(probe, alpha_prev, gcfg);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += o.alpha_accepted * d[j];
    alpha_prev = o.alpha_accepted;
  }

  EvalResult ref = evaluate(arch, x, data, all);
  std::vector<double> direction(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) direction[j] = -ref.gradient[j];

  LocalizationStudy study;
  study.grid.resize(spec.grid_points);
  for (std::size_t i = 0; i < spec.grid_points; ++i) {
    study.grid[i] = static_cast<double>(i) * spec.spacing;
  }

  // Full-batch reference scan defines the true optimum cell.
  {
    BatchSampler full(SamplerMode::Full, data.rows, 0, 0);
    LineProbe probe(arch, data, full, x, direction);
    std::vector<ScanPoint> pts = probe.scan(study.grid);
    std::vector<double> slopes(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) slopes[i] = pts[i].slope;
    const std::vector<std::size_t> hits = detect_snngpp(slopes);
    if (!hits.empty()) {
      study.true_optimum_cell = hits.front();
      study.true_optimum_found = true;
    }
  }

  for (std::size_t b : spec.batch_sizes) {
    LocalizationHistogram hist;
    hist.batch_size = b;
    hist.minima_counts.assign(spec.grid_points, 0);
    hist.snngpp_counts.assign(spec.grid_points, 0);

    for (std::size_t rep = 0; rep < spec.repeats; ++rep) {
      const std::uint64_t seed = derive_seed(
          spec.base_seed, (static_cast<std::uint64_t>(b) << 32) | rep);
      const SamplerMode mode =
          b == data.rows ? SamplerMode::Full : SamplerMode::Dynamic;
      try {
        BatchSampler sampler(mode, data.rows, b, seed);
        LineProbe probe(arch, data, sampler, x, direction);
        std::vector<ScanPoint> pts = probe.scan(study.grid);
        std::vector<double> values(pts.size()), slopes(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
          values[i] = pts[i].value;
          slopes[i] = pts[i].slope;
        }
        for (std::size_t i : detect_minima(values)) ++hist.minima_counts[i];
        for (std::size_t i : detect_snngpp(slopes)) ++hist.snngpp_counts[i];
        ++hist.repeats_done;
      } catch (const NumericError&) {
        ++hist.repeats_skipped;
      }
    }

    LocalizationSummary sum;
    sum.batch_size = b;
    long minima_total = 0, snngpp_total = 0, snngpp_near = 0;
    for (std::size_t i = 0; i < spec.grid_points; ++i) {
      minima_total += hist.minima_counts[i];
      snngpp_total += hist.snngpp_counts[i];
      const std::size_t dist = i > study.true_optimum_cell
                                   ? i - study.true_optimum_cell
                                   : study.true_optimum_cell - i;
      if (dist <= spec.within_cells) snngpp_near += hist.snngpp_counts[i];
    }
    const double reps = static_cast<double>(
        hist.repeats_done > 0 ? hist.repeats_done : 1);
    sum.minima_per_repeat = static_cast<double>(minima_total) / reps;
    sum.snngpp_per_repeat = static_cast<double>(snngpp_total) / reps;
    sum.minima_spatial_std = detail::spatial_std(hist.minima_counts, study.grid);
    sum.snngpp_spatial_std = detail::spatial_std(hist.snngpp_counts, study.grid);
    sum.frac_within_band =
        snngpp_total == 0 || !study.true_optimum_found
            ? std::numeric_limits<double>::quiet_NaN()
            : static_cast<double>(snngpp_near) /
                  static_cast<double>(snngpp_total);

    study.histograms.push_back(std::move(hist));
    study.summaries.push_back(sum);
  }
  return study;
}

inline std::string histogram_to_csv(const LocalizationHistogram& hist,
                                    std::span<const double> grid) {
  std::string out = "batch_size,cell_index,alpha,minima_count,snngpp_count\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    detail::append_long(out, static_cast<long>(hist.batch_size));
    out += ',';
    detail::append_long(out, static_cast<long>(i));
    out += ',';
    detail::append_double(out, grid[i]);
    out += ',';
    detail::append_long(out, hist.minima_counts[i]);
    out += ',';
    detail::append_long(out, hist.snngpp_counts[i]);
    out += '\n';
  }
  return out;
}

inline std::string summaries_to_csv(const LocalizationStudy& study) {
  std::string out =
      "batch_size,repeats_done,repeats_skipped,minima_per_repeat,"
      "snngpp_per_repeat,minima_spatial_std,snngpp_spatial_std,std_ratio,"
      "frac_within_band,true_optimum_cell\n";
  for (std::size_t k = 0; k < study.summaries.size(); ++k) {
    const LocalizationSummary& s = study.summaries[k];
    const LocalizationHistogram& h = study.histograms[k];
    detail::append_long(out, static_cast<long>(s.batch_size));
    out += ',';
    detail::append_long(out, static_cast<long>(h.repeats_done));
    out += ',';
    detail::append_long(out, static_cast<long>(h.repeats_skipped));
    out += ',';
    detail::append_double(out, s.minima_per_repeat);
    out += ',';
    detail::append_double(out, s.snngpp_per_repeat);
    out += ',';
    detail::append_double(out, s.minima_spatial_std);
    out += ',';
    detail::append_double(out, s.snngpp_spatial_std);
    out += ',';
    detail::append_double(out, s.snngpp_spatial_std / s.minima_spatial_std);
    out += ',';
    detail::append_double(out, s.frac_within_band);
    out += ',';
    detail::append_long(out, static_cast<long>(study.true_optimum_cell));
    out += '\n';
  }
  return out;
}

}  // namespace gols
