#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gols/analyze.hpp"
#include "gols/line_search.hpp"
#include "gols/presets.hpp"

using namespace gols;

TEST_CASE("minima detection finds interior dips only") {
  CHECK(detect_minima(std::vector<double>{3, 1, 2}) ==
        std::vector<std::size_t>{1});
  CHECK(detect_minima(std::vector<double>{1, 2, 3, 4}).empty());
  CHECK(detect_minima(std::vector<double>{4, 3, 2, 1}).empty());
  CHECK(detect_minima(std::vector<double>{1, 2}).empty());
  CHECK(detect_minima(std::vector<double>{5, 1, 4, 0, 2}) ==
        std::vector<std::size_t>({1, 3}));
}

TEST_CASE("sign-change detection is negative-to-positive only") {
  CHECK(detect_snngpp(std::vector<double>{-1, 1}) ==
        std::vector<std::size_t>{1});
  CHECK(detect_snngpp(std::vector<double>{-1, -2, -3}).empty());
  CHECK(detect_snngpp(std::vector<double>{1, -1}).empty());  // wrong way
  CHECK(detect_snngpp(std::vector<double>{0, 1}) ==
        std::vector<std::size_t>{1});  // <= 0 counts as the negative side
  CHECK(detect_snngpp(std::vector<double>{-1, 1, -1, 1}) ==
        std::vector<std::size_t>({1, 3}));
}

TEST_CASE("on a smooth pair every minimum sits next to a sign change") {
  // F = sin(3a) sampled with its exact derivative.
  std::vector<double> f, fp;
  for (int i = 0; i < 200; ++i) {
    const double a = 0.01 * i;
    f.push_back(std::sin(3.0 * a));
    fp.push_back(3.0 * std::cos(3.0 * a));
  }
  auto mins = detect_minima(f);
  auto snns = detect_snngpp(fp);
  REQUIRE(!mins.empty());
  for (std::size_t m : mins) {
    bool near = false;
    for (std::size_t s : snns) {
      const std::size_t dist = m > s ? m - s : s - m;
      near = near || dist <= 1;
    }
    REQUIRE(near);
  }
}

TEST_CASE("localization study on iris") {
  Problem p = load_problem("iris", GOLS_TEST_DATA_DIR);
  ScanSpec spec;
  spec.repeats = 20;  // reduced; the acceptance suite runs the full protocol
  spec.batch_sizes = {10, 150};
  spec.init_seed = 1;
  spec.base_seed = 2;
  LocalizationStudy study = localization_study(spec, p.arch, p.train);

  REQUIRE(study.grid.size() == 100);
  REQUIRE(study.histograms.size() == 2);
  REQUIRE(study.true_optimum_found);

  const LocalizationHistogram& h10 = study.histograms[0];
  const LocalizationHistogram& hfull = study.histograms[1];
  REQUIRE(h10.batch_size == 10);
  REQUIRE(hfull.batch_size == 150);

  SECTION("full batch is deterministic: one spike at the optimum") {
    long nonzero = 0;
    for (std::size_t i = 0; i < 100; ++i) {
      if (hfull.snngpp_counts[i] > 0) {
        ++nonzero;
        CHECK(i == study.true_optimum_cell);
        CHECK(hfull.snngpp_counts[i] == static_cast<long>(spec.repeats));
      }
    }
    CHECK(nonzero == 1);
  }

  SECTION("histogram mass is bounded by repeats times grid length") {
    for (const auto& h : study.histograms) {
      long total = 0;
      for (long c : h.snngpp_counts) {
        REQUIRE(c >= 0);
        total += c;
      }
      CHECK(total <= static_cast<long>(spec.repeats * study.grid.size()));
    }
    for (const auto& s : study.summaries) {
      if (!std::isnan(s.frac_within_band)) {
        CHECK(s.frac_within_band >= 0.0);
        CHECK(s.frac_within_band <= 1.0);
      }
    }
  }

  SECTION("small batches localize sign changes tighter than minima") {
    const LocalizationSummary& s10 = study.summaries[0];
    CHECK(s10.snngpp_spatial_std < s10.minima_spatial_std);
  }

  SECTION("histogram csv has one row per cell") {
    const std::string csv = histogram_to_csv(h10, study.grid);
    std::size_t rows = 0;
    for (char c : csv) rows += c == '\n' ? 1 : 0;
    CHECK(rows == 101);  // header + 100 cells
    CHECK(csv.rfind("batch_size,cell_index,alpha,minima_count,snngpp_count",
                    0) == 0);
  }

  SECTION("summary csv carries the std ratio column") {
    const std::string csv = summaries_to_csv(study);
    CHECK(csv.find("std_ratio") != std::string::npos);
  }
}

TEST_CASE("repeated full-batch study is deterministic") {
  Problem p = load_problem("iris", GOLS_TEST_DATA_DIR);
  ScanSpec spec;
  spec.repeats = 3;
  spec.batch_sizes = {150};
  LocalizationStudy a = localization_study(spec, p.arch, p.train);
  LocalizationStudy b = localization_study(spec, p.arch, p.train);
  CHECK(a.histograms[0].snngpp_counts == b.histograms[0].snngpp_counts);
  CHECK(a.histograms[0].minima_counts == b.histograms[0].minima_counts);
}

TEST_CASE("scan spec validation") {
  Problem p = load_problem("iris", GOLS_TEST_DATA_DIR);
  ScanSpec spec;
  spec.grid_points = 2;
  CHECK_THROWS_AS(localization_study(spec, p.arch, p.train), UsageError);
  spec = ScanSpec{};
  spec.batch_sizes = {0};
  CHECK_THROWS_AS(localization_study(spec, p.arch, p.train), UsageError);
  spec = ScanSpec{};
  spec.batch_sizes = {151};
  CHECK_THROWS_AS(localization_study(spec, p.arch, p.train), UsageError);
}

TEST_CASE("line-search acceptances land inside the estimated optimum ball") {
  // Estimate the region containing sign changes at |B| = 25 from the study,
  // then check that cold-started searches on fresh dynamic probes land in it
  // (padded by one eta factor, the search's own resolution).
  Problem p = load_problem("iris", GOLS_TEST_DATA_DIR);
  ScanSpec spec;
  spec.repeats = 50;
  spec.batch_sizes = {25};
  spec.init_seed = 1;
  spec.base_seed = 3;
  LocalizationStudy study = localization_study(spec, p.arch, p.train);

  double lo = 1e300, hi = 0.0;
  for (std::size_t i = 0; i < study.grid.size(); ++i) {
    if (study.histograms[0].snngpp_counts[i] > 0) {
      lo = std::min(lo, study.grid[i]);
      hi = std::max(hi, study.grid[i]);
    }
  }
  REQUIRE(lo < hi);

  std::vector<std::size_t> all(p.train.rows);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto x = init_params(p.arch, spec.init_seed);
  EvalResult g = evaluate(p.arch, x, p.train, all);
  std::vector<double> d(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) d[j] = -g.gradient[j];

  GolsConfig cfg;
  int inside = 0;
  for (int rep = 0; rep < 100; ++rep) {
    BatchSampler sampler(SamplerMode::Dynamic, p.train.rows, 25,
                         derive_seed(99, rep));
    LineProbe probe(p.arch, p.train, sampler, x, d);
    GolsOutcome out = search(probe, cfg.alpha_min, cfg);
    if (out.alpha_accepted >= lo / cfg.eta &&
        out.alpha_accepted <= hi * cfg.eta) {
      ++inside;
    }
  }
  CHECK(inside >= 90);
}
