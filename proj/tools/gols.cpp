// Command-line front end: reproducible training runs, directional-scan
// studies, and report aggregation, all emitting plot-ready CSV files.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gols/analyze.hpp"
#include "gols/csv.hpp"
#include "gols/line_search.hpp"
#include "gols/oracles.hpp"
#include "gols/presets.hpp"
#include "gols/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct TrainOptions {
  std::string preset = "bcwd-logr";
  std::string data_dir;
  std::string out_dir;
  std::string optimizer = "gols-i";
  std::string mode = "dynamic";
  std::size_t batch = 0;  // 0: preset default
  double fixed_alpha = 1.0;
  long budget = 0;  // 0: preset default
  int repeats = 10;
  std::uint64_t seed = 1;
  long cadence = 0;  // 0: auto
  std::size_t error_subsample = 0;
  int jobs = 1;
  bool no_reuse = false;
  gols::GolsConfig gols;
};

fs::path resolve_data_dir(const std::string& flag) {
  return flag.empty() ? gols::default_data_dir() : fs::path(flag);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw gols::DataError("cannot write: " + path.string());
  f << text;
}

json gols_config_json(const gols::GolsConfig& g) {
  return json{{"eta", g.eta},
              {"c2", g.c2},
              {"alpha_min", g.alpha_min},
              {"alpha_max_cap", g.alpha_max_cap}};
}

int cmd_train(const TrainOptions& opt) {
  gols::Problem problem =
      gols::load_problem(opt.preset, resolve_data_dir(opt.data_dir));

  gols::RunConfig cfg;
  cfg.arch = problem.arch;
  cfg.batch_size = opt.batch == 0 ? problem.default_batch : opt.batch;
  if (opt.mode == "full" || cfg.batch_size >= problem.train.rows) {
    cfg.mode = gols::SamplerMode::Full;
    cfg.batch_size = problem.train.rows;
  } else if (opt.mode == "static") {
    cfg.mode = gols::SamplerMode::Static;
  } else if (opt.mode == "dynamic") {
    cfg.mode = gols::SamplerMode::Dynamic;
  } else {
    throw gols::UsageError("mode must be full, static or dynamic");
  }
  cfg.optimizer = opt.optimizer == "fixed" ? gols::OptimizerKind::FixedStep
                                           : gols::OptimizerKind::GolsI;
  if (opt.optimizer != "fixed" && opt.optimizer != "gols-i") {
    throw gols::UsageError("opt must be gols-i or fixed");
  }
  cfg.fixed_alpha = opt.fixed_alpha;
  cfg.gols = opt.gols;
  cfg.reuse_prev_gradient = !opt.no_reuse;
  cfg.max_func_evals = opt.budget == 0 ? problem.default_budget : opt.budget;
  cfg.metric_cadence =
      opt.cadence == 0 ? std::max<long>(1, cfg.max_func_evals / 1000)
                       : opt.cadence;
  cfg.error_subsample = opt.error_subsample;
  cfg.validate();

  fs::path out = opt.out_dir.empty()
                     ? fs::path("runs") / (opt.preset + "-" + opt.optimizer)
                     : fs::path(opt.out_dir);
  fs::create_directories(out);

  json manifest{
      {"command", "train"},
      {"preset", opt.preset},
      {"optimizer", opt.optimizer},
      {"fixed_alpha", opt.fixed_alpha},
      {"mode", cfg.mode == gols::SamplerMode::Full
                   ? "full"
                   : (cfg.mode == gols::SamplerMode::Static ? "static"
                                                            : "dynamic")},
      {"batch_size", cfg.batch_size},
      {"budget", cfg.max_func_evals},
      {"metric_cadence", cfg.metric_cadence},
      {"error_subsample", cfg.error_subsample},
      {"repeats", opt.repeats},
      {"base_seed", opt.seed},
      {"reuse_prev_gradient", cfg.reuse_prev_gradient},
      {"gols", gols_config_json(cfg.gols)},
      {"bcwd_split_seed", gols::kBcwdSplitSeed},
  };
  json seeds = json::array();
  for (int k = 0; k < opt.repeats; ++k) {
    seeds.push_back({{"repeat", k},
                     {"init_seed", gols::derive_seed(opt.seed, 2 * k)},
                     {"sampler_seed", gols::derive_seed(opt.seed, 2 * k + 1)}});
  }
  manifest["seeds"] = seeds;
  write_text(out / "manifest.json", manifest.dump(2) + "\n");

  std::atomic<int> next(0);
  std::atomic<bool> failed(false);
  std::mutex print_mu;
  auto worker = [&]() {
    for (int k = next.fetch_add(1); k < opt.repeats; k = next.fetch_add(1)) {
      gols::RunConfig rc = cfg;
      rc.init_seed = gols::derive_seed(opt.seed, 2 * k);
      rc.sampler_seed = gols::derive_seed(opt.seed, 2 * k + 1);
      try {
        gols::RunResult r = gols::run(rc, problem.train, problem.test);
        const fs::path file =
            out / (opt.preset + "_r" + std::to_string(k) + ".csv");
        gols::write_records_csv(file, k, r.records);
        std::lock_guard<std::mutex> lock(print_mu);
        std::printf("run %d: %zu iterations, final loss %.6g%s -> %s\n", k,
                    r.records.size(), r.records.back().loss,
                    r.status == gols::RunStatus::Diverged ? " [diverged]" : "",
                    file.c_str());
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(print_mu);
        std::fprintf(stderr, "run %d failed: %s\n", k, e.what());
        failed = true;
      }
    }
  };
  const int n_workers = std::max(1, std::min(opt.jobs, opt.repeats));
  std::vector<std::thread> pool;
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return failed ? kExitNumeric : kExitOk;
}

struct LocalizeOptions {
  std::string preset = "iris";
  std::string data_dir;
  std::string out_dir = "runs/localize";
  std::size_t grid = 100;
  double spacing = 0.002;
  std::size_t repeats = 100;
  std::vector<std::size_t> batch_sizes;
  std::uint64_t seed = 1;
  std::uint64_t init_seed = 1;
  std::size_t warmup = 0;
  std::size_t within_cells = 5;
};

int cmd_localize(const LocalizeOptions& opt) {
  gols::Problem problem =
      gols::load_problem(opt.preset, resolve_data_dir(opt.data_dir));

  gols::ScanSpec spec;
  spec.grid_points = opt.grid;
  spec.spacing = opt.spacing;
  spec.repeats = opt.repeats;
  if (!opt.batch_sizes.empty()) {
    spec.batch_sizes = opt.batch_sizes;
  } else if (problem.train.rows != 150) {
    spec.batch_sizes = {10, problem.train.rows};
  }
  spec.init_seed = opt.init_seed;
  spec.base_seed = opt.seed;
  spec.warmup_iterations = opt.warmup;
  spec.within_cells = opt.within_cells;
  spec.validate(problem.train.rows);

  fs::path out(opt.out_dir);
  fs::create_directories(out);
  json manifest{{"command", "localize"},
                {"preset", opt.preset},
                {"grid_points", spec.grid_points},
                {"spacing", spec.spacing},
                {"repeats", spec.repeats},
                {"batch_sizes", spec.batch_sizes},
                {"init_seed", spec.init_seed},
                {"base_seed", spec.base_seed},
                {"warmup_iterations", spec.warmup_iterations},
                {"within_cells", spec.within_cells}};
  write_text(out / "manifest.json", manifest.dump(2) + "\n");

  gols::LocalizationStudy study =
      gols::localization_study(spec, problem.arch, problem.train);
  for (const auto& hist : study.histograms) {
    write_text(out / ("hist_b" + std::to_string(hist.batch_size) + ".csv"),
               gols::histogram_to_csv(hist, study.grid));
  }
  write_text(out / "summary.csv", gols::summaries_to_csv(study));
  std::printf("true optimum cell: %zu (found=%d)\n", study.true_optimum_cell,
              study.true_optimum_found ? 1 : 0);
  for (const auto& s : study.summaries) {
    std::printf(
        "|B|=%zu: sign-change std %.5f, minima std %.5f, per-repeat %.2f\n",
        s.batch_size, s.snngpp_spatial_std, s.minima_spatial_std,
        s.snngpp_per_repeat);
  }
  std::printf("wrote %zu histogram files to %s\n", study.histograms.size(),
              out.c_str());
  return kExitOk;
}

struct ScanOptions {
  std::string preset = "iris";
  std::string data_dir;
  std::string out_file = "scan.csv";
  std::string mode = "dynamic";
  std::size_t batch = 10;
  std::size_t grid = 100;
  double spacing = 0.002;
  std::uint64_t seed = 1;
  std::uint64_t init_seed = 1;
  bool surface = false;
  std::size_t surface_i = 8;
  std::size_t surface_j = 9;
  std::size_t surface_n = 41;
  double surface_span = 2.0;
};

int cmd_scan(const ScanOptions& opt) {
  gols::Problem problem =
      gols::load_problem(opt.preset, resolve_data_dir(opt.data_dir));
  auto x = gols::init_params(problem.arch, opt.init_seed);

  gols::SamplerMode mode = gols::SamplerMode::Dynamic;
  if (opt.mode == "full") {
    mode = gols::SamplerMode::Full;
  } else if (opt.mode == "static") {
    mode = gols::SamplerMode::Static;
  } else if (opt.mode != "dynamic") {
    throw gols::UsageError("mode must be full, static or dynamic");
  }

  if (opt.surface) {
    // Loss surface over two chosen coordinates, with the directional
    // derivative along the diagonal unit direction in that plane.
    if (opt.surface_i >= x.size() || opt.surface_j >= x.size()) {
      throw gols::UsageError("surface dims exceed parameter count");
    }
    std::vector<double> dir(x.size(), 0.0);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    dir[opt.surface_i] = inv_sqrt2;
    dir[opt.surface_j] = inv_sqrt2;
    gols::BatchSampler sampler(mode, problem.train.rows, opt.batch, opt.seed);
    std::string csv = "wi,wj,F,Fprime_diag\n";
    std::vector<double> point = x;
    for (std::size_t a = 0; a < opt.surface_n; ++a) {
      for (std::size_t b = 0; b < opt.surface_n; ++b) {
        const double da =
            -opt.surface_span + 2.0 * opt.surface_span * static_cast<double>(a) /
                                    static_cast<double>(opt.surface_n - 1);
        const double db =
            -opt.surface_span + 2.0 * opt.surface_span * static_cast<double>(b) /
                                    static_cast<double>(opt.surface_n - 1);
        point[opt.surface_i] = x[opt.surface_i] + da;
        point[opt.surface_j] = x[opt.surface_j] + db;
        gols::EvalResult r =
            gols::evaluate(problem.arch, point, problem.train, sampler.draw());
        const double slope =
            inv_sqrt2 * (r.gradient[opt.surface_i] + r.gradient[opt.surface_j]);
        gols::detail::append_double(csv, da);
        csv += ',';
        gols::detail::append_double(csv, db);
        csv += ',';
        gols::detail::append_double(csv, r.loss);
        csv += ',';
        gols::detail::append_double(csv, slope);
        csv += '\n';
      }
    }
    write_text(opt.out_file, csv);
    std::printf("wrote %zux%zu surface grid to %s\n", opt.surface_n,
                opt.surface_n, opt.out_file.c_str());
    return kExitOk;
  }

  std::vector<std::size_t> all(problem.train.rows);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  gols::EvalResult g = gols::evaluate(problem.arch, x, problem.train, all);
  std::vector<double> d(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) d[j] = -g.gradient[j];

  gols::BatchSampler sampler(mode, problem.train.rows, opt.batch, opt.seed);
  gols::LineProbe probe(problem.arch, problem.train, sampler, x, d);
  std::vector<double> grid(opt.grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = static_cast<double>(i) * opt.spacing;
  }
  std::string csv = "alpha,F,Fprime,batch_seq\n";
  for (const gols::ScanPoint& ptn : probe.scan(grid)) {
    gols::detail::append_double(csv, ptn.alpha);
    csv += ',';
    gols::detail::append_double(csv, ptn.value);
    csv += ',';
    gols::detail::append_double(csv, ptn.slope);
    csv += ',';
    gols::detail::append_long(csv, ptn.batch_seq);
    csv += '\n';
  }
  write_text(opt.out_file, csv);
  std::printf("wrote %zu scan points to %s\n", grid.size(),
              opt.out_file.c_str());
  return kExitOk;
}

struct CsvRun {
  std::string file;
  std::vector<gols::TrainRecord> records;
  std::vector<std::string> terms;  // owning storage for term strings
};

CsvRun read_run_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw gols::DataError("cannot open " + path.string());
  CsvRun out;
  out.file = path.filename().string();
  std::string line;
  std::getline(in, line);  // header
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        f.push_back(line.substr(start));
        break;
      }
      f.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (f.size() != 9) {
      throw gols::ParseError("expected 9 columns in " + path.string(), lineno);
    }
    gols::TrainRecord r;
    r.n = std::stol(f[1]);
    r.cum_fe = std::stol(f[2]);
    r.loss = std::stod(f[3]);
    r.train_err = std::stod(f[4]);
    r.test_err = f[5] == "nan" ? std::nan("") : std::stod(f[5]);
    r.alpha = std::stod(f[6]);
    r.evals = std::stol(f[7]);
    out.terms.push_back(f[8]);
    out.records.push_back(r);
  }
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    out.records[i].term = out.terms[i].c_str();
  }
  return out;
}

int cmd_report(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw gols::DataError("not a directory: " + dir);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".csv" &&
        entry.path().filename() != "summary.csv" &&
        entry.path().filename().string().rfind("hist_", 0) != 0) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw gols::DataError("no run CSV files in " + dir);

  std::printf("%-28s %6s %8s %8s %8s %8s %12s %10s %10s\n", "file", "iters",
              "min_fe", "max_fe", "mean_fe", "first_fe", "final_loss",
              "train_err", "test_err");
  long gmin = 0, gmax = 0;
  double gmean = 0.0;
  std::size_t git = 0;
  bool first = true;
  for (const fs::path& f : files) {
    CsvRun r = read_run_csv(f);
    gols::FeItStats s = gols::fe_per_iteration(r.records);
    const gols::TrainRecord& last = r.records.back();
    std::printf("%-28s %6zu %8ld %8ld %8.2f %8ld %12.4e %10.4f %10.4f\n",
                r.file.c_str(), s.iterations, s.min_evals, s.max_evals,
                s.mean_evals, s.first_iteration_evals, last.loss,
                last.train_err, last.test_err);
    if (first) {
      gmin = s.min_evals;
      gmax = s.max_evals;
      first = false;
    } else {
      gmin = std::min(gmin, s.min_evals);
      gmax = std::max(gmax, s.max_evals);
    }
    gmean += s.mean_evals * static_cast<double>(s.iterations);
    git += s.iterations;
  }
  std::printf("%-28s %6zu %8ld %8ld %8.2f\n", "(all runs)", git, gmin, gmax,
              git == 0 ? 0.0 : gmean / static_cast<double>(git));
  return kExitOk;
}

int cmd_verify(const std::string& data_dir) {
  int failures = 0;
  auto report = [&](const char* name, bool ok) {
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", name);
    failures += ok ? 0 : 1;
  };

  // Backprop vs central differences on a BCWD logistic model.
  gols::Problem p = gols::load_problem("bcwd-logr", resolve_data_dir(data_dir));
  auto x = gols::init_params(p.arch, 7);
  std::vector<std::size_t> batch = {0, 5, 11, 42, 99};
  gols::EvalResult r = gols::evaluate(p.arch, x, p.train, batch);
  auto fd = gols::oracles::fd_model_gradient(p.arch, x, p.train, batch);
  double worst = 0.0;
  for (std::size_t j = 0; j < fd.size(); ++j) {
    worst = std::max(worst, std::abs(fd[j] - r.gradient[j]) /
                                std::max(1.0, std::abs(r.gradient[j])));
  }
  report("gradient matches finite differences (rel err < 1e-6)", worst < 1e-6);

  // Singleton-batch expectation identity on iris.
  gols::Problem iris = gols::load_problem("iris", resolve_data_dir(data_dir));
  auto xi = gols::init_params(iris.arch, 3);
  auto [eloss, egrad] =
      gols::oracles::exhaustive_expectation(iris.arch, xi, iris.train);
  std::vector<std::size_t> all(iris.train.rows);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  gols::EvalResult full = gols::evaluate(iris.arch, xi, iris.train, all);
  double gap = std::abs(eloss - full.loss);
  for (std::size_t j = 0; j < egrad.size(); ++j) {
    gap = std::max(gap, std::abs(egrad[j] - full.gradient[j]));
  }
  report("singleton average equals full batch (1e-12)", gap < 1e-12);

  // Search bracket against the brute-force scan.
  auto fprime = [](double a) { return std::tanh(a - 2.0); };
  auto root = gols::oracles::brute_sign_change(fprime, 0.0, 10.0, 100001);
  gols::oracles::ScalarLine line{fprime, 1e-3};
  gols::GolsConfig gc;
  gols::GolsOutcome out = gols::search(line, 1e-4, gc);
  report("search lands within eta of the brute-force root",
         root.has_value() && out.alpha_accepted <= *root * gc.eta &&
             out.alpha_accepted >= *root / gc.eta);

  return failures == 0 ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-only line-search training experiments"};
  app.require_subcommand(1);

  TrainOptions topt;
  CLI::App* train = app.add_subcommand("train", "Run training repeats");
  train->add_option("--preset", topt.preset,
                    "bcwd-logr | bcwd-netpi | bcwd-netpii | netpi-deep10 | "
                    "iris | mnist-neti | mnist-netii");
  train->add_option("--data-dir", topt.data_dir,
                    "dataset directory (default $GOLS_DATA_DIR or ./data)");
  train->add_option("--out", topt.out_dir, "output directory");
  train->add_option("--opt", topt.optimizer, "gols-i | fixed");
  train->add_option("--alpha", topt.fixed_alpha, "fixed step size");
  train->add_option("--mode", topt.mode, "dynamic | static | full");
  train->add_option("--batch", topt.batch, "mini-batch size |B|");
  train->add_option("--budget", topt.budget, "function evaluation budget");
  train->add_option("--repeats", topt.repeats, "number of runs")
      ->check(CLI::PositiveNumber);
  train->add_option("--seed", topt.seed, "base seed");
  train->add_option("--cadence", topt.cadence, "metric recompute cadence (FE)");
  train->add_option("--error-subsample", topt.error_subsample,
                    "classification-error subsample size (0 = all)");
  train->add_option("--jobs", topt.jobs, "parallel repeat workers");
  train->add_flag("--no-reuse-prev-gradient", topt.no_reuse,
                  "charge F'(0) as a fresh evaluation");
  train->add_option("--eta", topt.gols.eta, "step scaling factor");
  train->add_option("--c2", topt.gols.c2, "immediate-accept factor");
  train->add_option("--alpha-min", topt.gols.alpha_min, "minimum step size");
  train->add_option("--alpha-max-cap", topt.gols.alpha_max_cap,
                    "absolute maximum step size");

  LocalizeOptions lopt;
  CLI::App* localize =
      app.add_subcommand("localize", "Minima / sign-change localization study");
  localize->add_option("--preset", lopt.preset, "dataset preset");
  localize->add_option("--data-dir", lopt.data_dir, "dataset directory");
  localize->add_option("--out", lopt.out_dir, "output directory");
  localize->add_option("--grid", lopt.grid, "grid points (min 3)")
      ->check(CLI::Range(std::size_t(3), std::size_t(1000000)));
  localize->add_option("--spacing", lopt.spacing, "grid spacing");
  localize->add_option("--repeats", lopt.repeats, "scan repeats")
      ->check(CLI::PositiveNumber);
  localize
      ->add_option("--batch-sizes", lopt.batch_sizes,
                   "comma-separated batch sizes")
      ->delimiter(',');
  localize->add_option("--seed", lopt.seed, "base seed for repeats");
  localize->add_option("--init-seed", lopt.init_seed, "reference point seed");
  localize->add_option("--warmup", lopt.warmup,
                       "full-batch warm-up iterations before the scan");
  localize->add_option("--within-cells", lopt.within_cells,
                       "summary band half-width in cells");

  ScanOptions sopt;
  CLI::App* scan = app.add_subcommand("scan", "Single directional scan to CSV");
  scan->add_option("--preset", sopt.preset, "dataset preset");
  scan->add_option("--data-dir", sopt.data_dir, "dataset directory");
  scan->add_option("--out", sopt.out_file, "output CSV file");
  scan->add_option("--mode", sopt.mode, "dynamic | static | full");
  scan->add_option("--batch", sopt.batch, "mini-batch size");
  scan->add_option("--grid", sopt.grid, "grid points");
  scan->add_option("--spacing", sopt.spacing, "grid spacing");
  scan->add_option("--seed", sopt.seed, "sampler seed");
  scan->add_option("--init-seed", sopt.init_seed, "parameter seed");
  scan->add_flag("--surface", sopt.surface, "emit a 2-D weight-plane grid");
  scan->add_option(
          "--surface-dims",
          [&sopt](CLI::results_t vals) {
            if (vals.size() != 2) return false;
            sopt.surface_i = std::stoul(vals[0]);
            sopt.surface_j = std::stoul(vals[1]);
            return true;
          },
          "two parameter indices for the surface")
      ->expected(2);
  scan->add_option("--surface-n", sopt.surface_n,
                   "surface grid points per axis");
  scan->add_option("--surface-span", sopt.surface_span,
                   "surface half-width around the seeded point");

  std::string report_dir;
  CLI::App* report = app.add_subcommand("report", "Summarize run CSVs");
  report->add_option("dir", report_dir, "directory of run CSVs")->required();

  std::string verify_data_dir;
  CLI::App* verify = app.add_subcommand("verify", "Oracle spot checks");
  verify->add_option("--data-dir", verify_data_dir, "dataset directory");
  verify->group("");  // hidden

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (train->parsed()) return cmd_train(topt);
    if (localize->parsed()) return cmd_localize(lopt);
    if (scan->parsed()) return cmd_scan(sopt);
    if (report->parsed()) return cmd_report(report_dir);
    if (verify->parsed()) return cmd_verify(verify_data_dir);
  } catch (const gols::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const gols::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const gols::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitOk;
}
