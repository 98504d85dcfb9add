#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gols/detail/iris_data.hpp"
#include "gols/errors.hpp"
#include "gols/rng.hpp"

namespace gols {

// Observations in row-major layout. Targets are one-hot for multi-class
// problems and a single {0,1} column for binary ones.
struct Dataset {
  std::string name;
  std::size_t rows = 0;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::vector<double> inputs;   // rows x input_dim
  std::vector<double> targets;  // rows x output_dim

  std::span<const double> input_row(std::size_t i) const {
    return {inputs.data() + i * input_dim, input_dim};
  }
  std::span<const double> target_row(std::size_t i) const {
    return {targets.data() + i * output_dim, output_dim};
  }
};

// Per-column mean and population standard deviation, kept so a test split can
// be transformed with statistics from the training split.
struct ColumnStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

struct SplitSpec {
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  std::optional<std::uint64_t> shuffle_seed;
};

namespace detail {

inline double parse_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError("non-numeric field '" + std::string(tok) + "'", line);
  }
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline bool looks_numeric(std::string_view tok) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  return ec == std::errc{} && ptr == tok.data() + tok.size();
}

inline std::uint32_t read_be_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace detail

// Fisher's Iris: 150 observations, 4 features, 3 one-hot classes.
inline Dataset load_iris() {
  Dataset d;
  d.name = "iris";
  d.rows = 150;
  d.input_dim = 4;
  d.output_dim = 3;
  d.inputs.assign(detail::kIrisFeatures.begin(), detail::kIrisFeatures.end());
  d.targets.assign(d.rows * d.output_dim, 0.0);
  for (std::size_t i = 0; i < d.rows; ++i) {
    d.targets[i * 3 + static_cast<std::size_t>(detail::kIrisLabels[i])] = 1.0;
  }
  return d;
}

// Breast Cancer Wisconsin Diagnostic CSV: id, diagnosis ('M'/'B'), 30 numeric
// features per row; an optional header line is detected by a non-numeric
// first token. Targets are a single column with malignant = 1.
inline Dataset load_bcwd(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open BCWD file: " + path.string());

  Dataset d;
  d.name = "bcwd";
  d.input_dim = 30;
  d.output_dim = 1;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = detail::split_fields(line);
    if (lineno == 1 && !fields.empty() && !detail::looks_numeric(fields[0])) {
      continue;  // header
    }
    if (fields.size() != 32) {
      throw ParseError("expected 32 fields, got " +
                           std::to_string(fields.size()),
                       lineno);
    }
    std::string_view diag = fields[1];
    double target;
    if (diag == "M") {
      target = 1.0;
    } else if (diag == "B") {
      target = 0.0;
    } else {
      throw ParseError("diagnosis must be 'M' or 'B', got '" +
                           std::string(diag) + "'",
                       lineno);
    }
    for (std::size_t j = 0; j < 30; ++j) {
      d.inputs.push_back(detail::parse_double(fields[2 + j], lineno));
    }
    d.targets.push_back(target);
    ++d.rows;
  }
  if (d.rows == 0) throw DataError("BCWD file is empty: " + path.string());
  return d;
}

// IDX-format images + labels as published for MNIST. Pixels are scaled to
// [0,1]; labels become 10-way one-hot targets.
inline Dataset load_mnist_idx(const std::filesystem::path& images,
                              const std::filesystem::path& labels) {
  std::ifstream img(images, std::ios::binary);
  if (!img) throw DataError("cannot open IDX image file: " + images.string());
  std::ifstream lab(labels, std::ios::binary);
  if (!lab) throw DataError("cannot open IDX label file: " + labels.string());

  const std::uint32_t img_magic = detail::read_be_u32(img);
  if (img_magic != 0x00000803u) {
    throw DataError("bad IDX image magic: expected 0x00000803");
  }
  const std::uint32_t n_images = detail::read_be_u32(img);
  const std::uint32_t n_rows = detail::read_be_u32(img);
  const std::uint32_t n_cols = detail::read_be_u32(img);

  const std::uint32_t lab_magic = detail::read_be_u32(lab);
  if (lab_magic != 0x00000801u) {
    throw DataError("bad IDX label magic: expected 0x00000801");
  }
  const std::uint32_t n_labels = detail::read_be_u32(lab);
  if (n_images != n_labels) {
    throw DataError("IDX image/label count mismatch: " +
                    std::to_string(n_images) + " vs " +
                    std::to_string(n_labels));
  }

  Dataset d;
  d.name = "mnist";
  d.rows = n_images;
  d.input_dim = std::size_t(n_rows) * n_cols;
  d.output_dim = 10;
  d.inputs.resize(d.rows * d.input_dim);
  d.targets.assign(d.rows * 10, 0.0);

  std::vector<unsigned char> buf(d.input_dim);
  for (std::size_t i = 0; i < d.rows; ++i) {
    img.read(reinterpret_cast<char*>(buf.data()),
             static_cast<std::streamsize>(buf.size()));
    if (!img) throw DataError("IDX image file truncated");
    for (std::size_t j = 0; j < d.input_dim; ++j) {
      d.inputs[i * d.input_dim + j] = buf[j] / 255.0;
    }
    int label = lab.get();
    if (label < 0) throw DataError("IDX label file truncated");
    if (label > 9) throw DataError("IDX label out of range 0-9");
    d.targets[i * 10 + static_cast<std::size_t>(label)] = 1.0;
  }
  return d;
}

// Z-score each input column with mean / population stddev computed over the
// stats_from rows. Zero-variance columns map to all-zeros.
inline std::pair<Dataset, ColumnStats> standardize(
    const Dataset& d, std::span<const std::size_t> stats_from) {
  if (stats_from.empty()) throw UsageError("standardize: stats_from is empty");

  ColumnStats stats;
  stats.mean.assign(d.input_dim, 0.0);
  stats.stddev.assign(d.input_dim, 0.0);
  const double n = static_cast<double>(stats_from.size());
  for (std::size_t r : stats_from) {
    auto row = d.input_row(r);
    for (std::size_t j = 0; j < d.input_dim; ++j) stats.mean[j] += row[j];
  }
  for (std::size_t j = 0; j < d.input_dim; ++j) stats.mean[j] /= n;
  for (std::size_t r : stats_from) {
    auto row = d.input_row(r);
    for (std::size_t j = 0; j < d.input_dim; ++j) {
      const double c = row[j] - stats.mean[j];
      stats.stddev[j] += c * c;
    }
  }
  for (std::size_t j = 0; j < d.input_dim; ++j) {
    stats.stddev[j] = std::sqrt(stats.stddev[j] / n);
  }

  Dataset out = d;
  for (std::size_t i = 0; i < out.rows; ++i) {
    for (std::size_t j = 0; j < out.input_dim; ++j) {
      double& x = out.inputs[i * out.input_dim + j];
      x = stats.stddev[j] == 0.0 ? 0.0 : (x - stats.mean[j]) / stats.stddev[j];
    }
  }
  return {std::move(out), std::move(stats)};
}

// Transform with previously computed statistics (test split reuses the
// training-split record).
inline Dataset apply_standardization(const Dataset& d,
                                     const ColumnStats& stats) {
  Dataset out = d;
  for (std::size_t i = 0; i < out.rows; ++i) {
    for (std::size_t j = 0; j < out.input_dim; ++j) {
      double& x = out.inputs[i * out.input_dim + j];
      x = stats.stddev[j] == 0.0 ? 0.0 : (x - stats.mean[j]) / stats.stddev[j];
    }
  }
  return out;
}

// Disjoint train/test split. With a shuffle seed, rows are permuted by a
// seeded Fisher-Yates pass first; without one, file order is kept.
inline std::pair<Dataset, Dataset> split(const Dataset& d,
                                         const SplitSpec& spec) {
  if (spec.train_count == 0) throw UsageError("split: train_count must be > 0");
  if (spec.train_count + spec.test_count > d.rows) {
    throw UsageError("split: train_count + test_count exceeds dataset size");
  }
  std::vector<std::size_t> perm(d.rows);
  std::iota(perm.begin(), perm.end(), 0);
  if (spec.shuffle_seed) {
    SplitMix64 rng(*spec.shuffle_seed);
    for (std::size_t i = d.rows - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.next_index(i + 1)]);
    }
  }

  auto take = [&](std::size_t begin, std::size_t count, const char* suffix) {
    Dataset out;
    out.name = d.name + suffix;
    out.rows = count;
    out.input_dim = d.input_dim;
    out.output_dim = d.output_dim;
    out.inputs.reserve(count * d.input_dim);
    out.targets.reserve(count * d.output_dim);
    for (std::size_t k = 0; k < count; ++k) {
      auto in = d.input_row(perm[begin + k]);
      auto tg = d.target_row(perm[begin + k]);
      out.inputs.insert(out.inputs.end(), in.begin(), in.end());
      out.targets.insert(out.targets.end(), tg.begin(), tg.end());
    }
    return out;
  };
  return {take(0, spec.train_count, "-train"),
          take(spec.train_count, spec.test_count, "-test")};
}

// Expand a single {0,1} target column into two one-hot columns
// (class 1 maps to unit 1). Used by the two-output binary networks.
inline Dataset binary_to_onehot(const Dataset& d) {
  if (d.output_dim != 1) {
    throw UsageError("binary_to_onehot: dataset already has multiple outputs");
  }
  Dataset out = d;
  out.output_dim = 2;
  out.targets.assign(d.rows * 2, 0.0);
  for (std::size_t i = 0; i < d.rows; ++i) {
    out.targets[i * 2 + (d.targets[i] > 0.5 ? 1 : 0)] = 1.0;
  }
  return out;
}

}  // namespace gols
