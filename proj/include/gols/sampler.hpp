#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "gols/errors.hpp"
#include "gols/rng.hpp"

namespace gols {

// Full: every draw returns the whole index set. Static: a pinned batch that
// only changes on refresh(). Dynamic: a fresh batch for every draw, sampled
// uniformly with replacement.
enum class SamplerMode { Full, Static, Dynamic };

class BatchSampler {
 public:
  BatchSampler(SamplerMode mode, std::size_t dataset_rows,
               std::size_t batch_size, std::uint64_t seed)
      : mode_(mode), rows_(dataset_rows), batch_size_(batch_size), rng_(seed) {
    if (rows_ == 0) throw UsageError("sampler: dataset is empty");
    if (mode_ != SamplerMode::Full) {
      if (batch_size_ < 1 || batch_size_ > rows_) {
        throw UsageError("sampler: batch_size must be in [1, dataset rows]");
      }
    }
    if (mode_ == SamplerMode::Static) resample_static();
  }

  SamplerMode mode() const { return mode_; }
  std::size_t batch_size() const {
    return mode_ == SamplerMode::Full ? rows_ : batch_size_;
  }

  // Dynamic draws advance the seeded stream by exactly batch_size steps;
  // duplicates are kept, |B| is exact.
  std::vector<std::size_t> draw() {
    switch (mode_) {
      case SamplerMode::Full: {
        std::vector<std::size_t> all(rows_);
        std::iota(all.begin(), all.end(), 0);
        return all;
      }
      case SamplerMode::Static:
        return static_batch_;
      case SamplerMode::Dynamic:
      default: {
        std::vector<std::size_t> b(batch_size_);
        for (std::size_t& v : b) v = rng_.next_index(rows_);
        return b;
      }
    }
  }

  // Re-pins the static batch at an iteration boundary.
  void refresh() {
    if (mode_ != SamplerMode::Static) {
      throw UsageError("sampler: refresh is only valid in Static mode");
    }
    resample_static();
  }

 private:
  void resample_static() {
    static_batch_.resize(batch_size_);
    for (std::size_t& v : static_batch_) v = rng_.next_index(rows_);
  }

  SamplerMode mode_;
  std::size_t rows_;
  std::size_t batch_size_;
  SplitMix64 rng_;
  std::vector<std::size_t> static_batch_;
};

}  // namespace gols
