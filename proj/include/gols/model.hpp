#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gols/dataset.hpp"
#include "gols/errors.hpp"
#include "gols/rng.hpp"

namespace gols {

enum class Activation { Sigmoid, Tanh };
enum class Loss { Bce, Mse };

// Fully connected feedforward network; an empty hidden part gives logistic
// regression. Biases exist on every non-input layer. For BCE the output
// sigmoid is fused into the loss (evaluated on pre-activations); for MSE the
// output layer applies output_activation directly.
struct Architecture {
  std::vector<std::size_t> layer_widths;  // input, hidden..., output
  Activation hidden_activation = Activation::Sigmoid;
  Activation output_activation = Activation::Sigmoid;
  Loss loss = Loss::Bce;
  double init_std = 1.0;

  std::size_t input_dim() const { return layer_widths.front(); }
  std::size_t output_dim() const { return layer_widths.back(); }
  std::size_t layer_count() const { return layer_widths.size() - 1; }

  std::size_t param_count() const {
    std::size_t p = 0;
    for (std::size_t l = 1; l < layer_widths.size(); ++l) {
      p += (layer_widths[l - 1] + 1) * layer_widths[l];
    }
    return p;
  }

  void validate() const {
    if (layer_widths.size() < 2) {
      throw UsageError("architecture: need at least input and output widths");
    }
    for (std::size_t w : layer_widths) {
      if (w == 0) throw UsageError("architecture: zero layer width");
    }
    if (loss == Loss::Bce && output_activation != Activation::Sigmoid) {
      throw UsageError("architecture: BCE requires sigmoid outputs");
    }
  }
};

struct EvalResult {
  double loss = 0.0;
  std::vector<double> gradient;
  std::vector<std::size_t> batch_used;
};

// Hidden-layer structure, activations, loss and init scale per named preset.
// Input/output widths come from the problem. "NetPI-deep10" is NetPI with the
// single hidden layer repeated ten times.
inline Architecture arch_preset(std::string_view name, std::size_t input_dim,
                                std::size_t output_dim) {
  Architecture a;
  auto widths = [&](std::vector<std::size_t> hidden) {
    a.layer_widths.clear();
    a.layer_widths.push_back(input_dim);
    a.layer_widths.insert(a.layer_widths.end(), hidden.begin(), hidden.end());
    a.layer_widths.push_back(output_dim);
  };
  if (name == "LogR") {
    widths({});
    a.loss = Loss::Bce;
  } else if (name == "NetPI") {
    widths({32});
    a.loss = Loss::Bce;
  } else if (name == "NetPII") {
    widths({32});
    a.loss = Loss::Mse;
  } else if (name == "NetI") {
    widths({800});
    a.loss = Loss::Bce;
  } else if (name == "NetII") {
    widths({1000, 500, 250});
    a.hidden_activation = Activation::Tanh;
    a.output_activation = Activation::Tanh;
    a.loss = Loss::Mse;
    a.init_std = std::sqrt(0.1);
  } else if (name == "NetPI-deep10") {
    widths(std::vector<std::size_t>(10, 32));
    a.loss = Loss::Bce;
  } else {
    throw UsageError("unknown architecture preset: " + std::string(name));
  }
  a.validate();
  return a;
}

namespace detail {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double softplus(double z) {
  return std::fmax(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

inline double activate(Activation kind, double z) {
  return kind == Activation::Sigmoid ? sigmoid(z) : std::tanh(z);
}

// Derivative expressed through the activated value.
inline double activate_grad(Activation kind, double y) {
  return kind == Activation::Sigmoid ? y * (1.0 - y) : 1.0 - y * y;
}

// Offset of layer l's weight block in the flat parameter vector.
inline std::size_t layer_offset(const Architecture& a, std::size_t l) {
  std::size_t off = 0;
  for (std::size_t k = 1; k <= l; ++k) {
    off += (a.layer_widths[k - 1] + 1) * a.layer_widths[k];
  }
  return off;
}

struct Workspace {
  std::vector<std::vector<double>> pre;    // z per layer (1..L)
  std::vector<std::vector<double>> act;    // activated values per layer
  std::vector<std::vector<double>> delta;  // dLoss/dz per layer

  explicit Workspace(const Architecture& a) {
    const std::size_t L = a.layer_count();
    pre.resize(L + 1);
    act.resize(L + 1);
    delta.resize(L + 1);
    for (std::size_t l = 1; l <= L; ++l) {
      pre[l].resize(a.layer_widths[l]);
      act[l].resize(a.layer_widths[l]);
      delta[l].resize(a.layer_widths[l]);
    }
  }
};

inline void forward_obs(const Architecture& a, std::span<const double> x,
                        std::span<const double> input, Workspace& ws) {
  const std::size_t L = a.layer_count();
  std::span<const double> prev = input;
  for (std::size_t l = 1; l <= L; ++l) {
    const std::size_t in = a.layer_widths[l - 1];
    const std::size_t out = a.layer_widths[l];
    const std::size_t off = layer_offset(a, l - 1);
    const double* W = x.data() + off;
    const double* b = W + in * out;
    for (std::size_t o = 0; o < out; ++o) {
      double z = b[o];
      const double* w_row = W + o * in;
      for (std::size_t i = 0; i < in; ++i) z += w_row[i] * prev[i];
      if (!std::isfinite(z)) {
        throw NumericError("non-finite pre-activation in layer " +
                           std::to_string(l));
      }
      ws.pre[l][o] = z;
      if (l < L) {
        ws.act[l][o] = activate(a.hidden_activation, z);
      } else if (a.loss == Loss::Mse) {
        ws.act[l][o] = activate(a.output_activation, z);
      } else {
        ws.act[l][o] = sigmoid(z);  // probability; loss uses pre[l] directly
      }
    }
    prev = ws.act[l];
  }
}

inline double obs_loss(const Architecture& a, std::span<const double> target,
                       const Workspace& ws) {
  const std::size_t L = a.layer_count();
  const std::size_t K = a.output_dim();
  double loss = 0.0;
  if (a.loss == Loss::Bce) {
    for (std::size_t o = 0; o < K; ++o) {
      loss += softplus(ws.pre[L][o]) - target[o] * ws.pre[L][o];
    }
  } else {
    for (std::size_t o = 0; o < K; ++o) {
      const double e = ws.act[L][o] - target[o];
      loss += e * e;
    }
  }
  return loss / static_cast<double>(K);
}

}  // namespace detail

// All weights and biases drawn i.i.d. N(0, init_std^2) in flat layer order.
inline std::vector<double> init_params(const Architecture& a,
                                       std::uint64_t seed) {
  a.validate();
  std::vector<double> x(a.param_count());
  SplitMix64 rng(seed);
  for (double& v : x) v = a.init_std * rng.next_gaussian();
  return x;
}

// Batch loss L(x) = (1/|B|) sum of per-observation losses and the matching
// exact backpropagation gradient. Duplicate indices contribute multiply.
inline EvalResult evaluate(const Architecture& a, std::span<const double> x,
                           const Dataset& d,
                           std::span<const std::size_t> batch) {
  a.validate();
  if (batch.empty()) throw UsageError("evaluate: empty batch");
  if (x.size() != a.param_count()) {
    throw UsageError("evaluate: parameter vector has wrong length");
  }
  if (d.input_dim != a.input_dim() || d.output_dim != a.output_dim()) {
    throw UsageError("evaluate: dataset dimensions do not match architecture");
  }

  const std::size_t L = a.layer_count();
  const std::size_t K = a.output_dim();
  detail::Workspace ws(a);
  EvalResult res;
  res.gradient.assign(x.size(), 0.0);
  res.batch_used.assign(batch.begin(), batch.end());

  for (std::size_t idx : batch) {
    auto input = d.input_row(idx);
    auto target = d.target_row(idx);
    detail::forward_obs(a, x, input, ws);
    res.loss += detail::obs_loss(a, target, ws);

    // Output delta = dLoss/dz on the last layer.
    for (std::size_t o = 0; o < K; ++o) {
      if (a.loss == Loss::Bce) {
        ws.delta[L][o] = (ws.act[L][o] - target[o]) / static_cast<double>(K);
      } else {
        ws.delta[L][o] = 2.0 * (ws.act[L][o] - target[o]) /
                         static_cast<double>(K) *
                         detail::activate_grad(a.output_activation,
                                               ws.act[L][o]);
      }
    }
    for (std::size_t l = L; l >= 1; --l) {
      const std::size_t in = a.layer_widths[l - 1];
      const std::size_t out = a.layer_widths[l];
      const std::size_t off = detail::layer_offset(a, l - 1);
      double* gW = res.gradient.data() + off;
      double* gb = gW + in * out;
      std::span<const double> prev =
          l == 1 ? input : std::span<const double>(ws.act[l - 1]);
      for (std::size_t o = 0; o < out; ++o) {
        const double dz = ws.delta[l][o];
        double* g_row = gW + o * in;
        for (std::size_t i = 0; i < in; ++i) g_row[i] += dz * prev[i];
        gb[o] += dz;
      }
      if (l > 1) {
        const double* W = x.data() + off;
        for (std::size_t i = 0; i < in; ++i) {
          double s = 0.0;
          for (std::size_t o = 0; o < out; ++o) {
            s += W[o * in + i] * ws.delta[l][o];
          }
          ws.delta[l - 1][i] =
              s * detail::activate_grad(a.hidden_activation, ws.act[l - 1][i]);
        }
      }
    }
  }

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  res.loss *= inv_b;
  for (double& g : res.gradient) g *= inv_b;
  if (!std::isfinite(res.loss)) throw NumericError("non-finite batch loss");
  return res;
}

// Forward-only batch loss; does not touch the backward path.
inline double loss_value(const Architecture& a, std::span<const double> x,
                         const Dataset& d,
                         std::span<const std::size_t> batch) {
  if (batch.empty()) throw UsageError("loss_value: empty batch");
  detail::Workspace ws(a);
  double loss = 0.0;
  for (std::size_t idx : batch) {
    detail::forward_obs(a, x, d.input_row(idx), ws);
    loss += detail::obs_loss(a, d.target_row(idx), ws);
  }
  return loss / static_cast<double>(batch.size());
}

// Fraction misclassified (argmax for multi-output, threshold 0.5 for a single
// output) plus a 1e-4 nugget so a perfect classifier reports exactly 1e-4.
inline double classification_error(const Architecture& a,
                                   std::span<const double> x, const Dataset& d,
                                   std::span<const std::size_t> subsample = {}) {
  detail::Workspace ws(a);
  const std::size_t L = a.layer_count();
  const std::size_t K = a.output_dim();
  std::vector<std::size_t> all;
  if (subsample.empty()) {
    all.resize(d.rows);
    for (std::size_t i = 0; i < d.rows; ++i) all[i] = i;
    subsample = all;
  }
  std::size_t wrong = 0;
  for (std::size_t idx : subsample) {
    detail::forward_obs(a, x, d.input_row(idx), ws);
    auto target = d.target_row(idx);
    bool miss;
    if (K == 1) {
      miss = (ws.act[L][0] >= 0.5) != (target[0] >= 0.5);
    } else {
      std::size_t pred = 0, truth = 0;
      for (std::size_t o = 1; o < K; ++o) {
        if (ws.act[L][o] > ws.act[L][pred]) pred = o;
        if (target[o] > target[truth]) truth = o;
      }
      miss = pred != truth;
    }
    wrong += miss ? 1 : 0;
  }
  return static_cast<double>(wrong) / static_cast<double>(subsample.size()) +
         1e-4;
}

// Per-layer weight/bias matrices from the flat vector and back; the pair is
// an exact inverse.
inline std::vector<std::pair<std::vector<double>, std::vector<double>>>
unpack_params(const Architecture& a, std::span<const double> x) {
  std::vector<std::pair<std::vector<double>, std::vector<double>>> layers;
  for (std::size_t l = 1; l <= a.layer_count(); ++l) {
    const std::size_t in = a.layer_widths[l - 1];
    const std::size_t out = a.layer_widths[l];
    const std::size_t off = detail::layer_offset(a, l - 1);
    layers.emplace_back(
        std::vector<double>(x.begin() + off, x.begin() + off + in * out),
        std::vector<double>(x.begin() + off + in * out,
                            x.begin() + off + (in + 1) * out));
  }
  return layers;
}

inline std::vector<double> pack_params(
    const Architecture& a,
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>&
        layers) {
  std::vector<double> x;
  x.reserve(a.param_count());
  for (const auto& [w, b] : layers) {
    x.insert(x.end(), w.begin(), w.end());
    x.insert(x.end(), b.begin(), b.end());
  }
  return x;
}

}  // namespace gols
