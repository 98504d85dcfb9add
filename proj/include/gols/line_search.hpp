#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "gols/errors.hpp"
#include "gols/probe.hpp"

namespace gols {

struct GolsConfig {
  double eta = 2.0;          // step scaling factor
  double c2 = 0.9;           // immediate-accept tolerance factor
  double alpha_min = 1e-8;   // lower step bound
  double alpha_max_cap = 1e7;  // absolute upper step bound

  void validate() const {
    if (!(eta > 1.0)) throw UsageError("gols: eta must be > 1");
    if (!(c2 > 0.0)) throw UsageError("gols: c2 must be > 0");
    if (!(alpha_min > 0.0) || !(alpha_min < alpha_max_cap)) {
      throw UsageError("gols: need 0 < alpha_min < alpha_max_cap");
    }
  }
};

enum class StopReason {
  ImmediateAccept,  // 0 < F'(alpha_0) < c2 |F'(0)|
  SignChangeUp,     // growth found F' >= 0
  SignChangeDown,   // shrinking found F' < 0
  MaxAlphaClamp,    // growth stopped at the upper step bound
  MinAlphaClamp,    // shrinking stopped at the lower step bound
};

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::ImmediateAccept: return "immediate_accept";
    case StopReason::SignChangeUp: return "sign_change_up";
    case StopReason::SignChangeDown: return "sign_change_down";
    case StopReason::MaxAlphaClamp: return "max_alpha_clamp";
    case StopReason::MinAlphaClamp: return "min_alpha_clamp";
  }
  return "unknown";
}

struct GolsOutcome {
  double alpha_accepted = 0.0;
  long evals = 0;  // directional-derivative evaluations charged to this search
  StopReason termination = StopReason::ImmediateAccept;
  double fprime_at_zero = 0.0;
  double fprime_at_accept = 0.0;
};

// Upper step bound: conservative Lipschitz-style 1/||d|| capped at
// alpha_max_cap. A zero direction yields the cap.
inline double alpha_max_for(double direction_norm, const GolsConfig& cfg) {
  if (direction_norm <= 0.0) return cfg.alpha_max_cap;
  return std::min(1.0 / direction_norm, cfg.alpha_max_cap);
}

// Gradient-only inexact line search. Starting from a clamped initial guess,
// the step is doubled while F' < 0 and halved while F' > 0 (factor eta) until
// a negative-to-positive sign change is bracketed or a step bound binds. An
// initial accept shortcut takes the guess outright when
// 0 < F'(alpha_0) < c2 |F'(0)|.
//
// `line` needs eval_at(alpha) -> LineSample and direction_norm().
// `reuse_fprime0` supplies F'(0) from an already-computed gradient (no
// evaluation cost); otherwise one evaluation at alpha = 0 is charged.
template <typename Line>
GolsOutcome search(Line& line, double alpha_guess, const GolsConfig& cfg,
                   std::optional<double> reuse_fprime0 = std::nullopt) {
  cfg.validate();
  if (!(alpha_guess > 0.0) || !std::isfinite(alpha_guess)) {
    throw UsageError("gols: alpha_guess must be finite and > 0");
  }

  GolsOutcome out;
  if (line.direction_norm() == 0.0) {
    // Degenerate direction: every F' is 0 and no sign change exists.
    out.alpha_accepted = cfg.alpha_min;
    out.termination = StopReason::MinAlphaClamp;
    return out;
  }

  const double alpha_max = alpha_max_for(line.direction_norm(), cfg);
  auto slope_at = [&](double alpha) {
    const double s = line.eval_at(alpha).slope;
    ++out.evals;
    if (!std::isfinite(s)) {
      throw NumericError("gols: non-finite directional derivative at alpha = " +
                         std::to_string(alpha));
    }
    return s;
  };

  double fp0;
  if (reuse_fprime0) {
    fp0 = *reuse_fprime0;
  } else {
    fp0 = slope_at(0.0);
  }
  out.fprime_at_zero = fp0;

  double alpha = std::clamp(alpha_guess, cfg.alpha_min, alpha_max);
  double fpa = slope_at(alpha);
  const double tol_dd = std::abs(cfg.c2 * fp0);

  // Branch selection. Default is shrink; a negative slope grows instead (a
  // guess clamped to alpha_min still participates in growth); the immediate
  // accept condition is checked last and overrides.
  int flag = 1;
  if (fpa < 0.0) flag = 2;
  if (fpa > 0.0 && fpa < tol_dd) flag = 0;

  if (flag == 0) {
    out.alpha_accepted = alpha;
    out.termination = StopReason::ImmediateAccept;
    out.fprime_at_accept = fpa;
    return out;
  }

  if (flag == 2) {
    // Grow by eta until F' >= 0; never step past alpha_max.
    for (;;) {
      if (alpha * cfg.eta > alpha_max) {
        out.termination = StopReason::MaxAlphaClamp;
        break;
      }
      alpha *= cfg.eta;
      fpa = slope_at(alpha);
      if (fpa >= 0.0) {
        out.termination = StopReason::SignChangeUp;
        break;
      }
    }
  } else {
    // Shrink by eta until F' < 0; never step below alpha_min.
    for (;;) {
      if (alpha / cfg.eta < cfg.alpha_min) {
        out.termination = StopReason::MinAlphaClamp;
        break;
      }
      alpha /= cfg.eta;
      fpa = slope_at(alpha);
      if (fpa < 0.0) {
        out.termination = StopReason::SignChangeDown;
        break;
      }
    }
  }

  out.alpha_accepted = alpha;
  out.fprime_at_accept = fpa;
  return out;
}

}  // namespace gols
