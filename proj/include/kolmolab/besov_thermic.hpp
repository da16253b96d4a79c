#pragma once
#include <functional>
#include <vector>

#include "kolmolab/types.hpp"

namespace kolmolab {

/// Sampled scalar function on a uniform 1-D grid, the carrier for the
/// Holder/Besov estimators. Convolutions use reflecting-window extension.
struct GridFunction {
  double origin = 0.0;
  double spacing = 0.0;
  std::vector<double> values;

  int count() const { return static_cast<int>(values.size()); }
  double x(int i) const { return origin + spacing * i; }
  void validate() const;

  static GridFunction sample(const std::function<double(double)>& f, double a, double b,
                             int count);
  /// Central-difference derivative on the same grid.
  GridFunction derivative() const;
};

/// Heat kernel (2 pi v)^{-d/2} exp(-|z|^2 / (2v)).
double heat_kernel(double v, double z, int d = 1);
/// d/dv of the 1-D heat kernel.
double heat_kernel_dv(double v, double z);

struct ThermicOptions {
  double p = std::numeric_limits<double>::infinity();  // only 1 or infinity
  double q = std::numeric_limits<double>::infinity();
  int v_nodes = 48;
  double v_min = 1e-4;
  // Convergence detection: the v-term must decay (log-log slope >= 0 in v)
  // over the resolved window [fit_lo_factor h^2, fit_hi]; below the grid
  // resolution scale the curve is meaningless and is excluded from the fit.
  double fit_lo_factor = 200.0;
  double fit_hi = 2e-2;
  double divergence_ratio = 1.25;  // secondary flag: growth under refinement
};

struct ThermicResult {
  double value = 0.0;          // low-pass + aggregated heat term at base resolution
  double refined_value = 0.0;  // one refinement step (2x nodes, v_min/2)
  bool converged = true;       // small-v term decays towards v -> 0
  double small_v_slope = 0.0;  // fitted log-log slope of the v-term
  int m = 0;                   // derivative order used
};

/// Thermic Besov quasi-norm: || phi(D) f ||_p + q-aggregation over v in
/// (v_min, 1] of v^{m - alpha/2} || d_v^m h_v * f ||_p, with m = floor(alpha/2)+1.
ThermicResult thermic_norm(const GridFunction& f, double alpha, const ThermicOptions& opts = {});

/// || f' ||_{B^{alpha-1}} / || f ||_{B^alpha} with shared conventions.
/// Constant inputs are rejected (the displayed equivalence degenerates there).
double norm_equivalence_ratio(const GridFunction& f, double alpha,
                              const ThermicOptions& opts = {});

struct BesovExponents {
  int i = 2, k = 2;
  double eta = 0.0;
  double alpha = 0.0;  // (1 + eta/4) / (2i - 1)
  double rho = 0.0;    // 2i - 1
  double gamma = 0.0;  // 1/2 + eta (i - 3/2)
  bool gamma_strict = false;       // gamma > 1/2 (the integrability margin)
  bool alpha_admissible = false;   // alpha < (1 - (1-beta_k)(k-1/2)) / (i-1/2)
  double alpha_bar = 0.0;
};

/// Exponent bookkeeping for the duality step. When beta_k is not supplied, the
/// minimal margin compatible with the standing assumptions, threshold_k + eta,
/// is used for the admissibility check.
BesovExponents besov_exponents(int i, int k, double eta, double beta_k = -1.0);

}  // namespace kolmolab
