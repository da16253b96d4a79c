#pragma once
#include <functional>
#include <vector>

#include "kolmolab/gaussian_proxy.hpp"

namespace kolmolab {

using SourceFn = std::function<double(double, const Vec&)>;  // f(s, y)

/// One Green evaluation task: -(integral over (t,T]) of the frozen semigroup
/// applied to f, at the target x, with an optional cross-derivative request.
/// The freezing point is the target itself (tau = t, xi = x), recomputed per x.
struct GreenJob {
  ChainSpec spec;
  double t = 0.0;
  double T = 0.5;
  SourceFn f;
  std::vector<double> theta_exponents;  // declared per-variable Holder exponents of f
  Vec x;
  int l = 1;
  int r = 0;

  int time_nodes = 48;     // graded midpoint mesh size
  double grading = 2.0;    // mesh exponent p, resolves the (s-t)^{-theta} singularity
  int gh_order = 0;        // 0 = proxy default
  int cov_nodes = 24;
  int steps_per_unit = kDefaultStepsPerUnit;
  bool refine_check = false;  // doubles time_nodes and compares
  double refine_tol = 1e-4;
};

/// u(t,x) = -(int_t^T) P_{s,t} f(s,.)(x) ds.
double green_apply(const GreenJob& job);

/// All first derivatives and the cross derivatives D_{x_l} D_{x_1} u in one
/// quadrature pass, using the centering subtraction per block.
struct GreenDerivatives {
  Vec grad;                // stacked D_{x_l} u, l = 1..n
  std::vector<Mat> cross;  // per l: D_{x_l} D_{x_1} u, each d x d
  double grad_total_norm() const;
  double cross_total_norm() const;
};
GreenDerivatives green_derivatives(const GreenJob& job);

/// D_{x_l} D_{x_1}^r u for the job's (l, r); scalar for d = 1.
double green_cross_derivative(const GreenJob& job);

/// Log-log slope of |D_{x_l} D_{x_1}^r P_{t+dt,t}(centered |y_j|^beta)| against dt,
/// compared with the predicted exponent -(l-1/2) - r/2 + beta (j-1/2).
struct ExponentFit {
  double fitted = 0.0;
  double predicted = 0.0;
  double residual_rms = 0.0;
  std::vector<double> dts;
  std::vector<double> values;
};
ExponentFit singularity_exponent_fit(const ChainSpec& spec, int j, double beta_exp, int l, int r,
                                     const Vec& x, std::vector<double> dts = {},
                                     int gh_order = 40);

/// L_t phi(x) = <F(t,x), D phi(x)> + (1/2) Tr(a(t,x) D^2_{x_1} phi(x)), by
/// central finite differences.
double apply_generator(const ChainSpec& spec, const std::function<double(const Vec&)>& phi,
                       double t, const Vec& x, double fd_scale = 1e-4);

/// Desk-scale Picard iteration of the first-order parametrix expansion:
/// u_0 = Green[f], u_{k+1} = Green[f] - Green[(L - L~) u_k], with the frozen
/// generator along the target's own frame. Residuals are |(d_t + L) u_k - f|
/// measured by finite differences at the probe points.
struct ParametrixResult {
  std::vector<std::vector<double>> u;  // u[k][probe]
  std::vector<double> residual;        // max FD residual per iterate
};
ParametrixResult parametrix_iterate(const ChainSpec& spec, double t, double T, const SourceFn& f,
                                    const std::vector<Vec>& probes, int iterations,
                                    int time_nodes = 16, int gh_order = 8,
                                    int steps_per_unit = 256);

}  // namespace kolmolab
