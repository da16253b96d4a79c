#pragma once
#include <functional>
#include <string>
#include <vector>

#include "kolmolab/types.hpp"

namespace kolmolab {

using DriftFn = std::function<Vec(double, const Vec&)>;  // F_i(t, x) -> R^d
using SigmaFn = std::function<Mat(double, const Vec&)>;  // sigma(t, x) -> d x d

/// sgn(z)|z|^p with the tie-break sgn(0) = 0.
double signed_pow(double z, double p);

/// Degenerate chain model: noise enters block 1 only, drift component i may
/// depend on blocks (i-1)..n for i >= 2 and on everything for i = 1.
struct ChainSpec {
  int n = 1;
  int d = 1;
  std::vector<DriftFn> drift;  // size n, 1-based level i stored at drift[i-1]
  SigmaFn sigma;
  std::vector<double> beta;  // per-variable Holder exponents, in (0,1]
  double eta = 0.5;          // Holder exponent of the subdiagonal Jacobians
  double kappa = 0.0;        // Lipschitz bound for sigma
  double lambda = 1.0;       // ellipticity constant >= 1

  // Regularity metadata used by remainder bounds. Built-in models carry their
  // exact moduli; defaults are 1 (and 0 for eta when the subdiagonal is linear).
  std::vector<double> beta_moduli;  // [F_{1:j}]_{beta_j} per variable j
  std::vector<double> eta_moduli;   // [D_{i-1}F_i]_eta per level i (index i-1), 0 for i=1

  std::string name = "custom";
  double jac_step = 1e-5;  // central-difference step for subdiagonal Jacobians

  int dim() const { return n * d; }
  void validate() const;

  Vec F(double t, const Vec& x) const;  // stacked drift in R^{nd}
  /// D_{x_{i-1}} F_i for i in [2,n], central finite differences.
  Mat jacobian_block(int i, double t, const Vec& x) const;
  /// Full subdiagonal Jacobian matrix DF (nd x nd), zero outside subdiagonal blocks.
  Mat subdiagonal_jacobian(double t, const Vec& x) const;
  Mat a(double t, const Vec& x) const;  // sigma sigma^T

  /// True iff beta_j > (2j-2)/(2j-1) for every level j.
  bool above_threshold() const;
};

/// Critical Holder threshold (2j-2)/(2j-1) for variable j >= 1.
double holder_threshold(int j);

/// Mollification scale delta_i = dt^{(i-3/2)(2i-1)/(2i-2)} for level i in [2,n].
/// Level 1 is never mollified and is rejected.
double mollifier_scale(int i, double dt);

/// Compactly supported bump (1-u^2)^3 on [-1,1], normalized to unit mass.
double mollifier_kernel(double u);

struct MollifierSchedule {
  std::vector<double> delta;  // delta[i-2] is the scale for level i in [2,n]

  void validate() const;
  static MollifierSchedule for_dt(int n, double dt);
  static MollifierSchedule uniform(int n, double delta);
};

/// Replaces each F_i (i >= 2) by its convolution in the i-th variable against
/// the bump at scale delta_i, evaluated by fixed Gauss-Legendre quadrature.
/// F_1 passes through unchanged.
ChainSpec mollify_drift(const ChainSpec& spec, const MollifierSchedule& schedule,
                        int quad_nodes = 32);

struct AssumptionReport {
  double ellipticity_lo = 0.0;  // measured Rayleigh interval of a over the grid
  double ellipticity_hi = 0.0;
  bool ue_pass = false;
  std::vector<double> min_jacobian_sv;  // per level i in [2,n]
  bool hormander_pass = false;
  bool t_beta_pass = false;
  bool chain_pass = false;  // structural dependence check
  bool sample_based = true;  // sampled pass is evidence, not proof

  bool all_pass() const { return ue_pass && hormander_pass && t_beta_pass && chain_pass; }
  std::string summary() const;
};

/// Sample-based check of the standing assumptions over a point grid.
/// Sampled failure is conclusive; sampled pass is evidence only.
AssumptionReport validate_assumptions(const ChainSpec& spec, const std::vector<Vec>& grid,
                                      double sv_floor = 1e-6, double time = 0.0);

/// Max over base points and offset pairs of |f(x+z e_j) - f(x+z' e_j)| / |z-z'|^beta,
/// varying only block j. Returns 0 (with no pairs) for degenerate inputs.
double estimate_holder_modulus(const std::function<double(const Vec&)>& f, int j, double beta,
                               const std::vector<Vec>& base_points,
                               const std::vector<Vec>& offsets, int d);

/// 1-D sampled version over all grid pairs.
double estimate_holder_modulus(const std::vector<double>& xs, const std::vector<double>& ys,
                               double beta);

struct TaylorRemainder {
  Vec remainder;     // R^d
  double remainder_norm = 0.0;
  double bound = 0.0;  // paper majorant with the spec's declared moduli
  double ratio = 0.0;  // remainder_norm / bound (0 when bound is 0)
};

/// First-order Taylor defect of F_ell at the frozen point theta = theta_{s,t}(xi),
/// evaluated at (y_{1:k-1}, theta^{k:n}), against the anisotropic majorant
///   sum_{j=ell..k-1} [.]_{beta_j} |(y-theta)_j|^beta_j + [.]_eta |(y-theta)_{ell-1}|^{1+eta}.
TaylorRemainder drift_taylor_remainder(const ChainSpec& spec, int ell, int k, double s,
                                       const Vec& y, const Vec& theta);

// Built-in model library ------------------------------------------------------

/// Linear Kolmogorov chain: F_1 = 0, F_i = x_{i-1}, sigma = I. The OU example.
ChainSpec make_linear_chain(int n, int d);

/// Holder-perturbed chain: F_i = x_{i-1} + c * sgn(x_i)|x_i|^{beta_i} per component.
/// Default betas are above-threshold: beta_j = 1 - 0.6 (1 - (2j-2)/(2j-1)).
ChainSpec make_holder_chain(int n, int d, std::vector<double> betas = {}, double c = 1.0);

/// Lipschitz chain with a kink: F_i = x_{i-1} + c |x_i| per component, beta = 1.
ChainSpec make_lipschitz_chain(int n, int d, double c = 1.0);

/// Peano chain: F_1 = 0, F_n = sgn(x_n)|x_n|^alpha, intermediate levels pass
/// x_{i-1} through. Drift regularity below the strong threshold by design.
ChainSpec make_peano_chain(int n, int d, double alpha);

/// Lookup by name ("linear", "holder", "lipschitz", "peano") for config files.
ChainSpec make_named_chain(const std::string& name, int n, int d,
                           const std::vector<double>& params = {});

}  // namespace kolmolab
