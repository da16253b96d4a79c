#pragma once
#include <memory>

#include "kolmolab/chain_model.hpp"
#include "kolmolab/ode.hpp"
#include "kolmolab/types.hpp"

namespace kolmolab {

inline constexpr double kBlowupGuard = 1e8;
inline constexpr int kDefaultStepsPerUnit = 512;

/// Inverse of a block lower-triangular matrix with identity diagonal blocks,
/// via the (exact) nilpotent Neumann series. Preserves the zero pattern.
Mat unipotent_inverse(const Mat& R, int n, int d);

/// Deterministic flow theta_{s,t}(xi) by fixed-step RK4. Step halving must
/// change the result below the integrator tolerance; blow-up beyond the guard
/// throws.
Vec flow(const ChainSpec& spec, double t, double s, const Vec& xi,
         int steps_per_unit = kDefaultStepsPerUnit);

/// Freezing frame: flow trajectory from (tau, xi) over [lo, hi] together with
/// the resolvent R(v, lo) of the subdiagonal linearization along it and the
/// inhomogeneous shift of the affine mean map. Immutable after construction.
class FreezingFrame {
 public:
  FreezingFrame(const ChainSpec& spec, double tau, Vec xi, double lo, double hi,
                int steps_per_unit = kDefaultStepsPerUnit);

  const ChainSpec& spec() const { return spec_; }
  double tau() const { return tau_; }
  const Vec& xi() const { return xi_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  Vec theta(double v) const;
  /// A(v) = DF(v, theta_v), block subdiagonal.
  Mat linearization(double v) const;
  /// Resolvent R(s, t) over [lo, hi], s >= t; det = 1 by structure.
  Mat resolvent(double s, double t) const;
  /// Same matrix by a fresh integration of the matrix ODE from t, independent
  /// of the stored anchor; the dual route for cocycle checks.
  Mat resolvent_direct(double s, double t, int steps_per_unit = kDefaultStepsPerUnit) const;
  /// Affine mean m_{s,t}(x) = R(s,t) x + c_{s,t}.
  Vec mean(const Vec& x, double s, double t) const;
  Vec mean_shift(double s, double t) const;

  /// Structured record (times, matrices as row-major decimal arrays).
  std::string to_record() const;

 private:
  ChainSpec spec_;
  double tau_, lo_, hi_;
  Vec xi_;
  DensePath<Vec> theta_fwd_, theta_bwd_;  // from tau to hi / to lo
  DensePath<Mat> resolvent_;              // R(v, lo)
  DensePath<Vec> shift_;                  // c(v) with m_{v,lo}(x) = R(v,lo) x + c(v)
};

using FramePtr = std::shared_ptr<const FreezingFrame>;
FramePtr make_frame(const ChainSpec& spec, double tau, const Vec& xi, double lo, double hi,
                    int steps_per_unit = kDefaultStepsPerUnit);

/// Convenience: solves the resolvent ODE along theta_{.,tau}(xi) and returns R(s,t).
Mat resolvent(const ChainSpec& spec, double tau, const Vec& xi, double t, double s,
              int steps_per_unit = kDefaultStepsPerUnit);

/// Anisotropic quasi-distance sum_i |(x-x')_i|^{1/(2i-1)}.
double homogeneous_distance(const Vec& x, const Vec& xp, int n, int d);

/// Intrinsic per-block fluctuation scale u^{i-1/2} applied as a diagonal map.
Vec intrinsic_scale_apply(const Vec& x, double u, int n, int d);

struct SensitivityRow {
  double gap = 0.0;    // |(theta(x) - theta(x'))_i|
  double bound = 0.0;  // (s-t)^{i-1/2} + d(x,x')^{2i-1}
  double ratio = 0.0;
};

/// Per-component flow sensitivity against the anisotropic envelope.
/// Requires d(x,x') <= 1 and s - t <= 1.
std::vector<SensitivityRow> flow_sensitivity_check(const ChainSpec& spec, const Vec& x,
                                                   const Vec& xp, double t, double s,
                                                   int steps_per_unit = kDefaultStepsPerUnit);

struct MeanFlowGap {
  std::vector<double> gap;    // per block j: |(m^x_{t0,t}(x') - theta_{t0,t}(x'))_j|
  std::vector<double> scale;  // |(x-x')_i|^{(2j-1)/(2i-1)}
  double t0 = 0.0;
  double fitted_theta = 0.0;  // smallest exponent with gap_j <= c0^theta * scale_j
};

/// Compares the frozen affine mean started at x against the true flow from x',
/// at the horizon t0 = t + c0 |(x-x')_i|^{2/(2i-1)}. x and x' may differ in one
/// block only.
MeanFlowGap mean_vs_flow_gap(const ChainSpec& spec, const Vec& x, const Vec& xp, double t,
                             double c0, int steps_per_unit = kDefaultStepsPerUnit);

}  // namespace kolmolab
