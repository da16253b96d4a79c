#pragma once
#include <functional>
#include <vector>

#include "kolmolab/types.hpp"

namespace kolmolab {

struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1].
QuadRule gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
QuadRule gauss_legendre(int n, double a, double b);

/// Gauss-Hermite rule in probabilist form: sum_i w_i g(x_i) ~ E[g(Z)], Z ~ N(0,1).
/// Weights sum to 1.
QuadRule gauss_hermite_prob(int n);

/// Iterates over the tensor grid {0..order-1}^dim, filling `idx`.
/// Returns false once exhausted.
bool next_multi_index(std::vector<int>& idx, int order);

/// Halton sequence point (index k >= 0) in [0,1)^dim, for QMC fallbacks.
Vec halton_point(long k, int dim);

/// Inverse standard normal CDF (Acklam's rational approximation, ~1e-9 abs).
double inverse_normal_cdf(double p);

/// Least-squares slope/intercept of y against x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> v);

}  // namespace kolmolab
