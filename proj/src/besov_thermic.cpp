#include "kolmolab/besov_thermic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "kolmolab/chain_model.hpp"
#include "kolmolab/quadrature.hpp"

namespace kolmolab {

void GridFunction::validate() const {
  if (spacing <= 0.0) throw std::invalid_argument("GridFunction: spacing > 0");
  if (count() < 8) throw std::invalid_argument("GridFunction: count >= 8");
}

GridFunction GridFunction::sample(const std::function<double(double)>& f, double a, double b,
                                  int count) {
  if (count < 8 || !(b > a)) throw std::invalid_argument("GridFunction::sample: bad window");
  GridFunction g;
  g.origin = a;
  g.spacing = (b - a) / (count - 1);
  g.values.resize(count);
  for (int i = 0; i < count; ++i) g.values[i] = f(g.x(i));
  return g;
}

GridFunction GridFunction::derivative() const {
  validate();
  GridFunction g = *this;
  const int N = count();
  for (int i = 0; i < N; ++i) {
    const int ip = std::min(N - 1, i + 1), im = std::max(0, i - 1);
    g.values[i] = (values[ip] - values[im]) / ((ip - im) * spacing);
  }
  return g;
}

double heat_kernel(double v, double z, int d) {
  if (v <= 0.0) throw std::invalid_argument("heat_kernel: v > 0");
  return std::pow(2.0 * M_PI * v, -0.5 * d) * std::exp(-z * z / (2.0 * v));
}

double heat_kernel_dv(double v, double z) {
  // d/dv [ (2 pi v)^{-1/2} exp(-z^2/(2v)) ]
  return heat_kernel(v, z, 1) * (z * z / (2.0 * v * v) - 0.5 / v);
}

namespace {

// Convolution (kernel * f)(x_i) with reflecting extension of f beyond the
// window, truncated at +-8 sqrt(v).
std::vector<double> heat_convolve(const GridFunction& f, double v, bool dv_kernel) {
  const int N = f.count();
  const double h = f.spacing;
  const int reach = std::min(4 * N, static_cast<int>(std::ceil(8.0 * std::sqrt(v) / h)) + 1);
  std::vector<double> kern(2 * reach + 1);
  for (int j = -reach; j <= reach; ++j) {
    const double z = j * h;
    kern[j + reach] = (dv_kernel ? heat_kernel_dv(v, z) : heat_kernel(v, z, 1)) * h;
  }
  std::vector<double> out(N, 0.0);
  for (int i = 0; i < N; ++i) {
    double acc = 0.0;
    for (int j = -reach; j <= reach; ++j) {
      int k = i - j;
      // reflect
      while (k < 0 || k >= N) {
        if (k < 0) k = -k;
        if (k >= N) k = 2 * (N - 1) - k;
      }
      acc += kern[j + reach] * f.values[k];
    }
    out[i] = acc;
  }
  return out;
}

double norm_p(const std::vector<double>& v, double p, double h) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  if (p == 1.0) {
    double s = 0.0;
    for (double x : v) s += std::abs(x) * h;
    return s;
  }
  throw std::invalid_argument("thermic_norm: p in {1, inf}");
}

struct TermCurve {
  std::vector<double> logv;
  std::vector<double> term;
  double low = 0.0;
};

TermCurve term_curve(const GridFunction& f, double alpha, double p, int m, int v_nodes,
                     double v_min) {
  TermCurve c;
  // low-pass: Gaussian at scale 1 (phi with phi(0) != 0)
  c.low = norm_p(heat_convolve(f, 1.0, false), p, f.spacing);
  c.logv.resize(v_nodes);
  c.term.resize(v_nodes);
  const double la = std::log(v_min), lb = 0.0;
  for (int k = 0; k < v_nodes; ++k) {
    c.logv[k] = la + (lb - la) * (k + 0.5) / v_nodes;
    const double v = std::exp(c.logv[k]);
    c.term[k] =
        std::pow(v, m - 0.5 * alpha) * norm_p(heat_convolve(f, v, m != 0), p, f.spacing);
  }
  return c;
}

double aggregate(const TermCurve& c, double q) {
  double agg;
  if (std::isinf(q)) {
    agg = 0.0;
    for (double t : c.term) agg = std::max(agg, t);
  } else if (q == 1.0) {
    const double dl = c.logv.size() > 1 ? c.logv[1] - c.logv[0] : 1.0;
    agg = 0.0;
    for (double t : c.term) agg += t * dl;
  } else {
    throw std::invalid_argument("thermic_norm: q in {1, inf}");
  }
  return c.low + agg;
}

}  // namespace

ThermicResult thermic_norm(const GridFunction& f, double alpha, const ThermicOptions& opts) {
  f.validate();
  ThermicResult r;
  r.m = static_cast<int>(std::floor(alpha / 2.0)) + 1;
  const TermCurve base = term_curve(f, alpha, opts.p, r.m, opts.v_nodes, opts.v_min);
  const TermCurve fine =
      term_curve(f, alpha, opts.p, r.m, 2 * opts.v_nodes, 0.5 * opts.v_min);
  r.value = aggregate(base, opts.q);
  r.refined_value = aggregate(fine, opts.q);

  // Decay of the heat term towards v -> 0, fitted on the resolved window only.
  const double lo = std::max(opts.fit_lo_factor * f.spacing * f.spacing, opts.v_min);
  const double hi = opts.fit_hi;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < fine.logv.size(); ++k) {
    const double v = std::exp(fine.logv[k]);
    if (v >= lo && v <= hi && fine.term[k] > 0.0) {
      lx.push_back(fine.logv[k]);
      ly.push_back(std::log(fine.term[k]));
    }
  }
  if (lx.size() >= 4) {
    r.small_v_slope = fit_line(lx, ly).slope;
    r.converged = r.small_v_slope >= 0.0;
  } else {
    // window unresolved; fall back to the refinement-growth rule
    r.small_v_slope = std::numeric_limits<double>::quiet_NaN();
    r.converged = r.refined_value <= opts.divergence_ratio * r.value;
  }
  return r;
}

double norm_equivalence_ratio(const GridFunction& f, double alpha, const ThermicOptions& opts) {
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("norm_equivalence_ratio: alpha in (0,1)");
  f.validate();
  double lo = f.values[0], hi = f.values[0];
  for (double v : f.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1e-12 * (1.0 + std::abs(hi)))
    throw std::invalid_argument("norm_equivalence_ratio: constant input is degenerate");
  const ThermicResult num = thermic_norm(f.derivative(), alpha - 1.0, opts);
  const ThermicResult den = thermic_norm(f, alpha, opts);
  if (den.value == 0.0) throw std::runtime_error("norm_equivalence_ratio: zero denominator");
  return num.value / den.value;
}

BesovExponents besov_exponents(int i, int k, double eta, double beta_k) {
  if (i < 2 || k < i) throw std::invalid_argument("besov_exponents: 2 <= i <= k");
  if (eta < 0.0 || eta >= 1.0) throw std::invalid_argument("besov_exponents: eta in [0,1)");
  BesovExponents e;
  e.i = i;
  e.k = k;
  e.eta = eta;
  e.alpha = (1.0 + eta / 4.0) / (2.0 * i - 1.0);
  e.rho = 2.0 * i - 1.0;
  e.gamma = 0.5 + eta * (i - 1.5);
  e.gamma_strict = e.gamma > 0.5;
  if (beta_k < 0.0) beta_k = holder_threshold(k) + eta;
  e.alpha_bar = (1.0 - (1.0 - beta_k) * (k - 0.5)) / (i - 0.5);
  e.alpha_admissible = e.alpha < e.alpha_bar;
  return e;
}

}  // namespace kolmolab
