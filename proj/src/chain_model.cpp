#include "kolmolab/chain_model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kolmolab/quadrature.hpp"

namespace kolmolab {

double signed_pow(double z, double p) {
  if (z == 0.0) return 0.0;
  return z > 0.0 ? std::pow(z, p) : -std::pow(-z, p);
}

void ChainSpec::validate() const {
  if (n < 1 || d < 1) throw std::invalid_argument("ChainSpec: n >= 1 and d >= 1 required");
  if (static_cast<int>(drift.size()) != n)
    throw std::invalid_argument("ChainSpec: need exactly n drift components");
  if (!sigma) throw std::invalid_argument("ChainSpec: sigma missing");
  if (static_cast<int>(beta.size()) != n)
    throw std::invalid_argument("ChainSpec: need exactly n Holder exponents");
  for (double b : beta)
    if (b <= 0.0 || b > 1.0) throw std::invalid_argument("ChainSpec: beta_j in (0,1]");
  if (eta <= 0.0 || eta >= 1.0) throw std::invalid_argument("ChainSpec: eta in (0,1)");
  if (lambda < 1.0) throw std::invalid_argument("ChainSpec: lambda >= 1");
}

Vec ChainSpec::F(double t, const Vec& x) const {
  Vec out(n * d);
  for (int i = 1; i <= n; ++i) out.segment((i - 1) * d, d) = drift[i - 1](t, x);
  return out;
}

Mat ChainSpec::jacobian_block(int i, double t, const Vec& x) const {
  if (i < 2 || i > n) throw std::invalid_argument("jacobian_block: level in [2,n]");
  Mat J(d, d);
  Vec xp = x, xm = x;
  for (int c = 0; c < d; ++c) {
    const int idx = (i - 2) * d + c;
    const double h = jac_step * (1.0 + std::abs(x(idx)));
    xp(idx) = x(idx) + h;
    xm(idx) = x(idx) - h;
    J.col(c) = (drift[i - 1](t, xp) - drift[i - 1](t, xm)) / (2.0 * h);
    xp(idx) = x(idx);
    xm(idx) = x(idx);
  }
  return J;
}

Mat ChainSpec::subdiagonal_jacobian(double t, const Vec& x) const {
  Mat A = Mat::Zero(n * d, n * d);
  for (int i = 2; i <= n; ++i)
    A.block((i - 1) * d, (i - 2) * d, d, d) = jacobian_block(i, t, x);
  return A;
}

Mat ChainSpec::a(double t, const Vec& x) const {
  const Mat s = sigma(t, x);
  return s * s.transpose();
}

bool ChainSpec::above_threshold() const {
  for (int j = 1; j <= n; ++j)
    if (beta[j - 1] <= holder_threshold(j)) return false;
  return true;
}

double holder_threshold(int j) {
  if (j < 1) throw std::invalid_argument("holder_threshold: j >= 1");
  return (2.0 * j - 2.0) / (2.0 * j - 1.0);
}

double mollifier_scale(int i, double dt) {
  if (i < 2) throw std::invalid_argument("mollifier_scale: the first component is not mollified");
  if (dt <= 0.0 || dt > 1.0) throw std::invalid_argument("mollifier_scale: dt in (0,1]");
  const double e = (i - 1.5) * (2.0 * i - 1.0) / (2.0 * i - 2.0);
  return std::pow(dt, e);
}

double mollifier_kernel(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  const double w = 1.0 - u * u;
  return (35.0 / 32.0) * w * w * w;  // unit mass on [-1,1]
}

void MollifierSchedule::validate() const {
  for (double dl : delta)
    if (dl <= 0.0) throw std::invalid_argument("MollifierSchedule: delta_i > 0 required");
}

MollifierSchedule MollifierSchedule::for_dt(int n, double dt) {
  MollifierSchedule s;
  for (int i = 2; i <= n; ++i) s.delta.push_back(mollifier_scale(i, dt));
  return s;
}

MollifierSchedule MollifierSchedule::uniform(int n, double delta) {
  MollifierSchedule s;
  s.delta.assign(std::max(0, n - 1), delta);
  return s;
}

ChainSpec mollify_drift(const ChainSpec& spec, const MollifierSchedule& schedule,
                        int quad_nodes) {
  spec.validate();
  schedule.validate();
  if (static_cast<int>(schedule.delta.size()) != spec.n - 1)
    throw std::invalid_argument("mollify_drift: schedule needs n-1 scales");
  if (quad_nodes < 8) throw std::invalid_argument("mollify_drift: quad_nodes >= 8");

  ChainSpec out = spec;
  out.name = spec.name + "-mollified";
  const QuadRule q = gauss_legendre(quad_nodes, -1.0, 1.0);
  const int d = spec.d;
  for (int i = 2; i <= spec.n; ++i) {
    const double dl = schedule.delta[i - 2];
    const DriftFn base = spec.drift[i - 1];
    const int lvl = i;
    // Tensor-product convolution in the i-th d-dimensional block.
    out.drift[i - 1] = [base, dl, d, lvl, q](double t, const Vec& x) -> Vec {
      Vec acc = Vec::Zero(d);
      std::vector<int> idx(d, 0);
      Vec shifted = x;
      do {
        double w = 1.0;
        for (int c = 0; c < d; ++c) {
          const double u = q.nodes[idx[c]];
          w *= q.weights[idx[c]] * mollifier_kernel(u);
          shifted((lvl - 1) * d + c) = x((lvl - 1) * d + c) - dl * u;
        }
        if (w != 0.0) acc += w * base(t, shifted);
      } while (next_multi_index(idx, static_cast<int>(q.nodes.size())));
      return acc;
    };
  }
  return out;
}

AssumptionReport validate_assumptions(const ChainSpec& spec, const std::vector<Vec>& grid,
                                      double sv_floor, double time) {
  spec.validate();
  if (grid.empty()) throw std::invalid_argument("validate_assumptions: grid nonempty");

  AssumptionReport rep;
  rep.ellipticity_lo = std::numeric_limits<double>::infinity();
  rep.ellipticity_hi = 0.0;
  rep.min_jacobian_sv.assign(std::max(0, spec.n - 1),
                             std::numeric_limits<double>::infinity());

  for (const Vec& x : grid) {
    const Mat ax = spec.a(time, x);
    Eigen::SelfAdjointEigenSolver<Mat> es(ax);
    rep.ellipticity_lo = std::min(rep.ellipticity_lo, es.eigenvalues().minCoeff());
    rep.ellipticity_hi = std::max(rep.ellipticity_hi, es.eigenvalues().maxCoeff());
    for (int i = 2; i <= spec.n; ++i) {
      const Mat J = spec.jacobian_block(i, time, x);
      Eigen::JacobiSVD<Mat> svd(J);
      rep.min_jacobian_sv[i - 2] =
          std::min(rep.min_jacobian_sv[i - 2], svd.singularValues().minCoeff());
    }
  }
  const double slack = 1e-12;
  rep.ue_pass = rep.ellipticity_lo >= 1.0 / spec.lambda - slack &&
                rep.ellipticity_hi <= spec.lambda + slack;
  rep.hormander_pass = true;
  for (double sv : rep.min_jacobian_sv)
    if (sv < sv_floor) rep.hormander_pass = false;
  rep.t_beta_pass = spec.above_threshold();

  // Chain structure: perturbing block k < i-1 must leave F_i unchanged.
  rep.chain_pass = true;
  for (const Vec& x : grid) {
    for (int i = 3; i <= spec.n && rep.chain_pass; ++i) {
      for (int k = 1; k <= i - 2; ++k) {
        Vec xp = x;
        xp.segment((k - 1) * spec.d, spec.d).array() += 0.37;
        if ((spec.drift[i - 1](time, xp) - spec.drift[i - 1](time, x)).norm() > 0.0) {
          rep.chain_pass = false;
          break;
        }
      }
    }
  }
  return rep;
}

std::string AssumptionReport::summary() const {
  std::ostringstream os;
  os << "UE: " << (ue_pass ? "pass" : "FAIL") << " (measured ellipticity ["
     << ellipticity_lo << ", " << ellipticity_hi << "])\n";
  os << "H_eta: " << (hormander_pass ? "pass" : "FAIL") << " (min Jacobian sv:";
  for (double sv : min_jacobian_sv) os << " " << sv;
  os << ")\n";
  os << "T_beta: " << (t_beta_pass ? "pass" : "FAIL") << "\n";
  os << "chain structure: " << (chain_pass ? "pass" : "FAIL") << "\n";
  if (sample_based && all_pass())
    os << "note: sample-based pass is evidence, not uniform verification\n";
  return os.str();
}

double estimate_holder_modulus(const std::function<double(const Vec&)>& f, int j, double beta,
                               const std::vector<Vec>& base_points,
                               const std::vector<Vec>& offsets, int d) {
  if (beta <= 0.0 || beta > 1.0) throw std::invalid_argument("estimate_holder_modulus: beta");
  double best = 0.0;
  for (const Vec& x : base_points) {
    for (std::size_t a = 0; a < offsets.size(); ++a) {
      for (std::size_t b = a + 1; b < offsets.size(); ++b) {
        const double dz = (offsets[a] - offsets[b]).norm();
        if (dz == 0.0) continue;
        Vec xa = x, xb = x;
        xa.segment((j - 1) * d, d) += offsets[a];
        xb.segment((j - 1) * d, d) += offsets[b];
        best = std::max(best, std::abs(f(xa) - f(xb)) / std::pow(dz, beta));
      }
    }
  }
  return best;
}

double estimate_holder_modulus(const std::vector<double>& xs, const std::vector<double>& ys,
                               double beta) {
  if (xs.size() != ys.size()) throw std::invalid_argument("estimate_holder_modulus: size");
  double best = 0.0;
  for (std::size_t a = 0; a < xs.size(); ++a)
    for (std::size_t b = a + 1; b < xs.size(); ++b) {
      const double dz = std::abs(xs[a] - xs[b]);
      if (dz == 0.0) continue;
      best = std::max(best, std::abs(ys[a] - ys[b]) / std::pow(dz, beta));
    }
  return best;
}

TaylorRemainder drift_taylor_remainder(const ChainSpec& spec, int ell, int k, double s,
                                       const Vec& y, const Vec& theta) {
  if (ell < 2 || ell > spec.n) throw std::invalid_argument("drift_taylor_remainder: ell in [2,n]");
  if (k < ell || k > spec.n + 1) throw std::invalid_argument("drift_taylor_remainder: k in [ell,n+1]");
  const int d = spec.d;
  Vec mix = theta;
  mix.head((k - 1) * d) = y.head((k - 1) * d);

  const Mat J = spec.jacobian_block(ell, s, theta);
  const Vec diff = (y - theta).segment((ell - 2) * d, d);
  TaylorRemainder r;
  r.remainder = spec.drift[ell - 1](s, mix) - spec.drift[ell - 1](s, theta) - J * diff;
  r.remainder_norm = r.remainder.norm();

  const auto beta_mod = [&](int j) {
    return spec.beta_moduli.empty() ? 1.0 : spec.beta_moduli[j - 1];
  };
  const double eta_mod = spec.eta_moduli.empty() ? 1.0 : spec.eta_moduli[ell - 1];
  double bound = 0.0;
  for (int j = ell; j <= k - 1 && j <= spec.n; ++j)
    bound += beta_mod(j) * std::pow((y - theta).segment((j - 1) * d, d).norm(), spec.beta[j - 1]);
  bound += eta_mod * std::pow(diff.norm(), 1.0 + spec.eta);
  r.bound = bound;
  r.ratio = bound > 0.0 ? r.remainder_norm / bound : 0.0;
  return r;
}

// Built-ins -------------------------------------------------------------------

namespace {

SigmaFn identity_sigma(int d) {
  return [d](double, const Vec&) { return Mat::Identity(d, d); };
}

DriftFn zero_drift(int d) {
  return [d](double, const Vec&) { return Vec::Zero(d); };
}

DriftFn shift_block(int i, int d) {
  // F_i = x_{i-1}
  return [i, d](double, const Vec& x) -> Vec { return x.segment((i - 2) * d, d); };
}

}  // namespace

ChainSpec make_linear_chain(int n, int d) {
  ChainSpec s;
  s.n = n;
  s.d = d;
  s.name = "linear";
  s.drift.push_back(zero_drift(d));
  for (int i = 2; i <= n; ++i) s.drift.push_back(shift_block(i, d));
  s.sigma = identity_sigma(d);
  s.beta.assign(n, 1.0);
  s.eta = 0.5;
  s.kappa = 0.0;
  s.lambda = 1.0;
  s.beta_moduli.assign(n, 1.0);
  s.beta_moduli[n - 1] = 0.0;  // no dependence on the last variable
  s.eta_moduli.assign(n, 0.0);
  s.validate();
  return s;
}

ChainSpec make_holder_chain(int n, int d, std::vector<double> betas, double c) {
  if (betas.empty()) {
    betas.assign(n, 1.0);
    for (int j = 2; j <= n; ++j) betas[j - 1] = 1.0 - 0.6 * (1.0 - holder_threshold(j));
  }
  ChainSpec s;
  s.n = n;
  s.d = d;
  s.name = "holder";
  s.drift.push_back(zero_drift(d));
  for (int i = 2; i <= n; ++i) {
    const double b = betas[i - 1];
    s.drift.push_back([i, d, b, c](double, const Vec& x) -> Vec {
      Vec out = x.segment((i - 2) * d, d);
      for (int cix = 0; cix < d; ++cix) out(cix) += c * signed_pow(x((i - 1) * d + cix), b);
      return out;
    });
  }
  s.sigma = identity_sigma(d);
  s.beta = betas;
  s.eta = 0.4;
  s.kappa = 0.0;
  s.lambda = 1.0;
  s.beta_moduli.assign(n, std::abs(c));
  s.beta_moduli[0] = 1.0;
  s.eta_moduli.assign(n, 0.0);
  s.validate();
  return s;
}

ChainSpec make_lipschitz_chain(int n, int d, double c) {
  ChainSpec s;
  s.n = n;
  s.d = d;
  s.name = "lipschitz";
  s.drift.push_back(zero_drift(d));
  for (int i = 2; i <= n; ++i) {
    s.drift.push_back([i, d, c](double, const Vec& x) -> Vec {
      Vec out = x.segment((i - 2) * d, d);
      for (int cix = 0; cix < d; ++cix) out(cix) += c * std::abs(x((i - 1) * d + cix));
      return out;
    });
  }
  s.sigma = identity_sigma(d);
  s.beta.assign(n, 1.0);
  s.eta = 0.5;
  s.kappa = 0.0;
  s.lambda = 1.0;
  s.beta_moduli.assign(n, std::abs(c));
  s.beta_moduli[0] = 1.0;
  s.eta_moduli.assign(n, 0.0);
  s.validate();
  return s;
}

ChainSpec make_peano_chain(int n, int d, double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("make_peano_chain: alpha in (0,1)");
  ChainSpec s;
  s.n = n;
  s.d = d;
  s.name = "peano";
  s.drift.push_back(zero_drift(d));
  for (int i = 2; i < n; ++i) s.drift.push_back(shift_block(i, d));
  if (n >= 2) {
    // Last level keeps the weak-Hormander coupling but its own variable enters
    // below the strong threshold.
    s.drift.push_back([n, d, alpha](double, const Vec& x) -> Vec {
      Vec out = x.segment((n - 2) * d, d);
      for (int cix = 0; cix < d; ++cix) out(cix) += signed_pow(x((n - 1) * d + cix), alpha);
      return out;
    });
  }
  s.sigma = identity_sigma(d);
  s.beta.assign(n, 1.0);
  s.beta[n - 1] = alpha;  // below threshold for n >= 2 by construction
  s.eta = 0.25;
  s.kappa = 0.0;
  s.lambda = 1.0;
  s.beta_moduli.assign(n, 1.0);
  s.eta_moduli.assign(n, 0.0);
  s.validate();
  return s;
}

ChainSpec make_named_chain(const std::string& name, int n, int d,
                           const std::vector<double>& params) {
  if (name == "linear") return make_linear_chain(n, d);
  if (name == "holder")
    return make_holder_chain(n, d, params.size() == static_cast<std::size_t>(n) ? params
                                                                                : std::vector<double>{});
  if (name == "lipschitz") return make_lipschitz_chain(n, d, params.empty() ? 1.0 : params[0]);
  if (name == "peano") return make_peano_chain(n, d, params.empty() ? 0.5 : params[0]);
  throw std::invalid_argument("make_named_chain: unknown model '" + name + "'");
}

}  // namespace kolmolab
