#include "kolmolab/gaussian_proxy.hpp"

#include <cmath>
#include <stdexcept>

#include "kolmolab/quadrature.hpp"

namespace kolmolab {

Mat ScalingMatrix::matrix() const {
  Mat T = Mat::Zero(n * d, n * d);
  double p = 1.0;
  for (int i = 1; i <= n; ++i) {
    p *= u;
    T.block((i - 1) * d, (i - 1) * d, d, d) = p * Mat::Identity(d, d);
  }
  return T;
}

Vec ScalingMatrix::apply(const Vec& x) const { return intrinsic_scale_apply(x, u, n, d); }

Vec ScalingMatrix::apply_inverse(const Vec& x) const {
  return intrinsic_scale_apply(x, 1.0 / u, n, d);
}

ScalingMatrix scaling_matrix(double u, int n, int d) {
  if (u <= 0.0) throw std::invalid_argument("scaling_matrix: u > 0");
  return ScalingMatrix{u, n, d};
}

std::pair<double, double> gsp_condition(const Mat& K, double dt, int n, int d) {
  if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + K.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("gsp_condition: K must be symmetric");
  Mat M = K;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      M.block((i - 1) * d, (j - 1) * d, d, d) *= dt / (std::pow(dt, i) * std::pow(dt, j));
  M = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

GaussianProxy::GaussianProxy(FramePtr frame, double t, double s, int quad_nodes)
    : frame_(std::move(frame)), t_(t), s_(s) {
  if (!(s > t)) throw std::invalid_argument("GaussianProxy: s > t required");
  const ChainSpec& spec = frame_->spec();
  const int nd = spec.dim(), d = spec.d;

  R_ = frame_->resolvent(s_, t_);
  shift_ = frame_->mean_shift(s_, t_);

  // K = int_t^s R(s,u) B a(u, theta_u) B^* R(s,u)^* du; only the first d columns
  // of R(s,u) enter through the embedding.
  K_ = Mat::Zero(nd, nd);
  const QuadRule q = gauss_legendre(quad_nodes, t_, s_);
  for (std::size_t k = 0; k < q.nodes.size(); ++k) {
    const double u = q.nodes[k];
    const Mat Ru = frame_->resolvent(s_, u);
    const Mat C = Ru.leftCols(d);
    const Mat au = spec.a(u, frame_->theta(u));
    K_ += q.weights[k] * (C * au * C.transpose());
  }
  K_ = 0.5 * (K_ + K_.transpose());

  // Cholesky with the jitter escalation policy.
  double eps = 1e-12;
  Mat Kj = K_;
  for (int attempt = 0;; ++attempt) {
    Eigen::LLT<Mat> llt(Kj);
    if (llt.info() == Eigen::Success) {
      L_ = llt.matrixL();
      break;
    }
    if (attempt >= 3) throw std::runtime_error("GaussianProxy: covariance not positive definite");
    const double add = eps * K_.trace() / nd;
    Kj = K_ + add * Mat::Identity(nd, nd);
    jitter_ = add;
    ++jitter_escalations_;
    eps *= 100.0;
  }

  log_norm_ = 0.5 * nd * std::log(2.0 * M_PI);
  for (int i = 0; i < nd; ++i) log_norm_ += std::log(L_(i, i));

  Kinv_ = L_.transpose().triangularView<Eigen::Upper>().solve(
      Mat(L_.triangularView<Eigen::Lower>().solve(Mat::Identity(nd, nd))));
  G_ = R_.transpose() * Kinv_;
  H_ = G_ * R_;
}

double GaussianProxy::log_density(const Vec& x, const Vec& y) const {
  const Vec r = mean(x) - y;
  const Vec w = L_.triangularView<Eigen::Lower>().solve(r);
  return -0.5 * w.squaredNorm() - log_norm_;
}

double GaussianProxy::density(const Vec& x, const Vec& y) const {
  return std::exp(log_density(x, y));
}

Vec GaussianProxy::density_gradient(const Vec& x, const Vec& y, int l) const {
  const int d = this->d();
  if (l < 1 || l > n()) throw std::invalid_argument("density_gradient: block in [1,n]");
  const Vec g = G_ * (mean(x) - y);
  return -g.segment((l - 1) * d, d) * density(x, y);
}

Mat GaussianProxy::density_gradient_x1(const Vec& x, const Vec& y, int l) const {
  const int d = this->d();
  if (l < 1 || l > n()) throw std::invalid_argument("density_gradient_x1: block in [1,n]");
  const Vec g = G_ * (mean(x) - y);
  const Vec g1 = g.head(d);
  const Vec gl = g.segment((l - 1) * d, d);
  const Mat Hl = H_.block(0, (l - 1) * d, d, d);  // rows of block 1, cols of block l
  return (g1 * gl.transpose() - Hl) * density(x, y);
}

double GaussianProxy::envelope_density(const Vec& x, const Vec& y, double factor) const {
  const int nd = dim();
  const Vec r = mean(x) - y;
  const Vec w = L_.triangularView<Eigen::Lower>().solve(r);
  return std::exp(-0.5 * w.squaredNorm() / factor - log_norm_ - 0.5 * nd * std::log(factor));
}

void GaussianProxy::quadrature_pass(const Vec& x, int gh_order,
                                    const std::function<void(const Vec&, double)>& visit) const {
  const int nd = dim();
  const Vec m = mean(x);
  if (gh_order <= 0) gh_order = nd <= 4 ? 20 : 12;
  if (nd <= 6) {
    const QuadRule gh = gauss_hermite_prob(gh_order);
    std::vector<int> idx(nd, 0);
    Vec z(nd);
    do {
      double w = 1.0;
      for (int c = 0; c < nd; ++c) {
        z(c) = gh.nodes[idx[c]];
        w *= gh.weights[idx[c]];
      }
      visit(m + L_ * z, w);
    } while (next_multi_index(idx, gh_order));
    return;
  }
  // QMC fallback: Halton with inverse-normal map.
  const long count = 1L << 15;
  Vec z(nd);
  for (long k = 0; k < count; ++k) {
    const Vec u = halton_point(k, nd);
    for (int c = 0; c < nd; ++c) z(c) = inverse_normal_cdf(u(c));
    visit(m + L_ * z, 1.0 / static_cast<double>(count));
  }
}

double GaussianProxy::semigroup_apply(const std::function<double(const Vec&)>& g, const Vec& x,
                                      int gh_order, bool stability_check,
                                      double stability_tol) const {
  if (gh_order <= 0) gh_order = dim() <= 4 ? 20 : 12;
  auto integrate = [&](int order) {
    double acc = 0.0;
    quadrature_pass(x, order, [&](const Vec& y, double w) { acc += w * g(y); });
    return acc;
  };
  const double v = integrate(gh_order);
  if (stability_check && dim() <= 6) {
    const double v2 = integrate(gh_order + 6);
    if (!std::isfinite(v) || !std::isfinite(v2) ||
        std::abs(v - v2) > stability_tol * (1.0 + std::abs(v2)))
      throw std::runtime_error("semigroup_apply: integral unstable between node counts");
  }
  return v;
}

double centering_defect(const GaussianProxy& proxy, int l, const Vec& x, double h,
                        int probes_per_dim) {
  const int n = proxy.n(), d = proxy.d();
  if (l < 1 || l > n) throw std::invalid_argument("centering_defect: l in [1,n]");
  if (l == 1) return 0.0;  // full mass is 1 for any x

  const int md = (l - 1) * d;
  const Mat Ksub = proxy.covariance().topLeftCorner(md, md);
  Eigen::LLT<Mat> llt(Ksub);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("centering_defect: marginal covariance not PD");
  const Mat Ls = llt.matrixL();
  double log_norm = 0.5 * md * std::log(2.0 * M_PI);
  for (int i = 0; i < md; ++i) log_norm += std::log(Ls(i, i));

  Vec xp = x;
  xp.segment((l - 1) * d, d).array() += h;
  const Vec m1 = proxy.mean(x).head(md);
  const Vec m2 = proxy.mean(xp).head(md);

  auto marginal = [&](const Vec& p, const Vec& m) {
    const Vec w = Ls.triangularView<Eigen::Lower>().solve(Vec(p - m));
    return std::exp(-0.5 * w.squaredNorm() - log_norm);
  };

  // Probe lattice: +-2 marginal standard deviations around the first mean.
  std::vector<int> idx(md, 0);
  Vec p(md);
  double defect = 0.0;
  do {
    for (int c = 0; c < md; ++c) {
      const double sd = std::sqrt(Ksub(c, c));
      const double frac =
          probes_per_dim == 1 ? 0.0 : -1.0 + 2.0 * idx[c] / (probes_per_dim - 1.0);
      p(c) = m1(c) + 2.0 * sd * frac;
    }
    defect = std::max(defect, std::abs(marginal(p, m1) - marginal(p, m2)));
  } while (next_multi_index(idx, probes_per_dim));
  return defect;
}

double moment_identity_defect(const GaussianProxy& proxy, int k, const Vec& M, const Vec& x,
                              int gh_order) {
  const int n = proxy.n(), d = proxy.d();
  if (k < 1 || k > n) throw std::invalid_argument("moment_identity_defect: k in [1,n]");
  if (M.size() != d) throw std::invalid_argument("moment_identity_defect: M in R^d");
  const Vec m = proxy.mean(x);
  double acc = 0.0;
  proxy.quadrature_pass(x, gh_order, [&](const Vec& y, double w) {
    // D_{x_k} p / p = -[R^T K^{-1} (m - y)]_k ; the density cancels against the
    // Gaussian quadrature measure.
    const Vec g = proxy.rkinv() * (m - y);
    const double inner = M.dot(Vec(y.segment((k - 1) * d, d) - m.segment((k - 1) * d, d)));
    acc += w * (-g.segment((k - 1) * d, d).sum()) * inner;
  });
  return std::abs(acc - M.sum());
}

}  // namespace kolmolab
