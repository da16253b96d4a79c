#include "kolmolab/green_estimator.hpp"

#include <cmath>
#include <stdexcept>

#include "kolmolab/quadrature.hpp"

namespace kolmolab {

namespace {

struct GradedMesh {
  std::vector<double> s;
  std::vector<double> w;
};

// Gauss-Legendre in the graded variable s = t + (T-t) tau^p; nodes stay
// strictly inside (t, T) so singular integrands are never evaluated at s = t,
// and smooth integrands converge spectrally.
GradedMesh graded_mesh(double t, double T, int K, double p) {
  GradedMesh m;
  m.s.resize(K);
  m.w.resize(K);
  const double span = T - t;
  const QuadRule q = gauss_legendre(K, 0.0, 1.0);
  for (int j = 0; j < K; ++j) {
    const double tau = q.nodes[j];
    m.s[j] = t + span * std::pow(tau, p);
    m.w[j] = span * p * std::pow(tau, p - 1.0) * q.weights[j];
  }
  return m;
}

double green_apply_nodes(const GreenJob& job, int time_nodes) {
  FramePtr frame = make_frame(job.spec, job.t, job.x, job.t, job.T, job.steps_per_unit);
  const GradedMesh mesh = graded_mesh(job.t, job.T, time_nodes, job.grading);
  double acc = 0.0;
  for (std::size_t j = 0; j < mesh.s.size(); ++j) {
    GaussianProxy proxy(frame, job.t, mesh.s[j], job.cov_nodes);
    const double sj = mesh.s[j];
    acc += mesh.w[j] *
           proxy.semigroup_apply([&](const Vec& y) { return job.f(sj, y); }, job.x, job.gh_order);
  }
  return -acc;
}

}  // namespace

double green_apply(const GreenJob& job) {
  if (!(job.T > job.t)) throw std::invalid_argument("green_apply: T > t required");
  const double v = green_apply_nodes(job, job.time_nodes);
  if (job.refine_check) {
    const double v2 = green_apply_nodes(job, 2 * job.time_nodes);
    if (std::abs(v - v2) > job.refine_tol * (1.0 + std::abs(v2)))
      throw std::runtime_error("green_apply: time quadrature not converged under refinement");
    return v2;
  }
  return v;
}

double GreenDerivatives::grad_total_norm() const { return grad.lpNorm<1>(); }

double GreenDerivatives::cross_total_norm() const {
  double acc = 0.0;
  for (const Mat& m : cross) acc += m.norm();
  return acc;
}

GreenDerivatives green_derivatives(const GreenJob& job) {
  const int n = job.spec.n, d = job.spec.d, nd = job.spec.dim();
  FramePtr frame = make_frame(job.spec, job.t, job.x, job.t, job.T, job.steps_per_unit);
  const GradedMesh mesh = graded_mesh(job.t, job.T, job.time_nodes, job.grading);

  GreenDerivatives out;
  out.grad = Vec::Zero(nd);
  out.cross.assign(n, Mat::Zero(d, d));

  std::vector<double> center(n);
  for (std::size_t jn = 0; jn < mesh.s.size(); ++jn) {
    const double s = mesh.s[jn];
    GaussianProxy proxy(frame, job.t, s, job.cov_nodes);
    const Vec m = proxy.mean(job.x);
    const Vec th = frame->theta(s);  // equals m since xi = x, tau = t

    Vec grad_acc = Vec::Zero(nd);
    std::vector<Mat> cross_acc(n, Mat::Zero(d, d));
    proxy.quadrature_pass(job.x, job.gh_order, [&](const Vec& y, double w) {
      const double fy = job.f(s, y);
      for (int l = 1; l <= n; ++l) {
        Vec ml = y;  // (y_{1:l-1}, theta^{l:n})
        ml.tail((n - l + 1) * d) = th.tail((n - l + 1) * d);
        center[l - 1] = job.f(s, ml);
      }
      const Vec g = proxy.rkinv() * (m - y);
      for (int l = 1; l <= n; ++l) {
        const double c = fy - center[l - 1];
        grad_acc.segment((l - 1) * d, d) += w * c * (-g.segment((l - 1) * d, d));
        const Mat Hl = proxy.rkr().block(0, (l - 1) * d, d, d);
        cross_acc[l - 1] +=
            (w * c) * (g.head(d) * g.segment((l - 1) * d, d).transpose() - Hl);
      }
    });
    out.grad += mesh.w[jn] * grad_acc;
    for (int l = 0; l < n; ++l) out.cross[l] += mesh.w[jn] * cross_acc[l];
  }
  out.grad = -out.grad;
  for (Mat& c : out.cross) c = -c;
  return out;
}

double green_cross_derivative(const GreenJob& job) {
  if (job.l < 1 || job.l > job.spec.n)
    throw std::invalid_argument("green_cross_derivative: l in [1,n]");
  if (job.r != 0 && job.r != 1) throw std::invalid_argument("green_cross_derivative: r in {0,1}");
  const GreenDerivatives der = green_derivatives(job);
  const int d = job.spec.d;
  if (job.r == 0) {
    const Vec v = der.grad.segment((job.l - 1) * d, d);
    return d == 1 ? v(0) : v.norm();
  }
  const Mat& m = der.cross[job.l - 1];
  return d == 1 ? m(0, 0) : m.norm();
}

ExponentFit singularity_exponent_fit(const ChainSpec& spec, int j, double beta_exp, int l, int r,
                                     const Vec& x, std::vector<double> dts, int gh_order) {
  if (beta_exp <= 0.0 || beta_exp > 1.0)
    throw std::invalid_argument("singularity_exponent_fit: beta in (0,1]");
  if (dts.empty())
    for (int k = 0; k < 10; ++k) dts.push_back(0.2 * std::pow(0.6, k));

  const int d = spec.d;
  ExponentFit fit;
  fit.predicted = -(l - 0.5) - 0.5 * r + beta_exp * (j - 0.5);
  std::vector<double> lx, ly;
  for (double dt : dts) {
    FramePtr frame = make_frame(spec, 0.0, x, 0.0, dt);
    GaussianProxy proxy(frame, 0.0, dt, 24);
    const Vec m = proxy.mean(x);
    const Vec th = frame->theta(dt);
    const double cval = std::pow(th.segment((j - 1) * d, d).norm(), beta_exp);

    Vec grad_acc = Vec::Zero(d);
    Mat cross_acc = Mat::Zero(d, d);
    proxy.quadrature_pass(x, gh_order, [&](const Vec& y, double w) {
      const double c = std::pow(y.segment((j - 1) * d, d).norm(), beta_exp) - cval;
      const Vec g = proxy.rkinv() * (m - y);
      if (r == 0) {
        grad_acc += w * c * (-g.segment((l - 1) * d, d));
      } else {
        const Mat Hl = proxy.rkr().block(0, (l - 1) * d, d, d);
        cross_acc += (w * c) * (g.head(d) * g.segment((l - 1) * d, d).transpose() - Hl);
      }
    });
    const double val = r == 0 ? grad_acc.norm() : cross_acc.norm();
    fit.dts.push_back(dt);
    fit.values.push_back(val);
    if (val > 0.0) {
      lx.push_back(std::log(dt));
      ly.push_back(std::log(val));
    }
  }
  if (lx.size() < 3) throw std::runtime_error("singularity_exponent_fit: degenerate values");
  const LineFit lf = fit_line(lx, ly);
  fit.fitted = lf.slope;
  fit.residual_rms = lf.residual_rms;
  return fit;
}

double apply_generator(const ChainSpec& spec, const std::function<double(const Vec&)>& phi,
                       double t, const Vec& x, double fd_scale) {
  const int nd = spec.dim(), d = spec.d;
  const Vec Fx = spec.F(t, x);
  double acc = 0.0;
  Vec xp = x, xm = x;
  for (int i = 0; i < nd; ++i) {
    const double h = fd_scale * (1.0 + std::abs(x(i)));
    xp(i) = x(i) + h;
    xm(i) = x(i) - h;
    acc += Fx(i) * (phi(xp) - phi(xm)) / (2.0 * h);
    xp(i) = x(i);
    xm(i) = x(i);
  }
  const Mat ax = spec.a(t, x);
  const double phi0 = phi(x);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      if (ax(a, b) == 0.0) continue;
      const double ha = fd_scale * (1.0 + std::abs(x(a)));
      const double hb = fd_scale * (1.0 + std::abs(x(b)));
      double second;
      if (a == b) {
        Vec xq = x;
        xq(a) = x(a) + ha;
        const double fp = phi(xq);
        xq(a) = x(a) - ha;
        const double fm = phi(xq);
        second = (fp - 2.0 * phi0 + fm) / (ha * ha);
      } else {
        Vec xq = x;
        xq(a) += ha;
        xq(b) += hb;
        const double fpp = phi(xq);
        xq(b) = x(b) - hb;
        const double fpm = phi(xq);
        xq(a) = x(a) - ha;
        const double fmm = phi(xq);
        xq(b) = x(b) + hb;
        const double fmp = phi(xq);
        second = (fpp - fpm - fmp + fmm) / (4.0 * ha * hb);
      }
      acc += 0.5 * ax(a, b) * second;
    }
  }
  return acc;
}

// Picard iterates of the first-order expansion. Each evaluation point opens
// its own frame (xi = point), matching the freezing convention of the
// derivative bounds; the effective source of u_k is
//   S_k(s,y) = f(s,y) - (L_s - L~_s^{frame}) u_{k-1}(s,y),
// and u_k = -(int) P[S_k]. Cost grows geometrically with k; iterations
// beyond 1 are only usable at very small orders.
namespace {

struct PicardCtx {
  const ChainSpec* spec;
  double T;
  const SourceFn* f;
  int time_nodes;
  int gh_order;
  int steps_per_unit;
};

GreenJob base_job(const PicardCtx& c, double t, const Vec& x) {
  GreenJob j;
  j.spec = *c.spec;
  j.t = t;
  j.T = c.T;
  j.x = x;
  j.time_nodes = c.time_nodes;
  j.gh_order = c.gh_order;
  j.steps_per_unit = c.steps_per_unit;
  j.cov_nodes = 16;
  return j;
}

GreenDerivatives picard_derivs(const PicardCtx& c, int k, double t, const Vec& x);

double picard_perturbation(const PicardCtx& c, int k, const FreezingFrame& frame, double s,
                           const Vec& y) {
  const ChainSpec& spec = *c.spec;
  const Vec th = frame.theta(s);
  const Vec dF = spec.F(s, y) - (spec.F(s, th) + frame.linearization(s) * (y - th));
  const Mat da = spec.a(s, y) - spec.a(s, th);
  const GreenDerivatives der = picard_derivs(c, k, s, y);
  double acc = dF.dot(der.grad);
  if (da.cwiseAbs().maxCoeff() > 0.0) acc += 0.5 * (da * der.cross[0]).trace();
  return acc;
}

SourceFn picard_source(const PicardCtx& c, int k, FramePtr frame) {
  if (k == 0) return *c.f;
  const PicardCtx ctx = c;  // holds stable pointers owned by the caller
  return [ctx, k, frame](double s, const Vec& y) {
    return (*ctx.f)(s, y) - picard_perturbation(ctx, k - 1, *frame, s, y);
  };
}

GreenDerivatives picard_derivs(const PicardCtx& c, int k, double t, const Vec& x) {
  GreenJob j = base_job(c, t, x);
  FramePtr frame = make_frame(*c.spec, t, x, t, c.T, c.steps_per_unit);
  j.f = picard_source(c, k, frame);
  return green_derivatives(j);
}

double picard_value(const PicardCtx& c, int k, double t, const Vec& x) {
  GreenJob j = base_job(c, t, x);
  FramePtr frame = make_frame(*c.spec, t, x, t, c.T, c.steps_per_unit);
  j.f = picard_source(c, k, frame);
  return green_apply(j);
}

}  // namespace

ParametrixResult parametrix_iterate(const ChainSpec& spec, double t, double T, const SourceFn& f,
                                    const std::vector<Vec>& probes, int iterations,
                                    int time_nodes, int gh_order, int steps_per_unit) {
  if (spec.dim() > 4) throw std::invalid_argument("parametrix_iterate: n*d <= 4 (desk scale)");
  if (iterations < 0 || iterations > 3)
    throw std::invalid_argument("parametrix_iterate: iterations in [0,3]");
  PicardCtx ctx{&spec, T, &f, time_nodes, gh_order, steps_per_unit};

  ParametrixResult res;
  for (int k = 0; k <= iterations; ++k) {
    std::vector<double> uk;
    double worst = 0.0;
    for (const Vec& x : probes) {
      uk.push_back(picard_value(ctx, k, t, x));
      const double ht = 1e-3 * (T - t);
      const double up = picard_value(ctx, k, t + ht, x);
      const double um = picard_value(ctx, k, std::max(0.0, t - ht), x);
      const double dt_u = (up - um) / (t - ht >= 0.0 ? 2.0 * ht : ht);
      const double Lu = apply_generator(
          spec, [&](const Vec& y) { return picard_value(ctx, k, t, y); }, t, x, 1e-4);
      worst = std::max(worst, std::abs(dt_u + Lu - f(t, x)));
    }
    res.u.push_back(std::move(uk));
    res.residual.push_back(worst);
    if (k >= 1 && res.residual[k] > 10.0 * res.residual[k - 1] + 1e-9)
      throw std::runtime_error("parametrix_iterate: iteration divergence");
  }
  return res;
}

}  // namespace kolmolab
