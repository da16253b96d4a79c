#include "kolmolab/flow_resolvent.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kolmolab {

namespace {

int step_count(double t0, double t1, int steps_per_unit) {
  const double span = std::abs(t1 - t0);
  return std::max(2, static_cast<int>(std::ceil(span * steps_per_unit)));
}

void guard_state(const Vec& y) {
  if (!y.allFinite() || y.cwiseAbs().maxCoeff() > kBlowupGuard)
    throw std::runtime_error("flow: trajectory blow-up guard tripped");
}

}  // namespace

Mat unipotent_inverse(const Mat& R, int n, int d) {
  const int nd = n * d;
  Mat N = R - Mat::Identity(nd, nd);  // strictly block lower triangular
  Mat inv = Mat::Identity(nd, nd);
  Mat term = Mat::Identity(nd, nd);
  for (int k = 1; k < n; ++k) {
    term = term * N;
    inv += (k % 2 == 0 ? 1.0 : -1.0) * term;
  }
  return inv;
}

Vec flow(const ChainSpec& spec, double t, double s, const Vec& xi, int steps_per_unit) {
  if (s == t) return xi;
  auto f = [&spec](double v, const Vec& y) { return spec.F(v, y); };
  auto path = DensePath<Vec>::integrate(f, t, s, xi, step_count(t, s, steps_per_unit),
                                        guard_state);
  return path.back();
}

FreezingFrame::FreezingFrame(const ChainSpec& spec, double tau, Vec xi, double lo, double hi,
                             int steps_per_unit)
    : spec_(spec), tau_(tau), lo_(lo), hi_(hi), xi_(std::move(xi)) {
  spec_.validate();
  if (!(lo <= tau && tau <= hi) || lo >= hi)
    throw std::invalid_argument("FreezingFrame: need lo <= tau <= hi, lo < hi");
  auto f = [this](double v, const Vec& y) { return spec_.F(v, y); };
  if (tau_ < hi_)
    theta_fwd_ = DensePath<Vec>::integrate(f, tau_, hi_, xi_,
                                           step_count(tau_, hi_, steps_per_unit), guard_state);
  if (tau_ > lo_)
    theta_bwd_ = DensePath<Vec>::integrate(f, tau_, lo_, xi_,
                                           step_count(tau_, lo_, steps_per_unit), guard_state);

  auto rhsR = [this](double v, const Mat& R) -> Mat { return linearization(v) * R; };
  resolvent_ = DensePath<Mat>::integrate(rhsR, lo_, hi_, Mat::Identity(spec_.dim(), spec_.dim()),
                                         step_count(lo_, hi_, steps_per_unit));
  auto rhsC = [this](double v, const Vec& c) -> Vec {
    const Vec th = theta(v);
    return spec_.F(v, th) + linearization(v) * (c - th);
  };
  shift_ = DensePath<Vec>::integrate(rhsC, lo_, hi_, Vec::Zero(spec_.dim()),
                                     step_count(lo_, hi_, steps_per_unit));
}

Vec FreezingFrame::theta(double v) const {
  if (v >= tau_) {
    if (theta_fwd_.empty()) return xi_;
    return theta_fwd_.eval(v);
  }
  return theta_bwd_.eval(v);
}

Mat FreezingFrame::linearization(double v) const {
  return spec_.subdiagonal_jacobian(v, theta(v));
}

Mat FreezingFrame::resolvent(double s, double t) const {
  if (s < t) throw std::invalid_argument("resolvent: s >= t required");
  const Mat Rs = resolvent_.eval(s);
  if (t == lo_) return Rs;
  return Rs * unipotent_inverse(resolvent_.eval(t), spec_.n, spec_.d);
}

Mat FreezingFrame::resolvent_direct(double s, double t, int steps_per_unit) const {
  if (s < t) throw std::invalid_argument("resolvent_direct: s >= t required");
  if (s == t) return Mat::Identity(spec_.dim(), spec_.dim());
  auto rhs = [this](double v, const Mat& R) -> Mat { return linearization(v) * R; };
  return DensePath<Mat>::integrate(rhs, t, s, Mat::Identity(spec_.dim(), spec_.dim()),
                                   step_count(t, s, steps_per_unit))
      .back();
}

Vec FreezingFrame::mean_shift(double s, double t) const {
  const Vec cs = shift_.eval(s);
  if (t == lo_) return cs;
  return cs - resolvent(s, t) * shift_.eval(t);
}

Vec FreezingFrame::mean(const Vec& x, double s, double t) const {
  if (s < t || t < lo_ - 1e-12 || s > hi_ + 1e-12)
    throw std::invalid_argument("mean: [t,s] inside the frame span required");
  return resolvent(s, t) * x + mean_shift(s, t);
}

std::string FreezingFrame::to_record() const {
  std::ostringstream os;
  os.precision(17);
  os << "frame\n";
  os << "tau " << tau_ << "\nlo " << lo_ << "\nhi " << hi_ << "\n";
  os << "xi";
  for (int i = 0; i < xi_.size(); ++i) os << " " << xi_(i);
  os << "\nresolvent_hi_lo";
  const Mat R = resolvent_.eval(hi_);
  for (int r = 0; r < R.rows(); ++r)
    for (int c = 0; c < R.cols(); ++c) os << " " << R(r, c);
  os << "\nshift_hi_lo";
  const Vec c0 = shift_.eval(hi_);
  for (int i = 0; i < c0.size(); ++i) os << " " << c0(i);
  os << "\n";
  return os.str();
}

FramePtr make_frame(const ChainSpec& spec, double tau, const Vec& xi, double lo, double hi,
                    int steps_per_unit) {
  return std::make_shared<const FreezingFrame>(spec, tau, xi, lo, hi, steps_per_unit);
}

Mat resolvent(const ChainSpec& spec, double tau, const Vec& xi, double t, double s,
              int steps_per_unit) {
  if (s == t) return Mat::Identity(spec.dim(), spec.dim());
  FreezingFrame frame(spec, tau, xi, std::min(tau, t), std::max(tau, s), steps_per_unit);
  return frame.resolvent(s, t);
}

double homogeneous_distance(const Vec& x, const Vec& xp, int n, int d) {
  if (x.size() != xp.size() || x.size() != n * d)
    throw std::invalid_argument("homogeneous_distance: dimension mismatch");
  double acc = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double gap = (x - xp).segment((i - 1) * d, d).norm();
    acc += std::pow(gap, 1.0 / (2.0 * i - 1.0));
  }
  return acc;
}

Vec intrinsic_scale_apply(const Vec& x, double u, int n, int d) {
  Vec out(x.size());
  for (int i = 1; i <= n; ++i)
    out.segment((i - 1) * d, d) = std::pow(u, i) * x.segment((i - 1) * d, d);
  return out;
}

std::vector<SensitivityRow> flow_sensitivity_check(const ChainSpec& spec, const Vec& x,
                                                   const Vec& xp, double t, double s,
                                                   int steps_per_unit) {
  const double dist = homogeneous_distance(x, xp, spec.n, spec.d);
  if (dist > 1.0) throw std::invalid_argument("flow_sensitivity_check: d(x,x') <= 1 required");
  if (s - t > 1.0 || s < t)
    throw std::invalid_argument("flow_sensitivity_check: 0 <= s - t <= 1 required");
  const Vec a = flow(spec, t, s, x, steps_per_unit);
  const Vec b = flow(spec, t, s, xp, steps_per_unit);
  std::vector<SensitivityRow> rows(spec.n);
  for (int i = 1; i <= spec.n; ++i) {
    SensitivityRow& r = rows[i - 1];
    r.gap = (a - b).segment((i - 1) * spec.d, spec.d).norm();
    r.bound = std::pow(s - t, i - 0.5) + std::pow(dist, 2.0 * i - 1.0);
    r.ratio = r.bound > 0.0 ? r.gap / r.bound : 0.0;
  }
  return rows;
}

MeanFlowGap mean_vs_flow_gap(const ChainSpec& spec, const Vec& x, const Vec& xp, double t,
                             double c0, int steps_per_unit) {
  if (c0 <= 0.0 || c0 >= 1.0) throw std::invalid_argument("mean_vs_flow_gap: c0 in (0,1)");
  int iblk = 0;
  for (int i = 1; i <= spec.n; ++i) {
    if ((x - xp).segment((i - 1) * spec.d, spec.d).norm() > 0.0) {
      if (iblk != 0)
        throw std::invalid_argument("mean_vs_flow_gap: x, x' differ in more than one block");
      iblk = i;
    }
  }
  MeanFlowGap out;
  out.gap.assign(spec.n, 0.0);
  out.scale.assign(spec.n, 0.0);
  if (iblk == 0) {
    out.t0 = t;
    out.fitted_theta = 1.0;
    return out;
  }
  const double di = (x - xp).segment((iblk - 1) * spec.d, spec.d).norm();
  const double t0 = t + c0 * std::pow(di, 2.0 / (2.0 * iblk - 1.0));
  out.t0 = t0;
  FreezingFrame frame(spec, t, x, t, t0, steps_per_unit);
  const Vec m = frame.mean(xp, t0, t);
  const Vec th = flow(spec, t, t0, xp, steps_per_unit);
  double fitted = 1.0;
  for (int j = 1; j <= spec.n; ++j) {
    out.gap[j - 1] = (m - th).segment((j - 1) * spec.d, spec.d).norm();
    out.scale[j - 1] = std::pow(di, (2.0 * j - 1.0) / (2.0 * iblk - 1.0));
    if (out.gap[j - 1] > 0.0 && out.scale[j - 1] > 0.0) {
      const double th_j = std::log(out.gap[j - 1] / out.scale[j - 1]) / std::log(c0);
      fitted = std::min(fitted, th_j);
    }
  }
  out.fitted_theta = fitted;
  return out;
}

}  // namespace kolmolab
