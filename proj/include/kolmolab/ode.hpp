#pragma once
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace kolmolab {

/// Fixed-step RK4 trajectory with dense output.
/// Nodes store value and derivative; evaluation between nodes is cubic Hermite,
/// so the interpolant matches the O(h^4) accuracy of the steps.
/// State must support Eigen-style linear arithmetic (VectorXd, MatrixXd).
template <class State>
class DensePath {
 public:
  DensePath() = default;

  /// Integrates y' = f(t, y) from t0 to t1 (either direction) in `steps` uniform steps.
  /// `guard` is called on each node value; it may throw (blow-up detection).
  static DensePath integrate(const std::function<State(double, const State&)>& f, double t0,
                             double t1, State y0, int steps,
                             const std::function<void(const State&)>& guard = nullptr) {
    if (steps < 1) throw std::invalid_argument("DensePath: steps >= 1 required");
    DensePath p;
    p.t0_ = t0;
    p.h_ = (t1 - t0) / steps;
    p.values_.reserve(steps + 1);
    p.derivs_.reserve(steps + 1);
    State y = std::move(y0);
    State k1 = f(t0, y);
    p.values_.push_back(y);
    p.derivs_.push_back(k1);
    for (int i = 0; i < steps; ++i) {
      const double t = t0 + i * p.h_;
      const double h = p.h_;
      State k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
      State k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
      State k4 = f(t + h, y + h * k3);
      y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      k1 = f(t + h, y);
      if (guard) guard(y);
      p.values_.push_back(y);
      p.derivs_.push_back(k1);
    }
    return p;
  }

  bool empty() const { return values_.empty(); }
  double t0() const { return t0_; }
  double t1() const { return t0_ + h_ * (static_cast<double>(values_.size()) - 1.0); }
  const State& front() const { return values_.front(); }
  const State& back() const { return values_.back(); }

  State eval(double t) const {
    if (values_.size() == 1) return values_.front();
    double u = (t - t0_) / h_;
    const int last = static_cast<int>(values_.size()) - 2;
    int k = static_cast<int>(std::floor(u));
    if (k < 0) k = 0;
    if (k > last) k = last;
    double s = u - k;
    if (s < -1e-9 || s > 1.0 + 1e-9) throw std::out_of_range("DensePath::eval outside span");
    s = std::min(std::max(s, 0.0), 1.0);
    const State& y0 = values_[k];
    const State& y1 = values_[k + 1];
    const State& d0 = derivs_[k];
    const State& d1 = derivs_[k + 1];
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return h00 * y0 + (h10 * h_) * d0 + h01 * y1 + (h11 * h_) * d1;
  }

 private:
  double t0_ = 0.0, h_ = 1.0;
  std::vector<State> values_;
  std::vector<State> derivs_;
};

}  // namespace kolmolab
