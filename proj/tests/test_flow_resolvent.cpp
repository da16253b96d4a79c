#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kolmolab/flow_resolvent.hpp"
#include "kolmolab/ode.hpp"
#include "kolmolab/rng.hpp"

using namespace kolmolab;

namespace {

ChainSpec sine_drift_1d() {
  ChainSpec s;
  s.n = 1;
  s.d = 1;
  s.name = "sine";
  s.drift.push_back([](double, const Vec& x) -> Vec {
    Vec out(1);
    out << std::sin(x(0));
    return out;
  });
  s.sigma = [](double, const Vec&) { return Mat::Identity(1, 1); };
  s.beta = {1.0};
  s.eta = 0.5;
  s.lambda = 1.0;
  s.validate();
  return s;
}

}  // namespace

TEST_CASE("flow: zero drift is the identity") {
  ChainSpec spec = make_linear_chain(2, 1);
  spec.drift[0] = [](double, const Vec&) { return Vec::Zero(1); };
  spec.drift[1] = [](double, const Vec&) { return Vec::Zero(1); };
  Vec xi(2);
  xi << 0.3, -0.7;
  CHECK((flow(spec, 0.0, 0.8, xi) - xi).norm() == 0.0);
}

TEST_CASE("flow: linear Kolmogorov closed form") {
  const ChainSpec spec = make_linear_chain(2, 1);
  Vec xi(2);
  xi << 1.0, 0.0;
  const Vec th = flow(spec, 0.0, 1.0, xi);
  CHECK(th(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(th(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("flow: separable sine equation against the analytic solution") {
  // dy = sin(y): tan(y/2) = tan(y0/2) e^t
  const ChainSpec spec = sine_drift_1d();
  const double y0 = 0.8, t = 0.9;
  Vec xi(1);
  xi << y0;
  const double got = flow(spec, 0.0, t, xi)(0);
  const double expect = 2.0 * std::atan(std::tan(y0 / 2.0) * std::exp(t));
  CHECK(std::abs(got - expect) / std::abs(expect) < 1e-8);
}

TEST_CASE("flow: step halving agrees below tolerance") {
  const ChainSpec spec = make_holder_chain(3, 1);
  Vec xi(3);
  xi << 0.5, -0.4, 0.8;
  const Vec a = flow(spec, 0.0, 1.0, xi, 256);
  const Vec b = flow(spec, 0.0, 1.0, xi, 512);
  CHECK((a - b).norm() < 1e-9);
}

TEST_CASE("flow: blow-up guard trips") {
  ChainSpec spec = make_linear_chain(1, 1);
  spec.drift[0] = [](double, const Vec& x) -> Vec {
    Vec out(1);
    out << x(0) * x(0) * x(0);
    return out;
  };
  Vec xi(1);
  xi << 5.0;
  CHECK_THROWS_AS(flow(spec, 0.0, 5.0, xi), std::runtime_error);
}

TEST_CASE("resolvent: identity at s = t and linear closed form") {
  const ChainSpec spec = make_linear_chain(2, 1);
  const Vec xi = Vec::Zero(2);
  CHECK((resolvent(spec, 0.0, xi, 0.3, 0.3) - Mat::Identity(2, 2)).norm() == 0.0);
  const Mat R = resolvent(spec, 0.0, xi, 0.2, 0.9);
  Mat expect(2, 2);
  expect << 1.0, 0.0, 0.7, 1.0;
  CHECK((R - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("resolvent: unit determinant and cocycle on random draws") {
  // include a chain whose subdiagonal Jacobian varies along the trajectory
  ChainSpec sine_coupled = make_holder_chain(3, 1);
  sine_coupled.drift[1] = [](double, const Vec& x) -> Vec {
    Vec out(1);
    out << x(0) + 0.4 * std::sin(3.0 * x(0)) + signed_pow(x(1), 0.8);
    return out;
  };
  NoiseStream rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    const int which = rep % 3;
    ChainSpec spec = which == 0   ? make_linear_chain(3, 1)
                     : which == 1 ? sine_coupled
                                  : make_holder_chain(3, 1);
    Vec xi = rng.gaussian_vector(spec.dim());
    for (int i = 0; i < xi.size(); ++i)
      if (std::abs(xi(i)) < 0.3) xi(i) += xi(i) < 0 ? -0.4 : 0.4;
    const double t = 0.1 + 0.2 * rng.uniform();
    const double u = t + 0.05 + 0.2 * rng.uniform();
    const double s = u + 0.05 + 0.2 * rng.uniform();

    FreezingFrame frame(spec, t, xi, t, s);
    const Mat Rst = frame.resolvent(s, t);
    CHECK(std::abs(Rst.determinant() - 1.0) < 1e-10);
    // cocycle over three independent integrations (meshes do not align)
    const Mat comp = frame.resolvent_direct(s, u) * frame.resolvent_direct(u, t);
    CHECK((comp - frame.resolvent_direct(s, t)).cwiseAbs().maxCoeff() < 1e-8);
    // the anchored-product representation agrees with the direct route
    CHECK((Rst - frame.resolvent_direct(s, t)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("resolvent is block lower triangular with identity diagonal") {
  const ChainSpec spec = make_holder_chain(3, 1);
  Vec xi(3);
  xi << 0.7, -0.5, 0.9;
  FreezingFrame frame(spec, 0.0, xi, 0.0, 0.6);
  const Mat R = frame.resolvent(0.6, 0.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(R(i, i) == doctest::Approx(1.0).epsilon(1e-14));
    for (int j = i + 1; j < 3; ++j) CHECK(R(i, j) == 0.0);
  }
}

TEST_CASE("flow semigroup property") {
  const ChainSpec spec = make_holder_chain(2, 1);
  Vec xi(2);
  xi << 0.8, -0.6;
  const double t = 0.0, u = 0.35, s = 0.8;
  const Vec direct = flow(spec, t, s, xi);
  const Vec composed = flow(spec, u, s, flow(spec, t, u, xi));
  CHECK((direct - composed).norm() < 1e-8);
}

TEST_CASE("mean: trivial and linear closed forms") {
  ChainSpec zero = make_linear_chain(2, 1);
  zero.drift[1] = [](double, const Vec&) { return Vec::Zero(1); };
  FreezingFrame fz(zero, 0.0, Vec::Zero(2), 0.0, 1.0);
  Vec x(2);
  x << 0.4, -1.1;
  CHECK((fz.mean(x, 0.7, 0.0) - x).norm() < 1e-12);

  const ChainSpec lin = make_linear_chain(2, 1);
  FreezingFrame fl(lin, 0.0, Vec::Zero(2), 0.0, 1.0);
  const Vec m = fl.mean(x, 0.9, 0.1);
  CHECK(m(0) == doctest::Approx(x(0)).epsilon(1e-12));
  CHECK(m(1) == doctest::Approx(x(1) + 0.8 * x(0)).epsilon(1e-12));
}

TEST_CASE("mean matches an independently integrated linearized ODE") {
  const ChainSpec spec = make_holder_chain(2, 1);
  Vec xi(2);
  xi << 0.9, 0.5;
  const double t = 0.0, s = 0.7;
  FreezingFrame frame(spec, t, xi, t, s);
  NoiseStream rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    const Vec x = rng.gaussian_vector(2);
    // oracle: integrate m' = F(theta) + DF(theta)(m - theta) with its own stepper
    auto rhs = [&](double v, const Vec& m) -> Vec {
      const Vec th = frame.theta(v);
      return spec.F(v, th) + frame.linearization(v) * (m - th);
    };
    const Vec oracle = DensePath<Vec>::integrate(rhs, t, s, x, 1400).back();
    CHECK((frame.mean(x, s, t) - oracle).norm() < 1e-9);
  }
}

TEST_CASE("mean-map affinity defect") {
  const ChainSpec spec = make_holder_chain(3, 1);
  Vec xi(3);
  xi << 0.6, -0.8, 0.4;
  FreezingFrame frame(spec, 0.0, xi, 0.0, 0.8);
  const Mat R = frame.resolvent(0.8, 0.0);
  NoiseStream rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    const Vec x = rng.gaussian_vector(3), xp = rng.gaussian_vector(3);
    const Vec defect = frame.mean(x + xp, 0.8, 0.0) - frame.mean(x, 0.8, 0.0) - R * xp;
    CHECK(defect.norm() < 1e-9);
  }
}

TEST_CASE("mean rejects times outside the span") {
  const ChainSpec spec = make_linear_chain(2, 1);
  FreezingFrame frame(spec, 0.0, Vec::Zero(2), 0.0, 0.5);
  CHECK_THROWS(frame.mean(Vec::Zero(2), 0.9, 0.0));
}

TEST_CASE("homogeneous_distance values and quasi-distance properties") {
  Vec x(2), y(2);
  x << 1.0, 8.0;
  y << 0.0, 0.0;
  CHECK(homogeneous_distance(x, x, 2, 1) == 0.0);
  CHECK(homogeneous_distance(x, y, 2, 1) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(homogeneous_distance(x, y, 2, 1) == homogeneous_distance(y, x, 2, 1));
  CHECK_THROWS(homogeneous_distance(x, Vec::Zero(3), 2, 1));
}

TEST_CASE("homogeneous_distance scaling identity") {
  NoiseStream rng(23);
  const int n = 3, d = 2;
  for (double lambda : {0.25, 2.0, 9.0}) {
    const Vec x = rng.gaussian_vector(n * d), y = rng.gaussian_vector(n * d);
    const Vec xs = intrinsic_scale_apply(x, lambda, n, d) / std::sqrt(lambda);
    const Vec ys = intrinsic_scale_apply(y, lambda, n, d) / std::sqrt(lambda);
    const double lhs = homogeneous_distance(xs, ys, n, d);
    const double rhs = std::sqrt(lambda) * homogeneous_distance(x, y, n, d);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("flow_sensitivity_check: coincident points and linear closed form") {
  const ChainSpec lin = make_linear_chain(2, 1);
  Vec x(2), xp(2);
  x << 0.2, 0.1;
  const auto rows0 = flow_sensitivity_check(lin, x, x, 0.0, 0.5);
  for (const auto& r : rows0) CHECK(r.gap == 0.0);

  xp << 0.15, 0.04;
  const auto rows = flow_sensitivity_check(lin, x, xp, 0.0, 0.5);
  // gap_2 = |dx2 + (s-t) dx1| for the linear chain
  CHECK(rows[1].gap == doctest::Approx(std::abs(0.06 + 0.5 * 0.05)).epsilon(1e-9));
  for (const auto& r : rows) CHECK(r.ratio < 10.0);
}

TEST_CASE("flow_sensitivity_check: ratios bounded and stable under sample growth") {
  const ChainSpec spec = make_holder_chain(2, 1);
  NoiseStream rng(31);
  double worst_small = 0.0, worst_large = 0.0;
  for (int rep = 0; rep < 80; ++rep) {
    Vec x = 0.8 * rng.gaussian_vector(2);
    Vec dx = 0.05 * rng.gaussian_vector(2);
    if (homogeneous_distance(x, x + dx, 2, 1) > 1.0) continue;
    const double s = 0.2 + 0.6 * rng.uniform();
    for (const auto& r : flow_sensitivity_check(spec, x, x + dx, 0.0, s)) {
      if (rep < 40) worst_small = std::max(worst_small, r.ratio);
      worst_large = std::max(worst_large, r.ratio);
    }
  }
  CHECK(worst_small > 0.0);
  CHECK(worst_large < 25.0);
  // doubling the sample does not move the recorded envelope much
  CHECK(worst_large <= 2.0 * worst_small);
  CHECK_THROWS(flow_sensitivity_check(spec, Vec::Zero(2), 9.0 * Vec::Ones(2), 0.0, 0.5));
}

TEST_CASE("mean_vs_flow_gap: exact for affine drift, zero for equal points") {
  const ChainSpec lin = make_linear_chain(2, 1);
  Vec x(2), xp(2);
  x << 0.4, 0.2;
  xp << 0.4, 0.45;
  const MeanFlowGap g = mean_vs_flow_gap(lin, x, xp, 0.0, 0.5);
  for (double v : g.gap) CHECK(v < 1e-10);
  const MeanFlowGap g0 = mean_vs_flow_gap(lin, x, x, 0.0, 0.5);
  for (double v : g0.gap) CHECK(v == 0.0);
}

TEST_CASE("mean_vs_flow_gap: rejects multi-block perturbations") {
  const ChainSpec lin = make_linear_chain(2, 1);
  Vec x = Vec::Zero(2), xp = Vec::Ones(2);
  CHECK_THROWS(mean_vs_flow_gap(lin, x, xp, 0.0, 0.5));
}

TEST_CASE("mean_vs_flow_gap: normalized gap decreases with c0 on the Holder chain") {
  const ChainSpec spec = make_holder_chain(2, 1);
  Vec x(2), xp(2);
  x << 0.7, 0.4;
  xp << 0.7, 0.9;
  double prev = 1e300;
  for (double c0 : {0.5, 0.25, 0.1}) {
    const MeanFlowGap g = mean_vs_flow_gap(spec, x, xp, 0.0, c0);
    double norm = 0.0;
    for (std::size_t j = 0; j < g.gap.size(); ++j)
      if (g.scale[j] > 0.0) norm = std::max(norm, g.gap[j] / g.scale[j]);
    CHECK(norm < prev);
    prev = norm;
  }
}

TEST_CASE("frame serialization carries the run-persistence fields") {
  const ChainSpec spec = make_linear_chain(2, 1);
  FreezingFrame frame(spec, 0.0, Vec::Zero(2), 0.0, 0.5);
  const std::string rec = frame.to_record();
  CHECK(rec.find("tau") != std::string::npos);
  CHECK(rec.find("resolvent_hi_lo") != std::string::npos);
  CHECK(rec.find("shift_hi_lo") != std::string::npos);
}

TEST_CASE("unipotent_inverse preserves structure exactly") {
  Mat R = Mat::Identity(6, 6);
  R.block(2, 0, 2, 2) = Mat::Random(2, 2);
  R.block(4, 2, 2, 2) = Mat::Random(2, 2);
  R.block(4, 0, 2, 2) = Mat::Random(2, 2);
  const Mat inv = unipotent_inverse(R, 3, 2);
  CHECK((R * inv - Mat::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-13);
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j)
      if (j / 2 > i / 2) CHECK(inv(i, j) == 0.0);
}
