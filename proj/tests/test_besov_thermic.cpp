#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kolmolab/besov_thermic.hpp"
#include "kolmolab/quadrature.hpp"

using namespace kolmolab;

namespace {

double window(double x) {
  const double t = std::abs(x) - 1.0;
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double c = std::cos(0.5 * M_PI * t);
  return c * c;
}

GridFunction holder_probe(double beta, int count = 2049) {
  return GridFunction::sample(
      [beta](double x) { return std::pow(std::abs(x), beta) * window(x); }, -2.0, 2.0, count);
}

}  // namespace

TEST_CASE("heat_kernel basics") {
  CHECK(heat_kernel(1.0, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-14));
  CHECK(heat_kernel(1.0, 0.0) == doctest::Approx(0.39894).epsilon(1e-4));
  // unit mass by quadrature
  const QuadRule q = gauss_legendre(200, -12.0, 12.0);
  for (double v : {0.3, 1.0, 2.5}) {
    double mass = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i)
      mass += q.weights[i] * heat_kernel(v, q.nodes[i]);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK_THROWS(heat_kernel(0.0, 1.0));
}

TEST_CASE("heat kernel semigroup h_u * h_v = h_{u+v}") {
  const double u = 0.4, v = 0.7;
  const QuadRule q = gauss_legendre(400, -14.0, 14.0);
  for (double z : {0.0, 0.5, 1.5}) {
    double conv = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i)
      conv += q.weights[i] * heat_kernel(u, z - q.nodes[i]) * heat_kernel(v, q.nodes[i]);
    CHECK(std::abs(conv - heat_kernel(u + v, z)) / heat_kernel(u + v, z) < 1e-6);
  }
}

TEST_CASE("GridFunction validation and sampling") {
  GridFunction g;
  g.spacing = 0.1;
  g.values.assign(4, 0.0);
  CHECK_THROWS(g.validate());  // too few points
  const GridFunction f = GridFunction::sample([](double x) { return x * x; }, 0.0, 1.0, 11);
  CHECK(f.x(10) == doctest::Approx(1.0));
  CHECK(f.values[10] == doctest::Approx(1.0));
  const GridFunction df = f.derivative();
  CHECK(df.values[5] == doctest::Approx(2.0 * f.x(5)).epsilon(1e-10));
}

TEST_CASE("thermic_norm: zero function") {
  GridFunction z;
  z.origin = -1.0;
  z.spacing = 0.01;
  z.values.assign(201, 0.0);
  const ThermicResult r = thermic_norm(z, 0.5);
  CHECK(r.value == 0.0);
}

TEST_CASE("thermic_norm: dichotomy across the Holder exponent") {
  const GridFunction f = holder_probe(0.5);
  const ThermicResult ok = thermic_norm(f, 0.4);
  CHECK(ok.converged);
  CHECK(ok.value > 0.0);
  const ThermicResult bad = thermic_norm(f, 0.6);
  CHECK_FALSE(bad.converged);
}

TEST_CASE("thermic_norm: homogeneity and quasi-triangle inequality") {
  const GridFunction f = holder_probe(0.5, 513);
  GridFunction g = f;
  for (double& v : g.values) v *= -2.5;
  const double nf = thermic_norm(f, 0.4).value;
  const double ng = thermic_norm(g, 0.4).value;
  CHECK(ng == doctest::Approx(2.5 * nf).epsilon(1e-12));

  GridFunction h = GridFunction::sample(
      [](double x) { return std::sin(2.0 * x) * window(x); }, -2.0, 2.0, 513);
  GridFunction sum = f;
  for (int i = 0; i < sum.count(); ++i) sum.values[i] += h.values[i];
  const double ns = thermic_norm(sum, 0.4).value;
  const double nh = thermic_norm(h, 0.4).value;
  CHECK(ns <= 1.0 * (nf + nh) + 1e-12);  // triangle holds with K = 1 for these conventions
}

TEST_CASE("thermic_norm: monotone in alpha where finite") {
  const GridFunction f = holder_probe(0.7, 1025);
  double prev = 0.0;
  for (double alpha : {0.15, 0.3, 0.45, 0.6}) {
    const ThermicResult r = thermic_norm(f, alpha);
    CHECK(r.converged);
    CHECK(r.value >= prev);
    prev = r.value;
  }
}

TEST_CASE("thermic_norm: dilation rescales the heat term consistently") {
  // norm of f(lambda .) grows like lambda^alpha for the Holder seminorm part
  const double beta = 0.5, alpha = 0.45;
  std::vector<double> lx, ly;
  for (double lambda : {1.0, 2.0, 4.0}) {
    const GridFunction f = GridFunction::sample(
        [&](double x) { return std::pow(std::abs(lambda * x), beta) * window(x); }, -2.0, 2.0,
        2049);
    ThermicOptions opts;
    const ThermicResult r = thermic_norm(f, alpha, opts);
    lx.push_back(std::log(lambda));
    ly.push_back(std::log(r.value));
  }
  const double slope = fit_line(lx, ly).slope;
  CHECK(slope == doctest::Approx(beta).epsilon(0.35));
}

TEST_CASE("thermic_norm: p = q = 1 variant stays finite below the exponent") {
  const GridFunction f = holder_probe(0.5, 513);
  ThermicOptions opts;
  opts.p = 1.0;
  opts.q = 1.0;
  const ThermicResult r = thermic_norm(f, 0.3, opts);
  CHECK(r.value > 0.0);
  CHECK(std::isfinite(r.value));
}

TEST_CASE("norm_equivalence_ratio: family inside a common envelope") {
  const double alpha = 0.5;
  std::vector<GridFunction> family;
  family.push_back(holder_probe(alpha));
  family.push_back(GridFunction::sample(
      [](double x) { return std::sin(3.0 * x) * window(x); }, -2.0, 2.0, 2049));
  family.push_back(GridFunction::sample(
      [](double x) { return (1.0 - 2.0 * x * x) * std::exp(-4.0 * x * x); }, -2.0, 2.0, 2049));
  for (const GridFunction& f : family) {
    const double ratio = norm_equivalence_ratio(f, alpha);
    CHECK(ratio >= 0.1);
    CHECK(ratio <= 10.0);
  }
}

TEST_CASE("norm_equivalence_ratio: constants rejected, dilation stability") {
  GridFunction c;
  c.origin = -1.0;
  c.spacing = 0.01;
  c.values.assign(201, 4.2);
  CHECK_THROWS(norm_equivalence_ratio(c, 0.5));

  const GridFunction f = GridFunction::sample(
      [](double x) { return std::sin(3.0 * x) * window(x); }, -2.0, 2.0, 1025);
  const GridFunction f2 = GridFunction::sample(
      [](double x) { return std::sin(6.0 * x) * window(x); }, -2.0, 2.0, 1025);
  const double r1 = norm_equivalence_ratio(f, 0.5);
  const double r2 = norm_equivalence_ratio(f2, 0.5);
  CHECK(r2 / r1 < 2.0);
  CHECK(r1 / r2 < 2.0);
}

TEST_CASE("besov_exponents: formulas and flags") {
  {
    const BesovExponents e = besov_exponents(2, 2, 0.0);
    CHECK(e.alpha == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(e.rho == 3.0);
    CHECK(e.gamma == 0.5);
    CHECK_FALSE(e.gamma_strict);  // boundary case flagged non-strict
  }
  {
    const BesovExponents e = besov_exponents(2, 2, 0.08);
    CHECK(e.alpha == doctest::Approx(0.34).epsilon(1e-12));
    CHECK(e.rho == 3.0);
    CHECK(e.gamma == doctest::Approx(0.54).epsilon(1e-12));
    CHECK(e.gamma_strict);
  }
  {
    const BesovExponents e = besov_exponents(3, 3, 0.04);
    CHECK(e.gamma == doctest::Approx(0.56).epsilon(1e-12));
    CHECK(e.gamma_strict);
    CHECK(e.alpha_admissible);
  }
  for (int i = 2; i <= 5; ++i)
    for (double eta : {0.01, 0.05, 0.2}) {
      const BesovExponents e = besov_exponents(i, i, eta);
      CHECK(e.gamma > 0.5);
      CHECK(e.alpha_admissible);
    }
  CHECK_THROWS(besov_exponents(1, 2, 0.1));
  CHECK_THROWS(besov_exponents(3, 2, 0.1));
}
