#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kolmolab/green_estimator.hpp"
#include "kolmolab/quadrature.hpp"
#include "kolmolab/sde_lab.hpp"

using namespace kolmolab;

TEST_CASE("euler_maruyama: frozen dynamics stay constant") {
  ChainSpec spec = make_linear_chain(2, 1);
  spec.drift[1] = [](double, const Vec&) { return Vec::Zero(1); };
  spec.sigma = [](double, const Vec&) { return Mat::Zero(1, 1); };
  NoiseStream stream(1, 0);
  Vec x0(2);
  x0 << 0.7, -0.3;
  const auto path = euler_maruyama(spec, x0, 1.0, 64, stream);
  for (const Vec& x : path) CHECK((x - x0).norm() == 0.0);
}

TEST_CASE("euler_maruyama: integrated BM variance T^3/3") {
  const ChainSpec spec = make_linear_chain(2, 1);
  const double T = 1.0;
  const int M = 10000, steps = 256;
  double acc = 0.0, acc2 = 0.0;
  for (int m = 0; m < M; ++m) {
    NoiseStream stream(99, m);
    const auto path = euler_maruyama(spec, Vec::Zero(2), T, steps, stream);
    const double v = path.back()(1);
    acc += v;
    acc2 += v * v;
  }
  const double var = acc2 / M - (acc / M) * (acc / M);
  // variance of the variance estimator ~ 2 var^2 / M
  const double se = std::sqrt(2.0 / M) * var;
  CHECK(std::abs(var - T * T * T / 3.0) <= 3.0 * se + 0.01 * var);
}

TEST_CASE("euler_maruyama: strong self-convergence slope") {
  // coarse grids against a shared fine-grid reference, same Brownian increments
  const ChainSpec spec = make_holder_chain(2, 1);
  const double T = 0.5;
  const int fine = 2048;
  const int M = 160;
  std::vector<int> levels = {64, 128, 256, 512};
  std::vector<double> err(levels.size(), 0.0);
  Vec x0(2);
  x0 << 0.3, -0.2;
  for (int m = 0; m < M; ++m) {
    NoiseStream stream(7, m);
    std::vector<double> dw(fine);
    for (int k = 0; k < fine; ++k) dw[k] = std::sqrt(T / fine) * stream.gaussian();
    auto run = [&](int steps) {
      const int agg = fine / steps;
      Vec x = x0;
      const double dt = T / steps;
      for (int k = 0; k < steps; ++k) {
        double inc = 0.0;
        for (int j = 0; j < agg; ++j) inc += dw[k * agg + j];
        Vec xn = x + dt * spec.F(k * dt, x);
        xn(0) += inc;
        x = xn;
      }
      return x;
    };
    const Vec ref = run(fine);
    for (std::size_t li = 0; li < levels.size(); ++li)
      err[li] += (run(levels[li]) - ref).norm() / M;
  }
  std::vector<double> lx, ly;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    lx.push_back(std::log(T / levels[li]));
    ly.push_back(std::log(err[li]));
  }
  CHECK(fit_line(lx, ly).slope >= 0.45);
}

TEST_CASE("coupled_paths: identical specs give identical paths") {
  const ChainSpec spec = make_holder_chain(2, 1);
  NoiseStream stream(5, 3);
  Vec x0(2);
  x0 << 0.1, 0.2;
  const auto [pa, pb] = coupled_paths(spec, spec, x0, 0.5, 128, stream);
  for (std::size_t k = 0; k < pa.size(); ++k) CHECK((pa[k] - pb[k]).norm() == 0.0);
}

TEST_CASE("coupled_paths: rejects mismatched streams and dimensions") {
  const ChainSpec a = make_linear_chain(2, 1);
  CHECK_THROWS(coupled_paths(a, make_linear_chain(3, 1), Vec::Zero(2), 0.5, 8,
                             NoiseStream(1, 0)));
  CHECK_THROWS(
      coupled_paths(a, a, Vec::Zero(2), 0.5, 8, NoiseStream(1, 0), NoiseStream(2, 0)));
  CHECK_THROWS(
      coupled_paths(a, a, Vec::Zero(2), 0.5, 8, NoiseStream(1, 0), NoiseStream(1, 1)));
}

TEST_CASE("coupled_paths: mollification gap shrinks with delta") {
  const ChainSpec spec = make_lipschitz_chain(2, 1);
  Vec x0(2);
  x0 << -1.0, 0.3;
  double prev = 1e300;
  for (double delta : {0.4, 0.1, 0.025}) {
    const ChainSpec moll = mollify_drift(spec, MollifierSchedule::uniform(2, delta));
    NoiseStream stream(11, 2);
    const auto [pa, pb] = coupled_paths(spec, moll, x0, 0.8, 512, stream);
    double sup = 0.0;
    for (std::size_t k = 0; k < pa.size(); ++k)
      sup = std::max(sup, (pa[k] - pb[k]).norm());
    CHECK(sup < prev);
    prev = sup;
  }
  CHECK(prev < 5e-3);
}

TEST_CASE("ensembles are deterministic and worker-count independent") {
  const ChainSpec spec = make_holder_chain(2, 1);
  const PathEnsemble a = simulate_ensemble(spec, Vec::Zero(2), 0.5, 64, 50, 1234, 1);
  const PathEnsemble b = simulate_ensemble(spec, Vec::Zero(2), 0.5, 64, 50, 1234, 4);
  REQUIRE(a.states.size() == b.states.size());
  for (int m = 0; m < a.paths(); ++m)
    for (std::size_t k = 0; k < a.states[m].size(); ++k)
      CHECK((a.states[m][k] - b.states[m][k]).norm() == 0.0);
  const PathEnsemble c = simulate_ensemble(spec, Vec::Zero(2), 0.5, 64, 50, 9999, 1);
  CHECK((a.states[0].back() - c.states[0].back()).norm() != 0.0);
  a.validate();
}

TEST_CASE("ensemble_csv is columnar with path id and time") {
  const ChainSpec spec = make_linear_chain(2, 1);
  const PathEnsemble ens = simulate_ensemble(spec, Vec::Zero(2), 0.25, 4, 2, 7);
  const std::string csv = ensemble_csv(ens);
  CHECK(csv.rfind("path,time,x1,x2", 0) == 0);
  // 2 paths x 5 rows + header
  int lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 11);
}

TEST_CASE("strong_uniqueness_probe: Lipschitz kink chain decays fast") {
  const ChainSpec spec = make_lipschitz_chain(2, 1);
  Vec x0(2);
  x0 << -1.0, 0.3;
  const auto curve =
      strong_uniqueness_probe(spec, {0.2, 0.1, 0.05, 0.025}, 800, 0.8, 1024, x0, 21);
  REQUIRE(curve.size() == 3);
  for (std::size_t k = 1; k < curve.size(); ++k)
    CHECK(curve[k - 1].value / curve[k].value >= 10.0);
}

TEST_CASE("strong_uniqueness_probe: Holder chain is non-increasing within bands") {
  const ChainSpec spec = make_holder_chain(2, 1, {1.0, 0.8});
  const auto curve = strong_uniqueness_probe(spec, {0.2, 0.1, 0.05, 0.025}, 600, 0.5, 512,
                                             Vec::Zero(2), 31);
  for (std::size_t k = 1; k < curve.size(); ++k)
    CHECK(curve[k].value <=
          curve[k - 1].value + curve[k].ci_half_width + curve[k - 1].ci_half_width);
}

TEST_CASE("strong_uniqueness_probe: identical ladder levels give zero") {
  const ChainSpec spec = make_holder_chain(2, 1);
  const auto curve =
      strong_uniqueness_probe(spec, {0.1, 0.1}, 50, 0.3, 64, Vec::Zero(2), 3);
  CHECK(curve[0].value == 0.0);
}

TEST_CASE("fluctuation_scaling: Brownian and integrated scales") {
  const ChainSpec spec = make_linear_chain(3, 1);
  const FluctuationFit f1 = fluctuation_scaling(spec, 1, 1.0, 512, 4000, 5);
  CHECK(std::abs(f1.fitted - 0.5) <= 0.03);
  const FluctuationFit f2 = fluctuation_scaling(spec, 2, 1.0, 512, 4000, 5);
  CHECK(std::abs(f2.fitted - 1.5) <= 0.05);
  const FluctuationFit f3 = fluctuation_scaling(spec, 3, 1.0, 512, 4000, 5);
  CHECK(std::abs(f3.fitted - 2.5) <= 0.10);
}

TEST_CASE("fluctuation_scaling: degenerate variance is reported") {
  ChainSpec spec = make_linear_chain(2, 1);
  spec.sigma = [](double, const Vec&) { return Mat::Zero(1, 1); };
  CHECK_THROWS(fluctuation_scaling(spec, 2, 1.0, 64, 100, 5));
}

TEST_CASE("zvonkin_remainder: vanishes when mollification is a no-op") {
  const ChainSpec spec = make_linear_chain(2, 1);
  const ChainSpec moll = mollify_drift(spec, MollifierSchedule::uniform(2, 0.1));
  NoiseStream stream(3, 0);
  const auto path = euler_maruyama(spec, Vec::Zero(2), 0.5, 64, stream);
  std::vector<double> times(path.size());
  for (std::size_t k = 0; k < times.size(); ++k) times[k] = 0.5 * k / (times.size() - 1.0);
  auto U = [](double, const Vec& x) { return Vec(x); };
  auto DU = [](double, const Vec& x) { return Mat(Mat::Identity(x.size(), x.size())); };
  CHECK(zvonkin_remainder(spec, moll, U, DU, path, times).norm() < 1e-12);
}

TEST_CASE("zvonkin_remainder: zero drift gives a zero remainder") {
  ChainSpec spec = make_linear_chain(2, 1);
  spec.drift[1] = [](double, const Vec&) { return Vec::Zero(1); };
  ChainSpec moll = mollify_drift(spec, MollifierSchedule::uniform(2, 0.05));
  NoiseStream stream(4, 0);
  const auto path = euler_maruyama(spec, Vec::Zero(2), 0.4, 32, stream);
  std::vector<double> times(path.size());
  for (std::size_t k = 0; k < times.size(); ++k) times[k] = 0.4 * k / (times.size() - 1.0);
  auto U = [](double, const Vec& x) { return Vec(Vec::Zero(x.size())); };
  auto DU = [](double, const Vec& x) { return Mat(Mat::Zero(x.size(), x.size())); };
  CHECK(zvonkin_remainder(spec, moll, U, DU, path, times).norm() == 0.0);
}

TEST_CASE("zvonkin_remainder: decreasing in delta on the Holder chain") {
  const ChainSpec spec = make_holder_chain(2, 1, {1.0, 0.8});
  NoiseStream stream(6, 1);
  const auto path = euler_maruyama(spec, 0.4 * Vec::Ones(2), 0.3, 32, stream);
  std::vector<double> times(path.size());
  for (std::size_t k = 0; k < times.size(); ++k) times[k] = 0.3 * k / (times.size() - 1.0);

  double prev = 1e300;
  for (double delta : {0.1, 0.05, 0.025}) {
    const ChainSpec moll = mollify_drift(spec, MollifierSchedule::uniform(2, delta));
    // Zvonkin field: u_1 = 0 (F_1 = 0), u_2 = Green of the mollified level-2 drift
    auto component_job = [&](double s, const Vec& y) {
      GreenJob job;
      job.spec = moll;
      job.t = s;
      job.T = 0.35;
      job.x = y;
      job.f = [&moll](double ss, const Vec& yy) { return moll.drift[1](ss, yy)(0); };
      job.time_nodes = 12;
      job.gh_order = 8;
      job.steps_per_unit = 128;
      return job;
    };
    auto U = [&](double s, const Vec& y) {
      Vec out = Vec::Zero(2);
      out(1) = green_apply(component_job(s, y));
      return out;
    };
    auto DU = [&](double s, const Vec& y) {
      Mat out = Mat::Zero(2, 2);
      out.row(1) = green_derivatives(component_job(s, y)).grad.transpose();
      return out;
    };
    const double r = zvonkin_remainder(spec, moll, U, DU, path, times).norm();
    CHECK(r < prev);
    prev = r;
  }
}
