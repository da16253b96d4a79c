#include "kolmolab/sde_lab.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "kolmolab/flow_resolvent.hpp"
#include "kolmolab/quadrature.hpp"
#include "kolmolab/run_io.hpp"

namespace kolmolab {

std::string ensemble_csv(const PathEnsemble& ensemble) {
  ensemble.validate();
  std::vector<std::string> header{"path", "time"};
  for (int i = 1; i <= ensemble.n; ++i)
    for (int c = 0; c < ensemble.d; ++c)
      header.push_back("x" + std::to_string(i) + (ensemble.d > 1 ? "_" + std::to_string(c) : ""));
  CsvWriter w(header);
  for (int m = 0; m < ensemble.paths(); ++m) {
    for (std::size_t k = 0; k < ensemble.times.size(); ++k) {
      std::vector<std::string> row{std::to_string(m), format_num(ensemble.times[k])};
      const Vec& x = ensemble.states[m][k];
      for (int i = 0; i < x.size(); ++i) row.push_back(format_num(x(i)));
      w.add_row(row);
    }
  }
  return w.str();
}

namespace {

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
  if (jobs <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (count + jobs - 1) / jobs;
  for (int w = 0; w < jobs; ++w) {
    const int lo = w * chunk, hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (int i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

void PathEnsemble::validate() const {
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw std::invalid_argument("PathEnsemble: time grid strictly increasing");
  for (const auto& p : states)
    if (p.size() != times.size()) throw std::invalid_argument("PathEnsemble: ragged path");
}

std::vector<Vec> euler_maruyama(const ChainSpec& spec, const Vec& x0, double T, int steps,
                                NoiseStream& noise) {
  if (steps < 1) throw std::invalid_argument("euler_maruyama: steps >= 1");
  if (x0.size() != spec.dim()) throw std::invalid_argument("euler_maruyama: x0 dimension");
  const int d = spec.d;
  const double dt = T / steps;
  const double sq = std::sqrt(dt);
  std::vector<Vec> path;
  path.reserve(steps + 1);
  Vec x = x0;
  path.push_back(x);
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const Vec dw = sq * noise.gaussian_vector(d);
    Vec xn = x + dt * spec.F(t, x);
    xn.head(d) += spec.sigma(t, x) * dw;
    if (!xn.allFinite() || xn.cwiseAbs().maxCoeff() > kBlowupGuard)
      throw std::runtime_error("euler_maruyama: blow-up guard tripped");
    x = std::move(xn);
    path.push_back(x);
  }
  return path;
}

std::pair<std::vector<Vec>, std::vector<Vec>> coupled_paths(const ChainSpec& spec_a,
                                                            const ChainSpec& spec_b,
                                                            const Vec& x0, double T, int steps,
                                                            const NoiseStream& noise_a,
                                                            const NoiseStream& noise_b) {
  if (noise_a.seed() != noise_b.seed() || noise_a.substream() != noise_b.substream())
    throw std::invalid_argument("coupled_paths: shared noise required (seed/substream differ)");
  return coupled_paths(spec_a, spec_b, x0, T, steps, noise_a);
}

std::pair<std::vector<Vec>, std::vector<Vec>> coupled_paths(const ChainSpec& spec_a,
                                                            const ChainSpec& spec_b,
                                                            const Vec& x0, double T, int steps,
                                                            const NoiseStream& noise) {
  if (spec_a.n != spec_b.n || spec_a.d != spec_b.d)
    throw std::invalid_argument("coupled_paths: identical (n, d) required");
  const int d = spec_a.d;
  const double dt = T / steps;
  const double sq = std::sqrt(dt);
  NoiseStream stream = noise;  // private copy; increments drawn once per step
  std::vector<Vec> pa, pb;
  pa.reserve(steps + 1);
  pb.reserve(steps + 1);
  Vec xa = x0, xb = x0;
  pa.push_back(xa);
  pb.push_back(xb);
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const Vec dw = sq * stream.gaussian_vector(d);
    Vec na = xa + dt * spec_a.F(t, xa);
    na.head(d) += spec_a.sigma(t, xa) * dw;
    Vec nb = xb + dt * spec_b.F(t, xb);
    nb.head(d) += spec_b.sigma(t, xb) * dw;
    if (!na.allFinite() || !nb.allFinite() ||
        std::max(na.cwiseAbs().maxCoeff(), nb.cwiseAbs().maxCoeff()) > kBlowupGuard)
      throw std::runtime_error("coupled_paths: blow-up guard tripped");
    xa = std::move(na);
    xb = std::move(nb);
    pa.push_back(xa);
    pb.push_back(xb);
  }
  return {std::move(pa), std::move(pb)};
}

PathEnsemble simulate_ensemble(const ChainSpec& spec, const Vec& x0, double T, int steps, int M,
                               std::uint64_t seed, int jobs) {
  PathEnsemble ens;
  ens.n = spec.n;
  ens.d = spec.d;
  ens.seed = seed;
  ens.spec_name = spec.name;
  ens.times.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) ens.times[k] = T * k / steps;
  ens.states.resize(M);
  parallel_for(M, jobs, [&](int m) {
    NoiseStream stream(seed, static_cast<std::uint64_t>(m));
    ens.states[m] = euler_maruyama(spec, x0, T, steps, stream);
  });
  return ens;
}

std::vector<ProbePoint> strong_uniqueness_probe(const ChainSpec& spec,
                                                const std::vector<double>& deltas, int M,
                                                double T, int steps, const Vec& x0,
                                                std::uint64_t seed, int quad_nodes, int jobs,
                                                int batches) {
  if (deltas.size() < 2)
    throw std::invalid_argument("strong_uniqueness_probe: need >= 2 ladder levels");
  for (std::size_t k = 1; k < deltas.size(); ++k)
    if (deltas[k] > deltas[k - 1])
      throw std::invalid_argument("strong_uniqueness_probe: ladder must not increase");

  std::vector<ProbePoint> curve;
  for (std::size_t k = 0; k + 1 < deltas.size(); ++k) {
    const ChainSpec hi = mollify_drift(spec, MollifierSchedule::uniform(spec.n, deltas[k]),
                                       quad_nodes);
    const ChainSpec lo = mollify_drift(spec, MollifierSchedule::uniform(spec.n, deltas[k + 1]),
                                       quad_nodes);
    std::vector<double> sup2(M, 0.0);
    parallel_for(M, jobs, [&](int m) {
      NoiseStream stream(seed, static_cast<std::uint64_t>(m));
      const auto [pa, pb] = coupled_paths(hi, lo, x0, T, steps, stream);
      double worst = 0.0;
      for (std::size_t j = 0; j < pa.size(); ++j)
        worst = std::max(worst, (pa[j] - pb[j]).squaredNorm());
      sup2[m] = worst;
    });
    ProbePoint p;
    p.delta_hi = deltas[k];
    p.delta_lo = deltas[k + 1];
    double mean = 0.0;
    for (double v : sup2) mean += v;
    mean /= M;
    p.value = mean;
    // batch means -> 95% normal band
    const int B = std::min(batches, M);
    std::vector<double> bm(B, 0.0);
    std::vector<int> bc(B, 0);
    for (int m = 0; m < M; ++m) {
      bm[m % B] += sup2[m];
      bc[m % B] += 1;
    }
    double var = 0.0;
    for (int b = 0; b < B; ++b) {
      bm[b] /= bc[b];
      var += (bm[b] - mean) * (bm[b] - mean);
    }
    var /= (B - 1);
    p.ci_half_width = 1.96 * std::sqrt(var / B);
    curve.push_back(p);
  }
  return curve;
}

FluctuationFit fluctuation_scaling(const ChainSpec& spec, int level, double T, int steps, int M,
                                   std::uint64_t seed, int fit_points, int jobs) {
  if (level < 1 || level > spec.n) throw std::invalid_argument("fluctuation_scaling: level");
  const int d = spec.d;
  // dyadic sampling times T, T/2, ..., mapped to grid indices
  std::vector<int> idx;
  std::vector<double> times;
  for (int k = 0; k < fit_points; ++k) {
    const double t = T * std::pow(0.5, k);
    int i = static_cast<int>(std::lround(t / T * steps));
    i = std::max(1, std::min(steps, i));
    idx.push_back(i);
    times.push_back(T * i / steps);
  }

  std::vector<Vec> sums(idx.size(), Vec::Zero(d));
  std::vector<double> sq(idx.size(), 0.0);
  std::vector<std::vector<Vec>> slot(M);
  parallel_for(M, jobs, [&](int m) {
    NoiseStream stream(seed, static_cast<std::uint64_t>(m));
    const auto path = euler_maruyama(spec, Vec::Zero(spec.dim()), T, steps, stream);
    std::vector<Vec> vals;
    vals.reserve(idx.size());
    for (int i : idx) vals.push_back(path[i].segment((level - 1) * d, d));
    slot[m] = std::move(vals);
  });
  for (int m = 0; m < M; ++m)
    for (std::size_t j = 0; j < idx.size(); ++j) {
      sums[j] += slot[m][j];
      sq[j] += slot[m][j].squaredNorm();
    }

  FluctuationFit fit;
  fit.level = level;
  fit.expected = level - 0.5;
  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const Vec mean = sums[j] / M;
    const double var = sq[j] / M - mean.squaredNorm();
    if (var <= 0.0) throw std::runtime_error("fluctuation_scaling: degenerate variance");
    const double sd = std::sqrt(var);
    fit.times.push_back(times[j]);
    fit.stds.push_back(sd);
    lx.push_back(std::log(times[j]));
    ly.push_back(std::log(sd));
  }
  fit.fitted = fit_line(lx, ly).slope;
  return fit;
}

Vec zvonkin_remainder(const ChainSpec& spec, const ChainSpec& spec_mollified, const FieldFn& U,
                      const FieldJacFn& DU, const std::vector<Vec>& path,
                      const std::vector<double>& times) {
  if (path.size() != times.size() || path.size() < 2)
    throw std::invalid_argument("zvonkin_remainder: path/time mismatch");
  const int nd = spec.dim();
  Vec acc = Vec::Zero(nd);
  Vec prev = Vec::Zero(nd);
  bool have_prev = false;
  (void)U;  // the remainder only involves the gradient of U; values kept for the interface
  for (std::size_t k = 0; k < path.size(); ++k) {
    const double s = times[k];
    const Vec& x = path[k];
    const Vec dF = spec.F(s, x) - spec_mollified.F(s, x);
    const Vec integrand = dF - DU(s, x) * dF;
    if (have_prev) acc += 0.5 * (times[k] - times[k - 1]) * (integrand + prev);
    prev = integrand;
    have_prev = true;
  }
  return acc;
}

}  // namespace kolmolab
