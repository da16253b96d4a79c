#include "kolmolab/peano_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kolmolab/chain_model.hpp"
#include "kolmolab/quadrature.hpp"

namespace kolmolab {

void PeanoConfig::validate() const {
  if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("PeanoConfig: alpha in (0,1)");
  if (gamma <= 0.0) throw std::invalid_argument("PeanoConfig: gamma > 0");
  if (l < 0) throw std::invalid_argument("PeanoConfig: l >= 0");
  if (eps < 0.0) throw std::invalid_argument("PeanoConfig: eps >= 0");
  if (horizon <= 0.0 || steps < 1 || paths < 1)
    throw std::invalid_argument("PeanoConfig: horizon/steps/paths");
}

double peano_extremal(double alpha, double t) {
  if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("peano_extremal: alpha in (0,1)");
  if (t < 0.0) throw std::invalid_argument("peano_extremal: t >= 0");
  if (t == 0.0) return 0.0;
  return std::pow((1.0 - alpha) * t, 1.0 / (1.0 - alpha));
}

double peano_extremal_envelope(double alpha, int l, double t) {
  if (l == 0) return peano_extremal(alpha, t);
  // y = c t^p with the drift fed by the l-fold integral of y
  const double p = (1.0 + alpha * l) / (1.0 - alpha);
  double q = 1.0;
  for (int j = 0; j < l; ++j) q *= p + 1.0 + j;
  const double c = std::pow(std::pow(q, -alpha) / p, 1.0 / (1.0 - alpha));
  return c * std::pow(t, p);
}

std::vector<double> iterated_bm_noise(int level, double T, int steps, NoiseStream& stream) {
  if (level < 1) throw std::invalid_argument("iterated_bm_noise: level >= 1");
  const double dt = T / steps;
  const double sq = std::sqrt(dt);
  std::vector<std::vector<double>> levels(level, std::vector<double>(steps + 1, 0.0));
  double b = 0.0;
  for (int k = 1; k <= steps; ++k) {
    const double bprev = b;
    b += sq * stream.gaussian();
    levels[0][k] = b;
    double lower_prev = bprev;
    for (int j = 1; j < level; ++j) {
      const double me_prev = levels[j][k - 1];
      levels[j][k] = me_prev + 0.5 * dt * (lower_prev + levels[j - 1][k]);
      lower_prev = me_prev;
    }
  }
  return levels[level - 1];
}

double weak_threshold(int i, int j) {
  if (i < 2 || j < i) throw std::invalid_argument("weak_threshold: 2 <= i <= j");
  return (2.0 * i - 3.0) / (2.0 * j - 1.0);
}

double strong_threshold(int j) { return holder_threshold(j); }

std::vector<double> perturbed_peano(const PeanoConfig& config) {
  config.validate();
  const double dt = config.horizon / config.steps;
  const double sq = std::sqrt(dt);
  const int it_lvl = static_cast<int>(std::lround(config.gamma + 0.5));
  const bool half_integer = std::abs(config.gamma - (it_lvl - 0.5)) < 1e-12 && it_lvl >= 1;

  std::vector<double> terminal(config.paths);
  for (int m = 0; m < config.paths; ++m) {
    NoiseStream stream(config.seed, static_cast<std::uint64_t>(m));
    double y = config.y0;
    std::vector<double> z(config.l, 0.0);
    double b = 0.0;
    std::vector<double> ib(std::max(0, it_lvl - 1), 0.0);
    for (int k = 0; k < config.steps; ++k) {
      const double t = k * dt;
      const double feedback = config.l == 0 ? y : z[config.l - 1];
      const double drift = signed_pow(feedback, config.alpha);
      const double db = sq * stream.gaussian();
      double dW;
      if (half_integer) {
        dW = it_lvl == 1 ? db : (it_lvl == 2 ? b : ib[it_lvl - 3]) * dt;
      } else {
        // synthetic index: scale Brownian increments to std ~ t^gamma
        const double tn = t + dt;
        dW = std::pow(tn, config.gamma - 0.5) * db;
      }
      const double yn = y + drift * dt + config.eps * dW;
      double prev = y;
      for (int j = 0; j < config.l; ++j) {
        const double zn = z[j] + prev * dt;
        prev = z[j];
        z[j] = zn;
      }
      double bprev = b;
      b += db;
      for (std::size_t j = 0; j < ib.size(); ++j) {
        const double nv = ib[j] + bprev * dt;
        bprev = ib[j];
        ib[j] = nv;
      }
      y = yn;
      if (!std::isfinite(y) || std::abs(y) > 1e8)
        throw std::runtime_error("perturbed_peano: blow-up guard tripped");
    }
    terminal[m] = std::abs(y);
  }
  return terminal;
}

namespace {

std::vector<ScanPoint> scan_at_eps(const std::vector<double>& alphas, double gamma, int l,
                                   double eps, int paths, double horizon, int steps,
                                   std::uint64_t seed) {
  std::vector<ScanPoint> points;
  for (double alpha : alphas) {
    PeanoConfig cfg;
    cfg.alpha = alpha;
    cfg.gamma = gamma;
    cfg.l = l;
    cfg.eps = eps;
    cfg.horizon = horizon;
    cfg.steps = steps;
    cfg.paths = paths;
    cfg.seed = seed;
    std::vector<double> term = perturbed_peano(cfg);
    const double ext = peano_extremal_envelope(alpha, l, horizon);
    const double med = median(term);
    ScanPoint p;
    p.alpha = alpha;
    p.statistic = med > 0.0 ? ext / med : std::numeric_limits<double>::infinity();
    // spread of batch medians around the pooled one, mapped through the ratio
    const int B = 10;
    std::vector<double> batch_meds;
    for (int b = 0; b < B; ++b) {
      std::vector<double> sub;
      for (int m = b; m < paths; m += B) sub.push_back(term[m]);
      batch_meds.push_back(median(sub));
    }
    double var = 0.0;
    for (double bm : batch_meds) var += (bm - med) * (bm - med);
    var /= (B - 1);
    const double med_se = std::sqrt(var / B);
    p.ci_half_width = med > 0.0 ? 1.96 * med_se * ext / (med * med) : 0.0;
    points.push_back(p);
  }
  return points;
}

double crossing_of(const std::vector<ScanPoint>& points) {
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const ScanPoint& a = points[k];
    const ScanPoint& b = points[k + 1];
    if (a.statistic >= 0.5 && b.statistic < 0.5)
      return a.alpha + (b.alpha - a.alpha) * (a.statistic - 0.5) / (a.statistic - b.statistic);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

ScanReport threshold_scan(const std::vector<double>& alphas, double gamma, int l,
                          const std::vector<double>& eps_ladder, int paths, double horizon,
                          int steps, std::uint64_t seed) {
  if (alphas.empty() || eps_ladder.empty())
    throw std::invalid_argument("threshold_scan: grids nonempty");
  if (paths < 100) throw std::invalid_argument("threshold_scan: insufficient paths");

  ScanReport rep;
  rep.analytic_threshold = (gamma - 1.0) / (l + gamma);
  rep.eps_used = *std::max_element(eps_ladder.begin(), eps_ladder.end());

  for (double eps : eps_ladder) {
    std::vector<ScanPoint> pts =
        scan_at_eps(alphas, gamma, l, eps, paths, horizon, steps, seed);
    rep.crossings_by_eps.emplace_back(eps, crossing_of(pts));
    if (eps == rep.eps_used) rep.points = std::move(pts);
  }
  const double cross = crossing_of(rep.points);
  rep.has_crossing = std::isfinite(cross);
  if (rep.has_crossing) rep.crossing_alpha = cross;
  return rep;
}

}  // namespace kolmolab
