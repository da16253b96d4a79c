#pragma once
#include <cstdint>
#include <vector>

#include "kolmolab/chain_model.hpp"
#include "kolmolab/rng.hpp"

namespace kolmolab {

/// Seeded Monte-Carlo path collection. Substream = path index, assigned before
/// dispatch; ensembles are bit-identical for a given (seed, config) regardless
/// of worker count.
struct PathEnsemble {
  int n = 1, d = 1;
  std::uint64_t seed = 0;
  std::string spec_name;
  std::vector<double> times;             // steps + 1, strictly increasing
  std::vector<std::vector<Vec>> states;  // M x (steps+1)

  int paths() const { return static_cast<int>(states.size()); }
  void validate() const;
};

/// Columnar persistence: path id, time, then one column per state component.
std::string ensemble_csv(const PathEnsemble& ensemble);

/// Explicit Euler-Maruyama; noise enters block 1 only through B sigma.
std::vector<Vec> euler_maruyama(const ChainSpec& spec, const Vec& x0, double T, int steps,
                                NoiseStream& noise);

/// Two drifts driven by the identical increment stream. Throws if the streams
/// disagree on (seed, substream): the coupling contract is shared noise.
std::pair<std::vector<Vec>, std::vector<Vec>> coupled_paths(const ChainSpec& spec_a,
                                                            const ChainSpec& spec_b,
                                                            const Vec& x0, double T, int steps,
                                                            const NoiseStream& noise_a,
                                                            const NoiseStream& noise_b);
std::pair<std::vector<Vec>, std::vector<Vec>> coupled_paths(const ChainSpec& spec_a,
                                                            const ChainSpec& spec_b,
                                                            const Vec& x0, double T, int steps,
                                                            const NoiseStream& noise);

PathEnsemble simulate_ensemble(const ChainSpec& spec, const Vec& x0, double T, int steps, int M,
                               std::uint64_t seed, int jobs = 1);

struct ProbePoint {
  double delta_hi = 0.0, delta_lo = 0.0;  // consecutive ladder levels
  double value = 0.0;                     // E[sup_t |X^{hi} - X^{lo}|^2]
  double ci_half_width = 0.0;             // 95% band from path batching
};

/// Shared-noise Cauchy diagnostic across a mollification ladder.
std::vector<ProbePoint> strong_uniqueness_probe(const ChainSpec& spec,
                                                const std::vector<double>& deltas, int M,
                                                double T, int steps, const Vec& x0,
                                                std::uint64_t seed, int quad_nodes = 32,
                                                int jobs = 1, int batches = 20);

struct FluctuationFit {
  int level = 1;
  double fitted = 0.0;     // slope of log std vs log t
  double expected = 0.0;   // i - 1/2
  std::vector<double> times;
  std::vector<double> stds;
};

/// Fits the growth exponent of the per-level standard deviation.
FluctuationFit fluctuation_scaling(const ChainSpec& spec, int level, double T, int steps, int M,
                                   std::uint64_t seed, int fit_points = 6, int jobs = 1);

using FieldFn = std::function<Vec(double, const Vec&)>;       // U(s, x) in R^{nd}
using FieldJacFn = std::function<Mat(double, const Vec&)>;    // DU(s, x), (nd x nd)

/// Zvonkin remainder along a simulated path:
///   R_T = int (F - F^delta)(s, X_s) ds - int (L - L^delta) U(s, X_s) ds,
/// with sigma unmollified so the generator difference is the transport term.
Vec zvonkin_remainder(const ChainSpec& spec, const ChainSpec& spec_mollified, const FieldFn& U,
                      const FieldJacFn& DU, const std::vector<Vec>& path,
                      const std::vector<double>& times);

}  // namespace kolmolab
