#pragma once
#include <Eigen/Dense>

namespace kolmolab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// State vectors in R^{nd} are split into n blocks of size d.
// Blocks are 1-based throughout, matching the chain level indexing.
inline Eigen::VectorBlock<Vec> block(Vec& x, int i, int d) {
  return x.segment((i - 1) * d, d);
}
inline Eigen::VectorBlock<const Vec> block(const Vec& x, int i, int d) {
  return x.segment((i - 1) * d, d);
}

}  // namespace kolmolab
