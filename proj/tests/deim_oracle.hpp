#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

// Textbook DEIM written independently of the library: full-pivot LU on the
// selected rows, then a linear scan for the largest residual magnitude (the
// first row wins ties). Used as the reference in tests.
namespace oracle {

inline std::vector<int> standard_deim(const Eigen::MatrixXd &u) {
  std::vector<int> rows;
  for (Eigen::Index l = 0; l < u.cols(); ++l) {
    Eigen::VectorXd r = u.col(l);
    const auto k = static_cast<Eigen::Index>(rows.size());
    if (k > 0) {
      Eigen::MatrixXd block(k, k);
      Eigen::VectorXd rhs(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        rhs[a] = u(rows[static_cast<std::size_t>(a)], l);
        for (Eigen::Index b = 0; b < k; ++b)
          block(a, b) = u(rows[static_cast<std::size_t>(a)], b);
      }
      const Eigen::VectorXd c = block.fullPivLu().solve(rhs);
      for (Eigen::Index b = 0; b < k; ++b)
        r -= c[b] * u.col(b);
    }
    int best = 0;
    for (int i = 1; i < r.size(); ++i)
      if (std::abs(r[i]) > std::abs(r[best]))
        best = i;
    rows.push_back(best);
  }
  return rows;
}

} // namespace oracle
