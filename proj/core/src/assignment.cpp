#include "gradwave/density.hpp"
#include "gradwave/error.hpp"

#include <limits>

namespace gradwave {

// Shortest augmenting path with row/column potentials (Kuhn-Munkres in the O(m^3) form).
std::vector<Index> optimal_assignment(const Eigen::MatrixXd& cost) {
  const Index m = cost.rows();
  if (cost.cols() != m) throw InvalidArgument("assignment cost matrix must be square");
  if (m == 0) return {};
  if (!cost.allFinite()) throw InvalidArgument("assignment costs must be finite");

  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t sz = static_cast<std::size_t>(m) + 1;
  // 1-based: u over rows, v over columns, match[j] = row assigned to column j (0 = none).
  std::vector<double> u(sz, 0.0), v(sz, 0.0), minv(sz);
  std::vector<Index> match(sz, 0), way(sz, 0);
  std::vector<char> used(sz);

  for (Index i = 1; i <= m; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= m; ++j) {
        const std::size_t js = static_cast<std::size_t>(j);
        if (used[js]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[js];
        if (cur < minv[js]) {
          minv[js] = cur;
          way[js] = j0;
        }
        if (minv[js] < delta) {
          delta = minv[js];
          j1 = j;
        }
      }
      for (Index j = 0; j <= m; ++j) {
        const std::size_t js = static_cast<std::size_t>(j);
        if (used[js]) {
          u[static_cast<std::size_t>(match[js])] += delta;
          v[js] -= delta;
        } else {
          minv[js] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<Index> assignment(static_cast<std::size_t>(m));
  for (Index j = 1; j <= m; ++j)
    assignment[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return assignment;
}

double wasserstein2_exact(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw InvalidArgument("wasserstein2_exact needs point sets of equal size");
  if (a.cols() != b.cols()) throw InvalidArgument("wasserstein2_exact: dimension mismatch");
  const Index m = a.rows();
  if (m == 0) throw InvalidArgument("wasserstein2_exact: empty point sets");
  if (m > 4096) throw InvalidArgument("wasserstein2_exact supports at most 4096 points");

  Eigen::MatrixXd cost(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) cost(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  const std::vector<Index> match = optimal_assignment(cost);
  double total = 0.0;
  for (Index i = 0; i < m; ++i) total += cost(i, match[static_cast<std::size_t>(i)]);
  return std::sqrt(total / static_cast<double>(m));
}

}  // namespace gradwave
