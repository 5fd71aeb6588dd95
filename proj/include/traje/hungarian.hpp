// Minimum-cost assignment (Hungarian / shortest augmenting path with
// potentials), O(n^2 m) for an n x m matrix.

#pragma once

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace traje
{

/// Cost used for forbidden pairs. Must dominate any sum of real costs.
inline constexpr double kForbiddenCost = 1e12;

/// Returns, for every row, the assigned column or -1. Every row is assigned
/// when rows <= cols, every column when rows > cols. Rows are inserted in
/// index order; when several columns tie, a free column wins, then the
/// lowest index, so identical costs produce the diagonal.
inline std::vector<int> hungarian(const Eigen::MatrixXd& cost)
{
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  std::vector<int> result(static_cast<std::size_t>(rows), -1);
  if (rows == 0 || cols == 0) {
    return result;
  }
  if (rows > cols) {
    const std::vector<int> t = hungarian(cost.transpose());
    for (int c = 0; c < cols; ++c) {
      if (t[c] >= 0) {
        result[t[c]] = c;
      }
    }
    return result;
  }

  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is the virtual root.
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<int> match(cols + 1, 0), way(cols + 1, 0);

  for (int i = 1; i <= rows; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= cols; ++j) {
        if (used[j]) {
          continue;
        }
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        const bool better = minv[j] < delta ||
                            (minv[j] == delta && j1 != 0 && match[j1] != 0 && match[j] == 0);
        if (better) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (int j = 1; j <= cols; ++j) {
    if (match[j] != 0) {
      result[match[j] - 1] = j - 1;
    }
  }
  return result;
}

inline double assignment_cost(const Eigen::MatrixXd& cost, const std::vector<int>& assignment)
{
  double total = 0.0;
  for (std::size_t r = 0; r < assignment.size(); ++r) {
    if (assignment[r] >= 0) {
      total += cost(static_cast<Eigen::Index>(r), assignment[r]);
    }
  }
  return total;
}

}  // namespace traje
