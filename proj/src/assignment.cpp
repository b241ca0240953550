#include "empmin/assignment.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace empmin::measures {

TransportPlan solve_capacitated_assignment(std::span<const double> cost, std::size_t rows,
                                           std::size_t cols, std::size_t capacity) {
  if (rows == 0 || cols == 0 || capacity == 0) throw std::invalid_argument("empty assignment problem");
  if (rows != cols * capacity) throw std::invalid_argument("rows must equal cols * capacity");
  if (cost.size() != rows * cols) throw std::invalid_argument("cost matrix has wrong size");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::vector<double> u(rows, 0.0), v(cols, 0.0);
  std::vector<std::size_t> col_of_row(rows, kNone);
  std::vector<std::size_t> members(cols * capacity, kNone);
  std::vector<std::size_t> fill(cols, 0);

  std::vector<double> minv(cols);
  std::vector<std::size_t> way_row(cols);
  std::vector<char> used(cols);
  std::vector<std::size_t> used_cols;
  std::vector<std::size_t> tree_rows;
  std::vector<std::size_t> frontier;
  used_cols.reserve(cols);
  tree_rows.reserve(rows);

  for (std::size_t s = 0; s < rows; ++s) {
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    used_cols.clear();
    tree_rows.assign(1, s);
    frontier.assign(1, s);

    std::size_t target = kNone;
    for (;;) {
      for (std::size_t i0 : frontier) {
        const double* row = cost.data() + i0 * cols;
        const double ui = u[i0];
        for (std::size_t j = 0; j < cols; ++j) {
          if (used[j]) continue;
          const double cur = row[j] - ui - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way_row[j] = i0;
          }
        }
      }
      double delta = kInf;
      std::size_t j1 = kNone;
      for (std::size_t j = 0; j < cols; ++j) {
        if (!used[j] && minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (j1 == kNone) throw std::runtime_error("assignment: no augmenting path (non-finite costs?)");
      for (std::size_t i : tree_rows) u[i] += delta;
      for (std::size_t j : used_cols) v[j] -= delta;
      for (std::size_t j = 0; j < cols; ++j)
        if (!used[j]) minv[j] -= delta;

      used[j1] = 1;
      used_cols.push_back(j1);
      if (fill[j1] < capacity) {
        target = j1;
        break;
      }
      frontier.assign(members.begin() + static_cast<std::ptrdiff_t>(j1 * capacity),
                      members.begin() + static_cast<std::ptrdiff_t>((j1 + 1) * capacity));
      tree_rows.insert(tree_rows.end(), frontier.begin(), frontier.end());
    }

    // Shift rows one step along the alternating path ending at `target`.
    std::size_t j = target;
    for (;;) {
      const std::size_t i = way_row[j];
      const std::size_t prev = col_of_row[i];
      if (prev == kNone) {
        members[j * capacity + fill[j]] = i;
        ++fill[j];
      } else {
        std::size_t* slot = std::find(&members[prev * capacity], &members[prev * capacity] + capacity, i);
        std::size_t* last = &members[prev * capacity] + (fill[prev] - 1);
        *slot = *last;
        *last = kNone;
        --fill[prev];
        members[j * capacity + fill[j]] = i;
        ++fill[j];
      }
      col_of_row[i] = j;
      if (prev == kNone) break;
      j = prev;
    }
  }

  TransportPlan plan;
  plan.column_of_row = std::move(col_of_row);
  for (std::size_t i = 0; i < rows; ++i) plan.total_cost += cost[i * cols + plan.column_of_row[i]];
  return plan;
}

}  // namespace empmin::measures
