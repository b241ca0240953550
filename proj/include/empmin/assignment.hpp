#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace empmin::measures {

struct TransportPlan {
  /// column assigned to each row
  std::vector<std::size_t> column_of_row;
  double total_cost = 0.0;
};

/// Minimum-cost assignment of `rows` rows to `cols` columns where every row
/// is matched exactly once and column j receives exactly `capacity` rows.
/// Requires rows == cols * capacity. `cost` is row-major rows x cols.
///
/// Shortest augmenting paths with Dijkstra on reduced costs (Hungarian
/// method, O(rows^2 cols) worst case). Capacity 1 is the classic square
/// assignment problem.
TransportPlan solve_capacitated_assignment(std::span<const double> cost, std::size_t rows,
                                           std::size_t cols, std::size_t capacity);

}  // namespace empmin::measures
