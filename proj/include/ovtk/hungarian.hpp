#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ovtk {

using ScoreMatrix = Eigen::MatrixXd;
using Assignment = std::vector<std::pair<std::size_t, std::size_t>>;

/// Maximum-total-score one-to-one assignment between rows and columns.
///
/// Covers min(rows, cols) pairs. Among optimal assignments the pair list
/// (sorted by row) that is lexicographically smallest is returned, so equal
/// inputs always give equal outputs. Entries must be finite; an empty matrix
/// yields an empty assignment. Throws InvalidArgument on non-finite input.
Assignment hungarian_assign(const ScoreMatrix& scores);

/// Sum of the scores selected by an assignment.
double assignment_total(const ScoreMatrix& scores, const Assignment& assignment);

}  // namespace ovtk
