#pragma once

// Test-only reference computations. Each one is deliberately naive and shares
// no code with the library path it checks.

#include <algorithm>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ovtk/teta.hpp"

namespace ovtk::oracle {

/// Best total over every injective row->column map covering min(rows, cols)
/// pairs, plus the lexicographically smallest pair list attaining it
/// (exact comparison, so use integer-valued matrices when ties matter).
struct BruteAssignment {
    double total = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

inline BruteAssignment brute_force_assignment(const Eigen::MatrixXd& m)
{
    BruteAssignment best;
    const auto rows = static_cast<std::size_t>(m.rows());
    const auto cols = static_cast<std::size_t>(m.cols());
    if (rows == 0 || cols == 0) {
        best.total = 0.0;
        return best;
    }
    const std::size_t n = std::max(rows, cols);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        double total = 0.0;
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t r = 0; r < rows; ++r) {
            if (perm[r] < cols) {
                total += m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(perm[r]));
                pairs.emplace_back(r, perm[r]);
            }
        }
        if (total > best.total || (total == best.total && pairs < best.pairs)) {
            best.total = total;
            best.pairs = std::move(pairs);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// AssA straight from its definition: for each TPL, scan every other TPL
/// and count agreements and disagreements of its (gt, pred) ids.
inline double brute_force_assa(const std::vector<LocMatch>& tpl)
{
    if (tpl.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& b : tpl) {
        long tpa = 0, fpa = 0, fna = 0;
        for (const auto& other : tpl) {
            if (other.video_id != b.video_id) continue;
            const bool same_gt = other.gt_track_id == b.gt_track_id;
            const bool same_pred = other.pred_track_id == b.pred_track_id;
            if (same_gt && same_pred) ++tpa;
            if (same_pred && !same_gt) ++fpa;
            if (same_gt && !same_pred) ++fna;
        }
        sum += static_cast<double>(tpa) / static_cast<double>(tpa + fpa + fna);
    }
    return 100.0 * sum / static_cast<double>(tpl.size());
}

}  // namespace ovtk::oracle
