#include "ovtk/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ovtk/error.hpp"

namespace ovtk {

namespace {

/// Shortest-augmenting-path Hungarian method on a square cost matrix
/// (minimization). Returns the row->column matching and leaves the dual
/// potentials in `u` / `v` such that cost(i,j) - u[i] - v[j] >= 0, with
/// equality on matched pairs.
std::vector<int> solve_square(const Eigen::MatrixXd& cost, std::vector<double>& u, std::vector<double>& v)
{
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based bookkeeping; index 0 is the virtual root column.
    std::vector<double> uu(n + 1, 0.0), vv(n + 1, 0.0);
    std::vector<int> match_col(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match_col[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match_col[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - uu[i0] - vv[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    uu[match_col[j]] += delta;
                    vv[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match_col[j0] != 0);
        do {
            const int j1 = way[j0];
            match_col[j0] = match_col[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (match_col[j] != 0) row_to_col[match_col[j] - 1] = j - 1;
    }
    u.assign(uu.begin() + 1, uu.end());
    v.assign(vv.begin() + 1, vv.end());
    return row_to_col;
}

/// Perfect matching in the graph of tight edges, rearranged greedily so each
/// row in turn takes the smallest column still consistent with optimality.
class LexicographicRefiner {
public:
    LexicographicRefiner(std::vector<std::vector<char>> tight, std::vector<int> row_to_col)
        : tight_(std::move(tight)), row_to_col_(std::move(row_to_col))
    {
        const auto n = row_to_col_.size();
        col_to_row_.assign(n, -1);
        for (std::size_t r = 0; r < n; ++r) col_to_row_[row_to_col_[r]] = static_cast<int>(r);
        fixed_.assign(n, 0);
    }

    const std::vector<int>& refine(int real_rows, int real_cols)
    {
        for (int i = 0; i < real_rows; ++i) {
            for (int j = 0; j < real_cols; ++j) {
                if (row_to_col_[i] == j || try_reassign(i, j)) break;
            }
            fixed_[i] = 1;
        }
        return row_to_col_;
    }

private:
    bool try_reassign(int row, int col)
    {
        if (!tight_[row][col]) return false;
        const int displaced = col_to_row_[col];
        if (displaced < 0 || fixed_[displaced]) return false;
        const int freed = row_to_col_[row];

        // Tentatively give `col` to `row`, then look for an alternating path
        // that rehouses `displaced` and ends on the freed column.
        row_to_col_[row] = col;
        col_to_row_[col] = row;
        col_to_row_[freed] = -1;
        visited_.assign(row_to_col_.size(), 0);
        visited_[row] = 1;
        if (augment(displaced, freed)) return true;

        row_to_col_[row] = freed;
        col_to_row_[freed] = row;
        col_to_row_[col] = displaced;
        row_to_col_[displaced] = col;
        return false;
    }

    bool augment(int row, int target)
    {
        visited_[row] = 1;
        const int n = static_cast<int>(row_to_col_.size());
        for (int c = 0; c < n; ++c) {
            if (!tight_[row][c]) continue;
            const int owner = col_to_row_[c];
            if (c == target || (owner >= 0 && !visited_[owner] && !fixed_[owner] && augment(owner, target))) {
                row_to_col_[row] = c;
                col_to_row_[c] = row;
                return true;
            }
        }
        return false;
    }

    std::vector<std::vector<char>> tight_;
    std::vector<int> row_to_col_;
    std::vector<int> col_to_row_;
    std::vector<char> fixed_;
    std::vector<char> visited_;
};

}  // namespace

Assignment hungarian_assign(const ScoreMatrix& scores)
{
    const auto rows = static_cast<int>(scores.rows());
    const auto cols = static_cast<int>(scores.cols());
    if (rows == 0 || cols == 0) return {};
    if (!scores.allFinite()) throw InvalidArgument("hungarian_assign: score matrix has non-finite entries");

    const int n = std::max(rows, cols);
    const double top = scores.maxCoeff();
    // Maximization as minimization of (top - score); padding entries are a
    // constant so they never influence which real pairs are chosen.
    Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(n, n);
    cost.topLeftCorner(rows, cols) = (top - scores.array()).matrix();

    std::vector<double> u, v;
    auto row_to_col = solve_square(cost, u, v);

    const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
    const double eps = 1e-9 * scale;
    std::vector<std::vector<char>> tight(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) tight[i][j] = cost(i, j) - u[i] - v[j] <= eps ? 1 : 0;
        tight[i][row_to_col[i]] = 1;
    }

    LexicographicRefiner refiner(std::move(tight), std::move(row_to_col));
    const auto& refined = refiner.refine(rows, cols);

    Assignment out;
    out.reserve(static_cast<std::size_t>(std::min(rows, cols)));
    for (int i = 0; i < rows; ++i) {
        if (refined[i] < cols) out.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(refined[i]));
    }
    return out;
}

double assignment_total(const ScoreMatrix& scores, const Assignment& assignment)
{
    double total = 0.0;
    for (const auto& [r, c] : assignment) total += scores(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    return total;
}

}  // namespace ovtk
