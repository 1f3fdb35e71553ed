#pragma once

#include <span>

#include <Eigen/Dense>

#include "ovtk/bbox.hpp"

namespace ovtk {

/// Row-per-item embedding matrix (tracks or detections).
using EmbeddingMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace kernels {

enum class Execution {
    Serial,    ///< Plain loops; the reference every parallel result is checked against.
    Parallel,  ///< OpenMP over rows.
    Auto,      ///< Parallel only when the matrix is large enough to amortize the fork.
};

/// Work (rows x cols x inner dimension) above which Auto goes parallel.
inline constexpr long kAutoParallelWork = 1L << 16;

/// Pairwise IoU, rows = `a`, cols = `b`.
Eigen::MatrixXd iou_matrix(std::span<const BBox> a, std::span<const BBox> b,
                           Execution exec = Execution::Auto);

/// The three appearance score matrices between stored track embeddings and
/// detection embeddings (rows = tracks, cols = detections).
struct AppearanceScores {
    Eigen::MatrixXd bi_softmax;  ///< mean of the detection-wise and track-wise softmax of dot products
    Eigen::MatrixXd cosine;      ///< cosine similarity
    Eigen::MatrixXd combined;    ///< (1 + cosine) / 2 + bi_softmax, in [0, 2]
};

/// Throws InvalidArgument on dimension mismatch or a zero-norm embedding.
AppearanceScores appearance_scores(const EmbeddingMatrix& tracks, const EmbeddingMatrix& dets,
                                   Execution exec = Execution::Auto);

}  // namespace kernels
}  // namespace ovtk
