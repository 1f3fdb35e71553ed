#include "ovtk/kernels.hpp"

#include <cmath>
#include <string>

#include "ovtk/error.hpp"

namespace ovtk::kernels {

namespace {

bool use_parallel(Execution exec, long work)
{
    switch (exec) {
        case Execution::Serial: return false;
        case Execution::Parallel: return true;
        case Execution::Auto: return work >= kAutoParallelWork;
    }
    return false;
}

void check_embeddings(const EmbeddingMatrix& tracks, const EmbeddingMatrix& dets)
{
    if (tracks.rows() > 0 && dets.rows() > 0 && tracks.cols() != dets.cols()) {
        throw InvalidArgument("appearance_scores: track embeddings have dimension " +
                              std::to_string(tracks.cols()) + ", detections " + std::to_string(dets.cols()));
    }
    auto check_norms = [](const EmbeddingMatrix& m, const char* what) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double n = m.row(i).norm();
            if (!(n > 0.0) || !std::isfinite(n)) {
                throw InvalidArgument(std::string("appearance_scores: ") + what + " embedding " +
                                      std::to_string(i) + " has zero or non-finite norm");
            }
        }
    };
    check_norms(tracks, "track");
    check_norms(dets, "detection");
}

AppearanceScores appearance_serial(const EmbeddingMatrix& tracks, const EmbeddingMatrix& dets)
{
    const Eigen::Index nt = tracks.rows();
    const Eigen::Index nd = dets.rows();
    const Eigen::Index dim = tracks.cols();

    Eigen::MatrixXd dot(nt, nd);
    for (Eigen::Index t = 0; t < nt; ++t) {
        for (Eigen::Index r = 0; r < nd; ++r) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < dim; ++k) s += tracks(t, k) * dets(r, k);
            dot(t, r) = s;
        }
    }

    AppearanceScores out;
    out.bi_softmax.resize(nt, nd);
    out.cosine.resize(nt, nd);
    out.combined.resize(nt, nd);

    // Softmax over detections for each track, and over tracks for each
    // detection. Shifting by the max leaves the ratio unchanged.
    Eigen::MatrixXd over_dets(nt, nd), over_tracks(nt, nd);
    for (Eigen::Index t = 0; t < nt; ++t) {
        double mx = dot(t, 0);
        for (Eigen::Index r = 1; r < nd; ++r) mx = std::fmax(mx, dot(t, r));
        double sum = 0.0;
        for (Eigen::Index r = 0; r < nd; ++r) sum += std::exp(dot(t, r) - mx);
        for (Eigen::Index r = 0; r < nd; ++r) over_dets(t, r) = std::exp(dot(t, r) - mx) / sum;
    }
    for (Eigen::Index r = 0; r < nd; ++r) {
        double mx = dot(0, r);
        for (Eigen::Index t = 1; t < nt; ++t) mx = std::fmax(mx, dot(t, r));
        double sum = 0.0;
        for (Eigen::Index t = 0; t < nt; ++t) sum += std::exp(dot(t, r) - mx);
        for (Eigen::Index t = 0; t < nt; ++t) over_tracks(t, r) = std::exp(dot(t, r) - mx) / sum;
    }

    for (Eigen::Index t = 0; t < nt; ++t) {
        double nt_norm = 0.0;
        for (Eigen::Index k = 0; k < dim; ++k) nt_norm += tracks(t, k) * tracks(t, k);
        nt_norm = std::sqrt(nt_norm);
        for (Eigen::Index r = 0; r < nd; ++r) {
            double nr_norm = 0.0;
            for (Eigen::Index k = 0; k < dim; ++k) nr_norm += dets(r, k) * dets(r, k);
            nr_norm = std::sqrt(nr_norm);
            const double cosine = dot(t, r) / (nt_norm * nr_norm);
            const double bi = 0.5 * (over_dets(t, r) + over_tracks(t, r));
            out.cosine(t, r) = cosine;
            out.bi_softmax(t, r) = bi;
            out.combined(t, r) = 0.5 * (1.0 + cosine) + bi;
        }
    }
    return out;
}

AppearanceScores appearance_parallel(const EmbeddingMatrix& tracks, const EmbeddingMatrix& dets)
{
    const Eigen::Index nt = tracks.rows();
    const Eigen::Index nd = dets.rows();
    const Eigen::Index dim = tracks.cols();

    Eigen::MatrixXd dot(nt, nd);
    Eigen::VectorXd track_norm(nt), det_norm(nd);

#pragma omp parallel
    {
#pragma omp for schedule(static)
        for (Eigen::Index t = 0; t < nt; ++t) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < dim; ++k) s += tracks(t, k) * tracks(t, k);
            track_norm(t) = std::sqrt(s);
        }
#pragma omp for schedule(static)
        for (Eigen::Index r = 0; r < nd; ++r) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < dim; ++k) s += dets(r, k) * dets(r, k);
            det_norm(r) = std::sqrt(s);
        }
#pragma omp for schedule(static)
        for (Eigen::Index t = 0; t < nt; ++t) {
            for (Eigen::Index r = 0; r < nd; ++r) {
                double s = 0.0;
                for (Eigen::Index k = 0; k < dim; ++k) s += tracks(t, k) * dets(r, k);
                dot(t, r) = s;
            }
        }
    }

    Eigen::VectorXd row_max(nt), row_sum(nt), col_max(nd), col_sum(nd);
#pragma omp parallel
    {
#pragma omp for schedule(static) nowait
        for (Eigen::Index t = 0; t < nt; ++t) {
            double mx = dot(t, 0);
            for (Eigen::Index r = 1; r < nd; ++r) mx = std::fmax(mx, dot(t, r));
            double sum = 0.0;
            for (Eigen::Index r = 0; r < nd; ++r) sum += std::exp(dot(t, r) - mx);
            row_max(t) = mx;
            row_sum(t) = sum;
        }
#pragma omp for schedule(static)
        for (Eigen::Index r = 0; r < nd; ++r) {
            double mx = dot(0, r);
            for (Eigen::Index t = 1; t < nt; ++t) mx = std::fmax(mx, dot(t, r));
            double sum = 0.0;
            for (Eigen::Index t = 0; t < nt; ++t) sum += std::exp(dot(t, r) - mx);
            col_max(r) = mx;
            col_sum(r) = sum;
        }
    }

    AppearanceScores out;
    out.bi_softmax.resize(nt, nd);
    out.cosine.resize(nt, nd);
    out.combined.resize(nt, nd);
#pragma omp parallel for schedule(static)
    for (Eigen::Index t = 0; t < nt; ++t) {
        for (Eigen::Index r = 0; r < nd; ++r) {
            const double d = dot(t, r);
            const double cosine = d / (track_norm(t) * det_norm(r));
            const double bi = 0.5 * (std::exp(d - row_max(t)) / row_sum(t) + std::exp(d - col_max(r)) / col_sum(r));
            out.cosine(t, r) = cosine;
            out.bi_softmax(t, r) = bi;
            out.combined(t, r) = 0.5 * (1.0 + cosine) + bi;
        }
    }
    return out;
}

}  // namespace

Eigen::MatrixXd iou_matrix(std::span<const BBox> a, std::span<const BBox> b, Execution exec)
{
    const auto na = static_cast<Eigen::Index>(a.size());
    const auto nb = static_cast<Eigen::Index>(b.size());
    Eigen::MatrixXd out(na, nb);
    if (use_parallel(exec, static_cast<long>(na) * nb * 8)) {
#pragma omp parallel for schedule(static)
        for (Eigen::Index i = 0; i < na; ++i) {
            for (Eigen::Index j = 0; j < nb; ++j) out(i, j) = iou(a[i], b[j]);
        }
    } else {
        for (Eigen::Index i = 0; i < na; ++i) {
            for (Eigen::Index j = 0; j < nb; ++j) out(i, j) = iou(a[i], b[j]);
        }
    }
    return out;
}

AppearanceScores appearance_scores(const EmbeddingMatrix& tracks, const EmbeddingMatrix& dets, Execution exec)
{
    check_embeddings(tracks, dets);
    if (tracks.rows() == 0 || dets.rows() == 0) {
        AppearanceScores empty;
        empty.bi_softmax.resize(tracks.rows(), dets.rows());
        empty.cosine.resize(tracks.rows(), dets.rows());
        empty.combined.resize(tracks.rows(), dets.rows());
        return empty;
    }
    const long work = static_cast<long>(tracks.rows()) * dets.rows() * std::max<long>(tracks.cols(), 1);
    return use_parallel(exec, work) ? appearance_parallel(tracks, dets) : appearance_serial(tracks, dets);
}

}  // namespace ovtk::kernels
