#pragma once

#include <span>
#include <vector>

#include "ovtk/data_model.hpp"

namespace ovtk {

/// One true-positive localization: a GT box matched to a predicted box.
struct LocMatch {
    VideoId video_id = 0;
    int frame_index = 0;
    TrackId gt_track_id = 0;
    TrackId pred_track_id = 0;
    CategoryId gt_category_id = 0;
    CategoryId pred_category_id = kUnknownCategory;
    double iou = 0.0;
};

struct TetaCounts {
    long tpl = 0;
    long fpl = 0;
    long fnl = 0;
    long tpc = 0;
    long fpc = 0;
    long fnc = 0;
    /// TPA / (TPA + FPA + FNA) for each TPL, in frame order.
    std::vector<double> association;

    TetaCounts& operator+=(const TetaCounts& other);
};

/// Outcome of matching one frame. Indices refer to the spans passed in.
struct FrameMatch {
    std::vector<LocMatch> matches;
    std::vector<std::size_t> unmatched_pred;  ///< false-positive localizations
    std::vector<std::size_t> unmatched_gt;    ///< false-negative localizations (present boxes only)

    long fpl() const { return static_cast<long>(unmatched_pred.size()); }
    long fnl() const { return static_cast<long>(unmatched_gt.size()); }
};

/// Class-agnostic one-to-one matching of a single frame maximizing total IoU
/// over pairs with IoU >= threshold. GT records without a box are ignored.
FrameMatch match_localization(std::span<const GtAnnotation> gt, std::span<const TrackRecord> pred,
                              double threshold);

/// 100 * tpl / (tpl + fpl + fnl); 0 when the denominator is 0.
double compute_loca(const TetaCounts& counts);

/// Every correctly classified TPL is a TPC; each misclassified TPL adds one
/// FPC and one FNC. Returns 100 * tpc / (tpc + fpc + fnc), 0 when empty.
double compute_clsa(std::span<const LocMatch> matches);

/// Per-TPL association fraction. For TPL b with ids (g, p) in its video:
/// TPA(b) counts TPLs with both g and p, FPA(b) those with p but another GT
/// id, FNA(b) those with g but another predicted id.
std::vector<double> association_fractions(std::span<const LocMatch> matches);

/// 100 * mean(association_fractions); 0 when there are no matches.
double compute_assa(std::span<const LocMatch> matches);

struct SplitScores {
    double loca = 0.0;
    double clsa = 0.0;
    double assa = 0.0;
    double teta = 0.0;
    TetaCounts counts;
};

struct TetaSplits {
    SplitScores all;
    SplitScores base;
    SplitScores novel;
};

struct TetaOptions {
    /// Localization thresholds; scores are averaged over them.
    std::vector<double> iou_thresholds{0.5};
    int jobs = 1;
};

struct TetaReport {
    std::vector<double> iou_thresholds;
    /// Scores averaged over thresholds; counts summed over thresholds.
    TetaSplits splits;
    std::vector<TetaSplits> per_threshold;
};

/// Evaluates `pred` against `gt`. A TPL, FNL, TPC, FPC or FNC belongs to the
/// split of its GT category; an FPL belongs to the split of its predicted
/// category when that category exists in `gt`, otherwise to All only.
/// Throws InvalidArgument when `pred` names a video that `gt` lacks.
TetaReport compute_teta(const AnnotationSet& gt, const TrackResult& pred, const TetaOptions& options = {});

}  // namespace ovtk
