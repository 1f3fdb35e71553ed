#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ovtk/data_model.hpp"
#include "ovtk/kalman.hpp"
#include "ovtk/kernels.hpp"

namespace ovtk {

enum class TrackerMode { Fused, AppearanceOnly, MotionOnly };

std::string_view to_string(TrackerMode mode);
TrackerMode parse_tracker_mode(std::string_view text);

/// Association settings. Defaults are the reference OVTrack+ values
/// (w 0.03, alpha 0.2, match threshold 0.5, init IoU 0.3, memory 30).
struct TrackerConfig {
    double w = 0.03;                       ///< weight of the IoU term in the fused score
    double alpha = 0.2;                    ///< EMA momentum on the stored embedding
    double match_threshold = 0.5;          ///< minimum fused score for an accepted match
    double init_iou_threshold = 0.3;       ///< new track only if IoU with every prediction is below this
    int memory_frames = 30;                ///< frames a track survives unmatched
    double occlusion_iou_threshold = 0.7;  ///< detection pairs above this IoU lose the weaker member
    TrackerMode mode = TrackerMode::Fused;
    bool normalize_embeddings = false;     ///< L2-normalize detection embeddings on entry
    KalmanParams kalman;
    kernels::Execution execution = kernels::Execution::Auto;

    /// Throws InvalidArgument naming the first out-of-range field.
    void validate() const;
};

TrackerConfig parse_tracker_config(std::string_view document);
std::string serialize_tracker_config(const TrackerConfig& config);

/// Indices (ascending) of the detections that survive the occlusion filter.
/// Pairs with IoU above `threshold` are visited by descending IoU and the
/// lower-confidence member of each still-alive pair is removed.
std::vector<std::size_t> occlusion_prefilter(std::span<const Detection> dets, double threshold);

/// Appearance similarity D_app = (1 + cos) / 2 + bi-softmax between stored
/// track embeddings (rows) and detection embeddings (cols).
Eigen::MatrixXd appearance_score_matrix(const EmbeddingMatrix& tracks, const EmbeddingMatrix& dets,
                                        kernels::Execution exec = kernels::Execution::Auto);

/// Association score; larger is a better match.
///   Fused:          (1 - w) * app + w * IoU(predicted, detected)
///   AppearanceOnly: app
///   MotionOnly:     IoU
/// `app` is ignored (and may be empty) in MotionOnly mode; boxes are ignored
/// in AppearanceOnly mode.
Eigen::MatrixXd fused_score_matrix(const Eigen::MatrixXd& app, std::span<const BBox> predicted,
                                   std::span<const BBox> detected, double w, TrackerMode mode,
                                   kernels::Execution exec = kernels::Execution::Auto);

/// alpha * previous + (1 - alpha) * observed.
std::vector<double> update_embedding(std::span<const double> previous, std::span<const double> observed,
                                     double alpha);

struct ActiveTrack {
    TrackId track_id = 0;
    std::vector<double> embedding;
    KalmanState kalman;
    int last_matched_frame = 0;
    CategoryId category_id = kUnknownCategory;
    std::vector<std::pair<int, BBox>> history;

    /// Per-category vote count and the last frame each category was seen.
    std::map<CategoryId, std::pair<int, int>> votes;
};

struct TrackerState {
    std::vector<ActiveTrack> tracks;
    TrackId next_id = 1;
    int frame_cursor = -1;
    TrackerConfig config;
};

struct TrackOutput {
    TrackId track_id = 0;
    CategoryId category_id = kUnknownCategory;
    BBox bbox;
    double score = 0.0;

    friend bool operator==(const TrackOutput&, const TrackOutput&) = default;
};

/// Advances `state` by one frame in place and returns the frame's outputs
/// (matched and newly started tracks, ordered by track id).
/// Throws InvalidArgument when frame_index does not exceed the cursor.
std::vector<TrackOutput> advance_tracker(TrackerState& state, const DetectionFrame& frame);

struct StepResult {
    TrackerState state;
    std::vector<TrackOutput> outputs;
};

/// Value-semantics form of advance_tracker.
StepResult step_tracker(TrackerState state, const DetectionFrame& frame);

/// Tracks one video from a fresh state.
TrackResult run_tracker(const DetectionSequence& dets, const TrackerConfig& config);

/// Tracks every video with up to `jobs` workers (0 = OpenMP default). Output
/// is ordered by video id, then frame, then track id, independent of `jobs`.
TrackResult run_tracker(std::span<const DetectionSequence> videos, const TrackerConfig& config, int jobs = 1);

}  // namespace ovtk
