#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ovtk/data_model.hpp"

namespace ovtk {

enum class MotionModel { ConstantVelocity, Sinusoidal };

struct SynthConfig {
    int n_tracks = 10;
    int n_frames = 100;
    int n_categories = 4;
    int image_width = 1280;
    int image_height = 720;
    double fps = 30.0;
    MotionModel motion = MotionModel::ConstantVelocity;
    int embedding_dim = 32;
    /// Minimum Euclidean distance between latent (unit) track embeddings.
    double embedding_separation = 0.5;
    double box_noise_std = 0.0;        ///< pixels, per box coordinate
    double embedding_noise_std = 0.0;  ///< per embedding component
    double detection_drop_rate = 0.0;
    /// Per frame, each of n_tracks slots emits a clutter detection with this probability.
    double clutter_rate = 0.0;
    double min_box_size = 30.0;
    double max_box_size = 90.0;
    /// Tracks live for the whole video when true; otherwise each gets a random span.
    bool full_span = true;
    VideoId video_id = 1;
    std::uint64_t seed = 0;

    /// Throws InvalidArgument on out-of-range fields.
    void validate() const;
};

SynthConfig parse_synth_config(std::string_view document);
std::string serialize_synth_config(const SynthConfig& config);

struct Scenario {
    AnnotationSet annotations;
    DetectionSequence detections;
    std::size_t dropped = 0;
    std::size_t clutter = 0;
};

/// Ground truth plus matching noisy detections; identical output for equal
/// configs. Categories 1..n_categories, the first half Base. Track ids are
/// video_id * 10000 + k. Throws InvalidArgument when the boxes cannot fit the
/// image or the embedding separation cannot be met.
Scenario generate_scenario(const SynthConfig& cfg);

struct ErrorPlan {
    double id_switch_rate = 0.0;   ///< per track: split at a random frame into a new id
    double class_flip_rate = 0.0;  ///< per record: replace the category
    double box_jitter_std = 0.0;   ///< pixels on x, y
    double deletion_rate = 0.0;    ///< per record: remove
    /// Categories to flip into; when empty, those present in the input.
    std::vector<CategoryId> categories;
    std::uint64_t seed = 0;
};

struct Injection {
    TrackResult result;
    std::size_t id_switches = 0;
    std::size_t class_flips = 0;
    std::size_t jittered = 0;
    std::size_t deletions = 0;
};

/// Applies each corruption independently (own random stream per kind).
/// A zero plan returns the input unchanged.
Injection inject_errors(const TrackResult& input, const ErrorPlan& plan);

/// Converts ground truth to a perfect TrackResult (score 1, GT ids and categories).
TrackResult ground_truth_as_result(const AnnotationSet& set);

}  // namespace ovtk
