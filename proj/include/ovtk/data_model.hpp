#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ovtk/bbox.hpp"

namespace ovtk {

using VideoId = std::int64_t;
using TrackId = std::int64_t;
using CategoryId = std::int64_t;

/// Category id carried by detections without class scores.
inline constexpr CategoryId kUnknownCategory = -1;

enum class Split { Base, Novel };

struct Category {
    CategoryId id = 0;
    std::string name;
    Split split = Split::Novel;

    friend bool operator==(const Category&, const Category&) = default;
};

struct VideoMeta {
    VideoId id = 0;
    std::string name;
    int width = 1;
    int height = 1;
    int frame_count = 1;
    double fps = 1.0;
    double ann_fps = 1.0;

    /// Spacing, in frame indices, between consecutive annotated frames.
    int annotation_stride() const;

    friend bool operator==(const VideoMeta&, const VideoMeta&) = default;
};

/// One ground-truth record. An absent bbox marks a fully occluded object
/// that keeps its track id.
struct GtAnnotation {
    VideoId video_id = 0;
    int frame_index = 0;
    TrackId track_id = 0;
    CategoryId category_id = 0;
    std::optional<BBox> bbox;

    friend bool operator==(const GtAnnotation&, const GtAnnotation&) = default;
};

struct AnnotationSet {
    std::vector<VideoMeta> videos;
    std::vector<Category> categories;
    std::vector<GtAnnotation> annotations;

    const VideoMeta* find_video(VideoId id) const;
    const Category* find_category(CategoryId id) const;

    friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

struct Detection {
    BBox bbox;
    double score = 0.0;
    std::optional<std::map<CategoryId, double>> class_scores;
    std::vector<double> embedding;
    /// Argmax of class_scores (lowest id on ties); kUnknownCategory when absent.
    CategoryId assigned_category = kUnknownCategory;

    friend bool operator==(const Detection&, const Detection&) = default;
};

/// Argmax of a class-score map, lowest id winning ties.
CategoryId argmax_category(const std::map<CategoryId, double>& scores);

struct DetectionFrame {
    int frame_index = 0;
    std::vector<Detection> detections;

    friend bool operator==(const DetectionFrame&, const DetectionFrame&) = default;
};

struct DetectionSequence {
    VideoId video_id = 0;
    std::vector<DetectionFrame> frames;

    friend bool operator==(const DetectionSequence&, const DetectionSequence&) = default;
};

/// One tracker output record.
struct TrackRecord {
    VideoId video_id = 0;
    int frame_index = 0;
    TrackId track_id = 0;
    CategoryId category_id = kUnknownCategory;
    BBox bbox;
    double score = 0.0;

    friend bool operator==(const TrackRecord&, const TrackRecord&) = default;
};

/// Tracker output for any number of videos. Track ids are scoped per video.
struct TrackResult {
    std::vector<TrackRecord> records;

    friend bool operator==(const TrackResult&, const TrackResult&) = default;
};

/// Assigns Base to categories whose name is listed, Novel to everything else.
std::vector<Category> split_categories(std::vector<Category> categories,
                                       const std::set<std::string>& base_names);

struct SplitCounts {
    std::size_t base = 0;
    std::size_t novel = 0;
};
SplitCounts count_splits(const std::vector<Category>& categories);

/// Outcome of checking every AnnotationSet invariant. Problems are collected,
/// not thrown, so a validator can list all of them at once.
struct ValidationReport {
    std::vector<std::string> errors;
    std::size_t n_videos = 0;
    std::size_t n_categories = 0;
    std::size_t n_tracks = 0;
    std::size_t n_records = 0;
    std::size_t n_boxes = 0;
    std::size_t n_occluded = 0;

    bool ok() const { return errors.empty(); }
};

ValidationReport validate_annotation_set(const AnnotationSet& set);

/// Throws ValidationError with the first problems found.
void require_valid(const AnnotationSet& set);

}  // namespace ovtk
