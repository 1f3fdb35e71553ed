#pragma once

#include <array>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "ovtk/data_model.hpp"

namespace ovtk {

template <typename T>
struct Range {
    T min{};
    T max{};
};

/// Dataset-level counts (the Table-1 style summary).
struct SummaryStats {
    std::size_t n_classes = 0;
    std::size_t n_videos = 0;
    std::size_t n_tracks = 0;
    std::size_t n_boxes = 0;   ///< present boxes only
    std::size_t n_frames = 0;  ///< sum of frame_count over videos
    std::size_t n_annotated_frames = 0;
    Range<int> resolution;                ///< frame height in pixels
    Range<double> duration_seconds;
    Range<std::size_t> objects_per_frame; ///< over annotated frames
    Range<double> ann_fps;
};

SummaryStats dataset_summary(const AnnotationSet& set);

struct AttributeFlags {
    bool occluded_track = false;
    bool fast_motion = false;
    bool out_of_view = false;
    bool shape_change = false;

    friend bool operator==(const AttributeFlags&, const AttributeFlags&) = default;
};

/// `track` holds the records of one track, any order. At least one must have a box.
AttributeFlags compute_track_attributes(std::span<const GtAnnotation> track, const VideoMeta& meta);

enum class SizeClass { Large, Medium, Small };
enum class ShapeClass { Complex, Intermediate, Normal };
enum class LengthClass { Long, Medium, Short };

std::string_view to_string(SizeClass c);
std::string_view to_string(ShapeClass c);
std::string_view to_string(LengthClass c);

/// Area fraction >= 1/2 is Large, >= 1/10 Medium, else Small.
SizeClass classify_size(const BBox& box, const VideoMeta& meta);
/// Aspect w/h >= 5 or <= 1/5 is Complex, >= 2 or <= 1/2 Intermediate, else Normal.
ShapeClass classify_shape(const BBox& box);
/// Span (last - first + 1 frames) over frame_count: >= 4/5 Long, >= 1/5 Medium, else Short.
LengthClass classify_track_length(std::span<const GtAnnotation> track, const VideoMeta& meta);

struct ObjectClassing {
    SizeClass size;
    ShapeClass shape;
};
ObjectClassing classify_object(const BBox& box, const VideoMeta& meta);

/// Histograms and attribute tallies over a whole AnnotationSet.
struct AttributeReport {
    std::array<std::size_t, 3> size{};    ///< Large, Medium, Small (per present box)
    std::array<std::size_t, 3> shape{};   ///< Complex, Intermediate, Normal (per present box)
    std::array<std::size_t, 3> length{};  ///< Long, Medium, Short (per track)
    /// Tracks carrying each flag, in field order of AttributeFlags.
    std::array<std::size_t, 4> tracks_with{};
    /// Videos with at least one track carrying each flag.
    std::array<std::size_t, 4> videos_with{};
    std::size_t n_tracks = 0;
    std::size_t n_videos = 0;
};

AttributeReport attribute_report(const AnnotationSet& set);

}  // namespace ovtk
