#include "ovtk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace ovtk {

namespace {

template <typename T>
void widen(Range<T>& r, T v, bool& first)
{
    if (first) {
        r.min = r.max = v;
        first = false;
    } else {
        r.min = std::min(r.min, v);
        r.max = std::max(r.max, v);
    }
}

std::vector<const GtAnnotation*> present_sorted(std::span<const GtAnnotation> track)
{
    std::vector<const GtAnnotation*> out;
    for (const auto& a : track) {
        if (a.bbox) out.push_back(&a);
    }
    std::sort(out.begin(), out.end(),
              [](const GtAnnotation* a, const GtAnnotation* b) { return a->frame_index < b->frame_index; });
    return out;
}

/// Tracks keyed by (video, track id); each holds its records.
std::map<std::pair<VideoId, TrackId>, std::vector<GtAnnotation>> group_tracks(const AnnotationSet& set)
{
    std::map<std::pair<VideoId, TrackId>, std::vector<GtAnnotation>> tracks;
    for (const auto& a : set.annotations) tracks[{a.video_id, a.track_id}].push_back(a);
    return tracks;
}

}  // namespace

SummaryStats dataset_summary(const AnnotationSet& set)
{
    SummaryStats s;
    s.n_classes = set.categories.size();
    s.n_videos = set.videos.size();

    bool first_video = true;
    for (const auto& v : set.videos) {
        s.n_frames += static_cast<std::size_t>(v.frame_count);
        bool a = first_video, b = first_video, c = first_video;
        widen(s.resolution, v.height, a);
        widen(s.duration_seconds, v.fps > 0.0 ? v.frame_count / v.fps : 0.0, b);
        widen(s.ann_fps, v.ann_fps, c);
        first_video = false;
    }

    std::set<std::pair<VideoId, TrackId>> tracks;
    std::map<std::pair<VideoId, int>, std::size_t> per_frame;
    for (const auto& a : set.annotations) {
        tracks.emplace(a.video_id, a.track_id);
        auto& n = per_frame[{a.video_id, a.frame_index}];
        if (a.bbox) {
            ++s.n_boxes;
            ++n;
        }
    }
    s.n_tracks = tracks.size();
    s.n_annotated_frames = per_frame.size();
    bool first_frame = true;
    for (const auto& [key, n] : per_frame) widen(s.objects_per_frame, n, first_frame);
    return s;
}

AttributeFlags compute_track_attributes(std::span<const GtAnnotation> track, const VideoMeta& meta)
{
    AttributeFlags f;
    const auto present = present_sorted(track);
    if (present.empty()) return f;

    const int first = present.front()->frame_index;
    const int last = present.back()->frame_index;
    for (const auto& a : track) {
        if (!a.bbox && a.frame_index > first && a.frame_index < last) f.occluded_track = true;
    }

    const double motion_limit = meta.width / 25.0;
    for (std::size_t i = 0; i < present.size(); ++i) {
        const BBox& b = *present[i]->bbox;
        if (b.x < 0.0 || b.y < 0.0 || b.right() > meta.width || b.bottom() > meta.height) f.out_of_view = true;
        if (i == 0) continue;
        const BBox& p = *present[i - 1]->bbox;
        if (std::hypot(b.cx() - p.cx(), b.cy() - p.cy()) > motion_limit) f.fast_motion = true;
        const double prev_aspect = p.w / p.h;
        if (std::fabs(b.w / b.h - prev_aspect) / prev_aspect > 1.0 / 5.0) f.shape_change = true;
    }
    return f;
}

std::string_view to_string(SizeClass c)
{
    switch (c) {
        case SizeClass::Large: return "large";
        case SizeClass::Medium: return "medium";
        case SizeClass::Small: return "small";
    }
    return "small";
}

std::string_view to_string(ShapeClass c)
{
    switch (c) {
        case ShapeClass::Complex: return "complex";
        case ShapeClass::Intermediate: return "intermediate";
        case ShapeClass::Normal: return "normal";
    }
    return "normal";
}

std::string_view to_string(LengthClass c)
{
    switch (c) {
        case LengthClass::Long: return "long";
        case LengthClass::Medium: return "medium";
        case LengthClass::Short: return "short";
    }
    return "short";
}

SizeClass classify_size(const BBox& box, const VideoMeta& meta)
{
    const double fraction = box.area() / (static_cast<double>(meta.width) * meta.height);
    if (fraction >= 0.5) return SizeClass::Large;
    if (fraction >= 0.1) return SizeClass::Medium;
    return SizeClass::Small;
}

ShapeClass classify_shape(const BBox& box)
{
    const double aspect = box.w / box.h;
    if (aspect >= 5.0 || aspect <= 0.2) return ShapeClass::Complex;
    if (aspect >= 2.0 || aspect <= 0.5) return ShapeClass::Intermediate;
    return ShapeClass::Normal;
}

LengthClass classify_track_length(std::span<const GtAnnotation> track, const VideoMeta& meta)
{
    const auto present = present_sorted(track);
    if (present.empty()) return LengthClass::Short;
    const double span = present.back()->frame_index - present.front()->frame_index + 1;
    const double fraction = span / meta.frame_count;
    if (fraction >= 0.8) return LengthClass::Long;
    if (fraction >= 0.2) return LengthClass::Medium;
    return LengthClass::Short;
}

ObjectClassing classify_object(const BBox& box, const VideoMeta& meta)
{
    return {classify_size(box, meta), classify_shape(box)};
}

AttributeReport attribute_report(const AnnotationSet& set)
{
    AttributeReport r;
    r.n_videos = set.videos.size();
    std::map<VideoId, const VideoMeta*> videos;
    for (const auto& v : set.videos) videos[v.id] = &v;

    for (const auto& a : set.annotations) {
        if (!a.bbox) continue;
        const auto* meta = videos.at(a.video_id);
        const auto c = classify_object(*a.bbox, *meta);
        ++r.size[static_cast<std::size_t>(c.size)];
        ++r.shape[static_cast<std::size_t>(c.shape)];
    }

    std::map<VideoId, std::array<bool, 4>> video_flags;
    for (const auto& [key, records] : group_tracks(set)) {
        const auto* meta = videos.at(key.first);
        const bool has_box = std::any_of(records.begin(), records.end(), [](const GtAnnotation& a) { return a.bbox.has_value(); });
        if (!has_box) continue;
        ++r.n_tracks;
        ++r.length[static_cast<std::size_t>(classify_track_length(records, *meta))];
        const auto f = compute_track_attributes(records, *meta);
        const std::array<bool, 4> flags{f.occluded_track, f.fast_motion, f.out_of_view, f.shape_change};
        auto& vf = video_flags[key.first];
        for (std::size_t k = 0; k < 4; ++k) {
            if (flags[k]) {
                ++r.tracks_with[k];
                vf[k] = true;
            }
        }
    }
    for (const auto& [video, flags] : video_flags) {
        for (std::size_t k = 0; k < 4; ++k) r.videos_with[k] += flags[k] ? 1 : 0;
    }
    return r;
}

}  // namespace ovtk
