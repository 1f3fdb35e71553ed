#include <gtest/gtest.h>

#include "ovtk/stats.hpp"

using namespace ovtk;

namespace {

// 2 videos, 3 categories, 4 tracks, 10 present boxes plus one occlusion.
AnnotationSet fixture()
{
    AnnotationSet s;
    s.videos = {{1, "a", 1000, 500, 10, 10.0, 10.0}, {2, "b", 640, 480, 60, 30.0, 30.0}};
    s.categories = {{1, "cat"}, {2, "dog"}, {3, "fox"}};
    auto add = [&](VideoId v, int f, TrackId t, CategoryId c, std::optional<BBox> b) {
        s.annotations.push_back({v, f, t, c, b});
    };
    add(1, 0, 1, 1, BBox{100, 100, 50, 50});
    add(1, 1, 1, 1, BBox{150, 100, 50, 50});  // +50 px > 1000/25
    add(1, 2, 1, 1, std::nullopt);
    add(1, 3, 1, 1, BBox{160, 100, 50, 50});
    add(1, 0, 2, 2, BBox{-5, 10, 20, 20});
    add(1, 1, 2, 2, BBox{0, 10, 20, 20});
    add(1, 9, 2, 2, BBox{0, 10, 30, 20});     // aspect 1 -> 1.5
    add(2, 0, 3, 3, BBox{0, 0, 600, 300});
    add(2, 1, 3, 3, BBox{0, 0, 600, 300});
    add(2, 5, 4, 1, BBox{10, 10, 5, 40});
    add(2, 6, 4, 1, BBox{10, 10, 5, 40});
    return s;
}

std::vector<GtAnnotation> track_of(const AnnotationSet& s, TrackId id)
{
    std::vector<GtAnnotation> out;
    for (const auto& a : s.annotations)
        if (a.track_id == id) out.push_back(a);
    return out;
}

}  // namespace

TEST(DatasetSummary, Empty)
{
    const auto s = dataset_summary({});
    EXPECT_EQ(s.n_classes + s.n_videos + s.n_tracks + s.n_boxes + s.n_frames, 0u);
}

TEST(DatasetSummary, Fixture)
{
    const auto s = dataset_summary(fixture());
    EXPECT_EQ(s.n_classes, 3u);
    EXPECT_EQ(s.n_videos, 2u);
    EXPECT_EQ(s.n_tracks, 4u);
    EXPECT_EQ(s.n_boxes, 10u);
    EXPECT_EQ(s.n_frames, 70u);
    EXPECT_EQ(s.resolution.min, 480);
    EXPECT_EQ(s.resolution.max, 500);
    EXPECT_DOUBLE_EQ(s.duration_seconds.min, 1.0);
    EXPECT_DOUBLE_EQ(s.duration_seconds.max, 2.0);
    EXPECT_EQ(s.objects_per_frame.max, 2u);
    EXPECT_EQ(s.objects_per_frame.min, 0u);  // frame 2 of video 1 holds only an occlusion
}

TEST(DatasetSummary, OrderInvariant)
{
    auto s = fixture();
    std::reverse(s.annotations.begin(), s.annotations.end());
    const auto a = dataset_summary(s), b = dataset_summary(fixture());
    EXPECT_EQ(a.n_boxes, b.n_boxes);
    EXPECT_EQ(a.n_annotated_frames, b.n_annotated_frames);
    EXPECT_EQ(a.objects_per_frame.min, b.objects_per_frame.min);
}

TEST(TrackAttributes, Flags)
{
    const auto s = fixture();
    const auto t1 = compute_track_attributes(track_of(s, 1), s.videos[0]);
    EXPECT_TRUE(t1.occluded_track);
    EXPECT_TRUE(t1.fast_motion);
    EXPECT_FALSE(t1.out_of_view);
    EXPECT_FALSE(t1.shape_change);
    const auto t2 = compute_track_attributes(track_of(s, 2), s.videos[0]);
    EXPECT_TRUE(t2.out_of_view);
    EXPECT_TRUE(t2.shape_change);
    EXPECT_FALSE(t2.occluded_track);
    EXPECT_EQ(compute_track_attributes(track_of(s, 3), s.videos[1]), AttributeFlags{});
}

TEST(TrackAttributes, StaticTrackHasNoFlags)
{
    const VideoMeta m{1, "v", 100, 100, 5, 5, 5};
    std::vector<GtAnnotation> t;
    for (int f = 0; f < 5; ++f) t.push_back({1, f, 1, 1, BBox{10, 10, 20, 20}});
    EXPECT_EQ(compute_track_attributes(t, m), AttributeFlags{});
}

TEST(TrackAttributes, FastMotionThresholdIsStrict)
{
    const VideoMeta m{1, "v", 1000, 1000, 5, 5, 5};
    std::vector<GtAnnotation> t{{1, 0, 1, 1, BBox{100, 0, 10, 10}}, {1, 1, 1, 1, BBox{140, 0, 10, 10}}};
    EXPECT_FALSE(compute_track_attributes(t, m).fast_motion);
    t[1].bbox->x = 140.5;
    EXPECT_TRUE(compute_track_attributes(t, m).fast_motion);
}

TEST(Classify, SizeShapeLength)
{
    const VideoMeta m{1, "v", 100, 100, 10, 10, 10};
    EXPECT_EQ(classify_size({0, 0, 60, 100}, m), SizeClass::Large);
    EXPECT_EQ(classify_size({0, 0, 50, 100}, m), SizeClass::Large);
    EXPECT_EQ(classify_size({0, 0, 10, 100}, m), SizeClass::Medium);
    EXPECT_EQ(classify_size({0, 0, 5, 5}, m), SizeClass::Small);
    EXPECT_EQ(classify_shape({0, 0, 10, 10}), ShapeClass::Normal);
    EXPECT_EQ(classify_shape({0, 0, 50, 10}), ShapeClass::Complex);
    EXPECT_EQ(classify_shape({0, 0, 10, 50}), ShapeClass::Complex);
    EXPECT_EQ(classify_shape({0, 0, 20, 10}), ShapeClass::Intermediate);
    EXPECT_EQ(classify_shape({0, 0, 10, 20}), ShapeClass::Intermediate);
    std::vector<GtAnnotation> t{{1, 0, 1, 1, BBox{0, 0, 1, 1}}, {1, 8, 1, 1, BBox{0, 0, 1, 1}}};
    EXPECT_EQ(classify_track_length(t, m), LengthClass::Long);
    t[1].frame_index = 2;
    EXPECT_EQ(classify_track_length(t, m), LengthClass::Medium);
    t.pop_back();
    EXPECT_EQ(classify_track_length(t, m), LengthClass::Short);
}

TEST(AttributeReport, HistogramsPartition)
{
    const auto r = attribute_report(fixture());
    EXPECT_EQ(r.n_tracks, 4u);
    EXPECT_EQ(r.size[0] + r.size[1] + r.size[2], 10u);
    EXPECT_EQ(r.shape[0] + r.shape[1] + r.shape[2], 10u);
    EXPECT_EQ(r.length[0] + r.length[1] + r.length[2], 4u);
    EXPECT_EQ(r.tracks_with[0], 1u);
    EXPECT_EQ(r.videos_with[2], 1u);
}
