#include "ovtk/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "ovtk/error.hpp"

namespace ovtk {

int VideoMeta::annotation_stride() const
{
    if (!(ann_fps > 0.0) || !(fps > 0.0)) return 1;
    const auto stride = static_cast<int>(std::lround(fps / ann_fps));
    return std::max(stride, 1);
}

const VideoMeta* AnnotationSet::find_video(VideoId id) const
{
    auto it = std::find_if(videos.begin(), videos.end(),
                           [id](const VideoMeta& v) { return v.id == id; });
    return it == videos.end() ? nullptr : &*it;
}

const Category* AnnotationSet::find_category(CategoryId id) const
{
    auto it = std::find_if(categories.begin(), categories.end(),
                           [id](const Category& c) { return c.id == id; });
    return it == categories.end() ? nullptr : &*it;
}

CategoryId argmax_category(const std::map<CategoryId, double>& scores)
{
    CategoryId best = kUnknownCategory;
    double best_score = 0.0;
    for (const auto& [id, s] : scores) {
        if (best == kUnknownCategory || s > best_score) {
            best = id;
            best_score = s;
        }
    }
    return best;
}

std::vector<Category> split_categories(std::vector<Category> categories,
                                       const std::set<std::string>& base_names)
{
    for (auto& c : categories) {
        c.split = base_names.contains(c.name) ? Split::Base : Split::Novel;
    }
    return categories;
}

SplitCounts count_splits(const std::vector<Category>& categories)
{
    SplitCounts counts;
    for (const auto& c : categories) {
        (c.split == Split::Base ? counts.base : counts.novel) += 1;
    }
    return counts;
}

ValidationReport validate_annotation_set(const AnnotationSet& set)
{
    ValidationReport report;
    report.n_videos = set.videos.size();
    report.n_categories = set.categories.size();
    report.n_records = set.annotations.size();
    auto& errors = report.errors;

    std::unordered_map<VideoId, const VideoMeta*> videos;
    for (std::size_t i = 0; i < set.videos.size(); ++i) {
        const auto& v = set.videos[i];
        std::ostringstream where;
        where << "videos[" << i << "] (id " << v.id << ")";
        if (!videos.emplace(v.id, &v).second) errors.push_back(where.str() + ": duplicate video id");
        if (v.width < 1 || v.height < 1) errors.push_back(where.str() + ": width/height must be >= 1");
        if (v.frame_count < 1) errors.push_back(where.str() + ": frame_count must be >= 1");
        if (!(v.fps > 0.0) || !(v.ann_fps > 0.0)) errors.push_back(where.str() + ": fps and ann_fps must be positive");
        if (v.ann_fps > v.fps) errors.push_back(where.str() + ": ann_fps exceeds fps");
    }

    std::unordered_map<CategoryId, const Category*> categories;
    for (std::size_t i = 0; i < set.categories.size(); ++i) {
        const auto& c = set.categories[i];
        if (!categories.emplace(c.id, &c).second) {
            std::ostringstream msg;
            msg << "categories[" << i << "]: duplicate category id " << c.id;
            errors.push_back(msg.str());
        }
    }

    struct TrackOwner {
        VideoId video;
        CategoryId category;
    };
    std::unordered_map<TrackId, TrackOwner> tracks;
    std::set<std::tuple<VideoId, int, TrackId>> seen;

    for (std::size_t i = 0; i < set.annotations.size(); ++i) {
        const auto& a = set.annotations[i];
        auto fail = [&](const std::string& what) {
            std::ostringstream msg;
            msg << "annotations[" << i << "]: " << what;
            errors.push_back(msg.str());
        };
        auto vit = videos.find(a.video_id);
        if (vit == videos.end()) {
            fail("unknown video_id " + std::to_string(a.video_id));
        } else if (a.frame_index < 0 || a.frame_index >= vit->second->frame_count) {
            fail("frame_index " + std::to_string(a.frame_index) + " outside [0, " +
                 std::to_string(vit->second->frame_count) + ")");
        }
        if (!categories.contains(a.category_id)) {
            fail("unknown category_id " + std::to_string(a.category_id));
        }
        if (a.bbox) {
            ++report.n_boxes;
            if (!a.bbox->valid()) fail("bbox must be finite with positive width and height");
        } else {
            ++report.n_occluded;
        }
        if (!seen.emplace(a.video_id, a.frame_index, a.track_id).second) {
            fail("duplicate (video " + std::to_string(a.video_id) + ", frame " +
                 std::to_string(a.frame_index) + ", track " + std::to_string(a.track_id) + ")");
        }
        auto [tit, inserted] = tracks.emplace(a.track_id, TrackOwner{a.video_id, a.category_id});
        if (!inserted) {
            if (tit->second.video != a.video_id) {
                fail("track " + std::to_string(a.track_id) + " spans videos " +
                     std::to_string(tit->second.video) + " and " + std::to_string(a.video_id));
            }
            if (tit->second.category != a.category_id) {
                fail("track " + std::to_string(a.track_id) + " has categories " +
                     std::to_string(tit->second.category) + " and " + std::to_string(a.category_id));
            }
        }
    }
    report.n_tracks = tracks.size();
    return report;
}

void require_valid(const AnnotationSet& set)
{
    const auto report = validate_annotation_set(set);
    if (report.ok()) return;
    std::ostringstream msg;
    msg << report.errors.size() << " validation error(s): ";
    const std::size_t shown = std::min<std::size_t>(report.errors.size(), 5);
    for (std::size_t i = 0; i < shown; ++i) {
        if (i) msg << "; ";
        msg << report.errors[i];
    }
    throw ValidationError(msg.str());
}

}  // namespace ovtk
