#include "ovtk/teta.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ovtk/error.hpp"
#include "ovtk/hungarian.hpp"
#include "ovtk/kernels.hpp"

namespace ovtk {

TetaCounts& TetaCounts::operator+=(const TetaCounts& other)
{
    tpl += other.tpl;
    fpl += other.fpl;
    fnl += other.fnl;
    tpc += other.tpc;
    fpc += other.fpc;
    fnc += other.fnc;
    association.insert(association.end(), other.association.begin(), other.association.end());
    return *this;
}

FrameMatch match_localization(std::span<const GtAnnotation> gt, std::span<const TrackRecord> pred, double threshold)
{
    FrameMatch out;
    std::vector<std::size_t> present;
    std::vector<BBox> gt_boxes;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (gt[i].bbox) {
            present.push_back(i);
            gt_boxes.push_back(*gt[i].bbox);
        }
    }
    std::vector<BBox> pred_boxes;
    pred_boxes.reserve(pred.size());
    for (const auto& p : pred) pred_boxes.push_back(p.bbox);

    Eigen::MatrixXd overlap = kernels::iou_matrix(gt_boxes, pred_boxes, kernels::Execution::Serial);
    // Pairs below the threshold are forbidden; zeroing them cannot change
    // which allowed pairs maximize the total.
    Eigen::MatrixXd allowed = (overlap.array() >= threshold).select(overlap, 0.0);

    std::vector<char> gt_used(present.size(), 0), pred_used(pred.size(), 0);
    for (const auto& [gi, pi] : hungarian_assign(allowed)) {
        const double v = overlap(static_cast<Eigen::Index>(gi), static_cast<Eigen::Index>(pi));
        if (!(v >= threshold) || !(v > 0.0)) continue;
        const auto& g = gt[present[gi]];
        const auto& p = pred[pi];
        out.matches.push_back({g.video_id, g.frame_index, g.track_id, p.track_id, g.category_id, p.category_id, v});
        gt_used[gi] = 1;
        pred_used[pi] = 1;
    }
    for (std::size_t i = 0; i < present.size(); ++i) {
        if (!gt_used[i]) out.unmatched_gt.push_back(present[i]);
    }
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!pred_used[i]) out.unmatched_pred.push_back(i);
    }
    return out;
}

double compute_loca(const TetaCounts& c)
{
    const long denom = c.tpl + c.fpl + c.fnl;
    return denom == 0 ? 0.0 : 100.0 * static_cast<double>(c.tpl) / static_cast<double>(denom);
}

namespace {

struct ClassCounts {
    long tpc = 0;
    long fpc = 0;
    long fnc = 0;
};

ClassCounts classify(std::span<const LocMatch> matches)
{
    ClassCounts c;
    for (const auto& m : matches) {
        if (m.pred_category_id == m.gt_category_id) {
            ++c.tpc;
        } else {
            ++c.fpc;
            ++c.fnc;
        }
    }
    return c;
}

double ratio(long num, long denom)
{
    return denom == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(denom);
}

double mean_percent(const std::vector<double>& fractions)
{
    if (fractions.empty()) return 0.0;
    double sum = 0.0;
    for (double f : fractions) sum += f;
    return 100.0 * sum / static_cast<double>(fractions.size());
}

SplitScores finish(TetaCounts counts)
{
    SplitScores s;
    s.loca = compute_loca(counts);
    s.clsa = ratio(counts.tpc, counts.tpc + counts.fpc + counts.fnc);
    s.assa = mean_percent(counts.association);
    s.teta = (s.loca + s.clsa + s.assa) / 3.0;
    s.counts = std::move(counts);
    return s;
}

struct VideoCounts {
    TetaCounts all;
    TetaCounts base;
    TetaCounts novel;
};

VideoCounts evaluate_video(const std::vector<GtAnnotation>& gt, const std::vector<TrackRecord>& pred,
                           double threshold, const std::unordered_map<CategoryId, Split>& splits)
{
    std::map<int, std::pair<std::vector<GtAnnotation>, std::vector<TrackRecord>>> frames;
    for (const auto& g : gt) frames[g.frame_index].first.push_back(g);
    for (const auto& p : pred) frames[p.frame_index].second.push_back(p);

    VideoCounts out;
    auto bucket = [&](CategoryId category) -> TetaCounts* {
        auto it = splits.find(category);
        if (it == splits.end()) return nullptr;
        return it->second == Split::Base ? &out.base : &out.novel;
    };

    std::vector<LocMatch> matches;
    for (auto& [frame, records] : frames) {
        auto& [frame_gt, frame_pred] = records;
        // Stable inputs make the result independent of record order.
        std::sort(frame_gt.begin(), frame_gt.end(),
                  [](const GtAnnotation& a, const GtAnnotation& b) { return a.track_id < b.track_id; });
        // Predictions are ordered by geometry, not id, so relabeling ids
        // cannot change how IoU ties are broken.
        std::sort(frame_pred.begin(), frame_pred.end(), [](const TrackRecord& a, const TrackRecord& b) {
            return std::tie(a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h, a.score, a.category_id, a.track_id) <
                   std::tie(b.bbox.x, b.bbox.y, b.bbox.w, b.bbox.h, b.score, b.category_id, b.track_id);
        });
        FrameMatch fm = match_localization(frame_gt, frame_pred, threshold);
        for (auto gi : fm.unmatched_gt) {
            ++out.all.fnl;
            if (auto* b = bucket(frame_gt[gi].category_id)) ++b->fnl;
        }
        for (auto pi : fm.unmatched_pred) {
            ++out.all.fpl;
            if (auto* b = bucket(frame_pred[pi].category_id)) ++b->fpl;
        }
        matches.insert(matches.end(), fm.matches.begin(), fm.matches.end());
    }

    const auto fractions = association_fractions(matches);
    for (std::size_t i = 0; i < matches.size(); ++i) {
        const auto& m = matches[i];
        const bool correct = m.pred_category_id == m.gt_category_id;
        for (TetaCounts* c : {&out.all, bucket(m.gt_category_id)}) {
            if (!c) continue;
            ++c->tpl;
            if (correct) {
                ++c->tpc;
            } else {
                ++c->fpc;
                ++c->fnc;
            }
            c->association.push_back(fractions[i]);
        }
    }
    return out;
}

}  // namespace

double compute_clsa(std::span<const LocMatch> matches)
{
    const auto c = classify(matches);
    return ratio(c.tpc, c.tpc + c.fpc + c.fnc);
}

std::vector<double> association_fractions(std::span<const LocMatch> matches)
{
    std::map<std::tuple<VideoId, TrackId, TrackId>, long> pair_count;
    std::map<std::pair<VideoId, TrackId>, long> gt_count, pred_count;
    for (const auto& m : matches) {
        ++pair_count[{m.video_id, m.gt_track_id, m.pred_track_id}];
        ++gt_count[{m.video_id, m.gt_track_id}];
        ++pred_count[{m.video_id, m.pred_track_id}];
    }
    std::vector<double> out;
    out.reserve(matches.size());
    for (const auto& m : matches) {
        const long tpa = pair_count[{m.video_id, m.gt_track_id, m.pred_track_id}];
        const long fna = gt_count[{m.video_id, m.gt_track_id}] - tpa;
        const long fpa = pred_count[{m.video_id, m.pred_track_id}] - tpa;
        out.push_back(static_cast<double>(tpa) / static_cast<double>(tpa + fpa + fna));
    }
    return out;
}

double compute_assa(std::span<const LocMatch> matches)
{
    return mean_percent(association_fractions(matches));
}

TetaReport compute_teta(const AnnotationSet& gt, const TrackResult& pred, const TetaOptions& options)
{
    if (options.iou_thresholds.empty()) throw InvalidArgument("compute_teta: no localization thresholds");
    for (double t : options.iou_thresholds) {
        if (!(t > 0.0 && t <= 1.0)) throw InvalidArgument("compute_teta: thresholds must lie in (0, 1]");
    }

    std::map<VideoId, std::pair<std::vector<GtAnnotation>, std::vector<TrackRecord>>> videos;
    for (const auto& v : gt.videos) videos[v.id];
    for (const auto& a : gt.annotations) videos[a.video_id].first.push_back(a);
    for (const auto& r : pred.records) {
        auto it = videos.find(r.video_id);
        if (it == videos.end()) {
            throw InvalidArgument("video id mismatch: prediction video " + std::to_string(r.video_id) +
                                  " is not in the ground truth");
        }
        it->second.second.push_back(r);
    }
    std::unordered_map<CategoryId, Split> splits;
    for (const auto& c : gt.categories) splits[c.id] = c.split;

    std::vector<const std::pair<std::vector<GtAnnotation>, std::vector<TrackRecord>>*> ordered;
    for (const auto& [id, data] : videos) ordered.push_back(&data);

    TetaReport report;
    report.iou_thresholds = options.iou_thresholds;
    TetaCounts sum_all, sum_base, sum_novel;
    double acc[3][3] = {};

    for (double threshold : options.iou_thresholds) {
        std::vector<VideoCounts> per_video(ordered.size());
        const long n = static_cast<long>(ordered.size());
#ifdef _OPENMP
        const int threads = options.jobs > 0 ? options.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
        for (long i = 0; i < n; ++i) {
            const auto* data = ordered[static_cast<std::size_t>(i)];
            per_video[static_cast<std::size_t>(i)] = evaluate_video(data->first, data->second, threshold, splits);
        }

        // Reduce in video-id order so the association list is deterministic.
        VideoCounts total;
        for (const auto& v : per_video) {
            total.all += v.all;
            total.base += v.base;
            total.novel += v.novel;
        }
        TetaSplits s{finish(total.all), finish(total.base), finish(total.novel)};
        sum_all += s.all.counts;
        sum_base += s.base.counts;
        sum_novel += s.novel.counts;
        const SplitScores* parts[3] = {&s.all, &s.base, &s.novel};
        for (int k = 0; k < 3; ++k) {
            acc[k][0] += parts[k]->loca;
            acc[k][1] += parts[k]->clsa;
            acc[k][2] += parts[k]->assa;
        }
        report.per_threshold.push_back(std::move(s));
    }

    const double nt = static_cast<double>(options.iou_thresholds.size());
    auto averaged = [&](int k, TetaCounts counts) {
        SplitScores s;
        s.loca = acc[k][0] / nt;
        s.clsa = acc[k][1] / nt;
        s.assa = acc[k][2] / nt;
        s.teta = (s.loca + s.clsa + s.assa) / 3.0;
        s.counts = std::move(counts);
        return s;
    };
    if (options.iou_thresholds.size() == 1) {
        report.splits = report.per_threshold.front();
    } else {
        report.splits = {averaged(0, std::move(sum_all)), averaged(1, std::move(sum_base)),
                         averaged(2, std::move(sum_novel))};
    }
    return report;
}

}  // namespace ovtk
