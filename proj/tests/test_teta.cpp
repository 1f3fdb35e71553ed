#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ovtk/error.hpp"
#include "ovtk/synth.hpp"
#include "ovtk/teta.hpp"

using namespace ovtk;

namespace {

AnnotationSet single_track(int frames, CategoryId cat = 1)
{
    AnnotationSet s;
    s.videos = {{1, "v", 200, 200, frames, 30.0, 30.0}};
    s.categories = {{1, "base_cat", Split::Base}, {2, "novel_cat", Split::Novel}};
    for (int f = 0; f < frames; ++f) s.annotations.push_back({1, f, 100, cat, BBox{10.0 + f, 10, 20, 20}});
    return s;
}

// One GT track over 4 frames, predicted as id 1 on frames 0-1 and id 2 on frames 2-3.
TrackResult id_switch_prediction(const AnnotationSet& gt)
{
    TrackResult r;
    for (const auto& a : gt.annotations)
        r.records.push_back({a.video_id, a.frame_index, a.frame_index < 2 ? 1 : 2, a.category_id, *a.bbox, 0.9});
    return r;
}

LocMatch lm(TrackId g, TrackId p, int frame = 0, CategoryId gc = 1, CategoryId pc = 1)
{
    return {1, frame, g, p, gc, pc, 1.0};
}

}  // namespace

TEST(MatchLocalization, IdenticalPredictions)
{
    const auto gt = single_track(1);
    const std::vector<TrackRecord> pred{{1, 0, 5, 1, *gt.annotations[0].bbox, 1.0}};
    const auto m = match_localization(gt.annotations, pred, 0.5);
    EXPECT_EQ(m.matches.size(), 1u);
    EXPECT_EQ(m.fpl(), 0);
    EXPECT_EQ(m.fnl(), 0);
}

TEST(MatchLocalization, OneExactOneDisjoint)
{
    const auto gt = single_track(1);
    const std::vector<TrackRecord> pred{{1, 0, 5, 1, {150, 150, 10, 10}, 1.0}, {1, 0, 6, 1, *gt.annotations[0].bbox, 1.0}};
    const auto m = match_localization(gt.annotations, pred, 0.5);
    ASSERT_EQ(m.matches.size(), 1u);
    EXPECT_EQ(m.matches[0].pred_track_id, 6);
    TetaCounts c;
    c.tpl = 1;
    c.fpl = m.fpl();
    c.fnl = m.fnl();
    EXPECT_EQ(c.fpl, 1);
    EXPECT_DOUBLE_EQ(compute_loca(c), 50.0);
}

TEST(MatchLocalization, OccludedGtIsIgnored)
{
    const std::vector<GtAnnotation> gt{{1, 0, 1, 1, std::nullopt}};
    const auto m = match_localization(gt, {}, 0.5);
    EXPECT_TRUE(m.matches.empty());
    EXPECT_EQ(m.fnl(), 0);
    EXPECT_EQ(m.fpl(), 0);
}

TEST(MatchLocalization, BelowThresholdIsForbidden)
{
    const std::vector<GtAnnotation> gt{{1, 0, 1, 1, BBox{0, 0, 10, 10}}};
    const std::vector<TrackRecord> pred{{1, 0, 1, 1, {5, 0, 10, 10}, 1.0}};  // IoU 1/3
    const auto m = match_localization(gt, pred, 0.5);
    EXPECT_TRUE(m.matches.empty());
    EXPECT_EQ(m.fpl(), 1);
    EXPECT_EQ(m.fnl(), 1);
}

TEST(ComputeLoca, Examples)
{
    TetaCounts c;
    c.tpl = 10;
    EXPECT_EQ(compute_loca(c), 100.0);
    EXPECT_EQ(compute_loca(TetaCounts{}), 0.0);
}

TEST(ComputeClsa, Examples)
{
    const std::vector<LocMatch> good{lm(1, 1), lm(2, 2)};
    EXPECT_EQ(compute_clsa(good), 100.0);
    const std::vector<LocMatch> half{lm(1, 1, 0, 1, 1), lm(2, 2, 0, 1, 3)};
    EXPECT_NEAR(compute_clsa(half), 100.0 / 3.0, 1e-12);
    EXPECT_EQ(compute_clsa({}), 0.0);
}

TEST(ComputeAssa, Examples)
{
    std::vector<LocMatch> perfect;
    for (int f = 0; f < 5; ++f) perfect.push_back(lm(1, 7, f));
    EXPECT_EQ(compute_assa(perfect), 100.0);

    const std::vector<LocMatch> switched{lm(1, 1, 0), lm(1, 1, 1), lm(1, 2, 2), lm(1, 2, 3)};
    EXPECT_DOUBLE_EQ(compute_assa(switched), 50.0);

    std::vector<LocMatch> swap;
    for (int f = 0; f < 4; ++f) {
        swap.push_back(lm(1, 2, f));
        swap.push_back(lm(2, 1, f));
    }
    EXPECT_EQ(compute_assa(swap), 100.0);
    EXPECT_EQ(compute_assa({}), 0.0);
}

TEST(ComputeAssa, MatchesBruteForceOnSmallScenarios)
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        std::uniform_int_distribution<int> ntr(1, 3), nfr(1, 5), pid(1, 4);
        const int tracks = ntr(rng), frames = nfr(rng);
        std::vector<LocMatch> m;
        for (int g = 1; g <= tracks; ++g)
            for (int f = 0; f < frames; ++f)
                if (rng() % 4 != 0) m.push_back(lm(g, pid(rng), f));
        EXPECT_NEAR(compute_assa(m), oracle::brute_force_assa(m), 1e-9);
    }
}

TEST(ComputeTeta, IdSwitchReport)
{
    const auto gt = single_track(4);
    const auto r = compute_teta(gt, id_switch_prediction(gt));
    EXPECT_DOUBLE_EQ(r.splits.all.loca, 100.0);
    EXPECT_DOUBLE_EQ(r.splits.all.clsa, 100.0);
    EXPECT_DOUBLE_EQ(r.splits.all.assa, 50.0);
    EXPECT_NEAR(r.splits.all.teta, 83.33, 0.01);
    EXPECT_EQ(r.splits.base.counts.tpl, 4);
    EXPECT_EQ(r.splits.novel.counts.tpl, 0);
    EXPECT_EQ(r.splits.novel.teta, 0.0);
}

TEST(ComputeTeta, PerfectAndEmpty)
{
    const auto gt = single_track(6, 2);
    const auto perfect = compute_teta(gt, ground_truth_as_result(gt));
    for (double v : {perfect.splits.all.loca, perfect.splits.all.clsa, perfect.splits.all.assa, perfect.splits.all.teta,
                     perfect.splits.novel.teta})
        EXPECT_EQ(v, 100.0);
    const auto empty = compute_teta(gt, TrackResult{});
    EXPECT_EQ(empty.splits.all.loca, 0.0);
    EXPECT_EQ(empty.splits.all.clsa, 0.0);
    EXPECT_EQ(empty.splits.all.assa, 0.0);
    EXPECT_EQ(empty.splits.all.counts.fnl, 6);
}

TEST(ComputeTeta, UnknownVideoIsRejected)
{
    const auto gt = single_track(2);
    TrackResult r;
    r.records.push_back({99, 0, 1, 1, {0, 0, 5, 5}, 1.0});
    EXPECT_THROW(compute_teta(gt, r), InvalidArgument);
}

TEST(ComputeTeta, FalsePositiveSplitFollowsPredictedCategory)
{
    const auto gt = single_track(1, 1);
    TrackResult r = ground_truth_as_result(gt);
    r.records.push_back({1, 0, 50, 2, {150, 150, 10, 10}, 0.5});    // novel FP
    r.records.push_back({1, 0, 51, 42, {170, 170, 10, 10}, 0.5});   // category absent from GT
    const auto rep = compute_teta(gt, r);
    EXPECT_EQ(rep.splits.all.counts.fpl, 2);
    EXPECT_EQ(rep.splits.base.counts.fpl, 0);
    EXPECT_EQ(rep.splits.novel.counts.fpl, 1);
}

TEST(ComputeTeta, RelabelAndShuffleInvariance)
{
    SynthConfig cfg;
    cfg.n_tracks = 6;
    cfg.n_frames = 30;
    cfg.seed = 3;
    const auto gt = generate_scenario(cfg).annotations;
    ErrorPlan plan;
    plan.id_switch_rate = 0.5;
    plan.class_flip_rate = 0.2;
    plan.box_jitter_std = 4.0;
    plan.deletion_rate = 0.1;
    plan.seed = 8;
    const auto pred = inject_errors(ground_truth_as_result(gt), plan).result;
    const auto base = compute_teta(gt, pred);

    std::mt19937_64 rng(1);
    auto relabeled = pred;
    std::map<TrackId, TrackId> perm;
    for (const auto& r : pred.records) perm.emplace(r.track_id, 0);
    std::vector<TrackId> fresh;
    for (std::size_t i = 0; i < perm.size(); ++i) fresh.push_back(static_cast<TrackId>(1000 + 7 * i));
    std::shuffle(fresh.begin(), fresh.end(), rng);
    std::size_t k = 0;
    for (auto& [id, to] : perm) to = fresh[k++];
    for (auto& r : relabeled.records) r.track_id = perm[r.track_id];
    std::shuffle(relabeled.records.begin(), relabeled.records.end(), rng);
    auto gt_shuffled = gt;
    std::shuffle(gt_shuffled.annotations.begin(), gt_shuffled.annotations.end(), rng);

    const auto other = compute_teta(gt_shuffled, relabeled);
    EXPECT_EQ(other.splits.all.loca, base.splits.all.loca);
    EXPECT_EQ(other.splits.all.clsa, base.splits.all.clsa);
    EXPECT_NEAR(other.splits.all.assa, base.splits.all.assa, 1e-9);
    EXPECT_NEAR(other.splits.novel.teta, base.splits.novel.teta, 1e-9);
}

TEST(ComputeTeta, ParallelMatchesSerialAndThresholdsAverage)
{
    AnnotationSet gt;
    TrackResult pred;
    for (int v = 1; v <= 4; ++v) {
        SynthConfig cfg;
        cfg.video_id = v;
        cfg.n_tracks = 4;
        cfg.n_frames = 20;
        cfg.seed = static_cast<std::uint64_t>(v);
        auto s = generate_scenario(cfg).annotations;
        gt.videos.insert(gt.videos.end(), s.videos.begin(), s.videos.end());
        gt.annotations.insert(gt.annotations.end(), s.annotations.begin(), s.annotations.end());
        gt.categories = s.categories;
    }
    ErrorPlan plan;
    plan.box_jitter_std = 6.0;
    plan.id_switch_rate = 0.3;
    pred = inject_errors(ground_truth_as_result(gt), plan).result;
    TetaOptions serial, parallel;
    parallel.jobs = 4;
    const auto a = compute_teta(gt, pred, serial), b = compute_teta(gt, pred, parallel);
    EXPECT_EQ(a.splits.all.teta, b.splits.all.teta);
    EXPECT_EQ(a.splits.all.counts.tpl, b.splits.all.counts.tpl);

    TetaOptions multi;
    multi.iou_thresholds = {0.5, 0.75};
    const auto m = compute_teta(gt, pred, multi);
    ASSERT_EQ(m.per_threshold.size(), 2u);
    EXPECT_NEAR(m.splits.all.loca, 0.5 * (m.per_threshold[0].all.loca + m.per_threshold[1].all.loca), 1e-12);
    EXPECT_GE(m.per_threshold[0].all.loca, m.per_threshold[1].all.loca);
    EXPECT_NEAR(m.splits.all.teta, (m.splits.all.loca + m.splits.all.clsa + m.splits.all.assa) / 3.0, 1e-9);
}
