// Acceptance suite: one PASS/FAIL/SKIP line per criterion, exit status 1 if
// any criterion fails. Runs under ctest and standalone.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ovtk/association.hpp"
#include "ovtk/convert.hpp"
#include "ovtk/error.hpp"
#include "ovtk/hungarian.hpp"
#include "ovtk/io.hpp"
#include "ovtk/kalman.hpp"
#include "ovtk/stats.hpp"
#include "ovtk/synth.hpp"
#include "ovtk/teta.hpp"

using namespace ovtk;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
    Outcome outcome = Outcome::Pass;
    std::string detail;
};

Verdict pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Verdict fail(std::string d) { return {Outcome::Fail, std::move(d)}; }

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SynthConfig random_small_config(std::mt19937_64& rng, VideoId video)
{
    SynthConfig c;
    c.n_tracks = std::uniform_int_distribution<int>(1, 10)(rng);
    c.n_frames = std::uniform_int_distribution<int>(1, 100)(rng);
    c.n_categories = std::uniform_int_distribution<int>(1, 6)(rng);
    c.full_span = rng() % 2 == 0;
    c.motion = rng() % 2 ? MotionModel::Sinusoidal : MotionModel::ConstantVelocity;
    c.video_id = video;
    c.seed = rng();
    return c;
}

// ---------------------------------------------------------------------------

Verdict metric_identity()
{
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 50; ++i) {
        const auto gt = generate_scenario(random_small_config(rng, i + 1)).annotations;
        const auto r = compute_teta(gt, ground_truth_as_result(gt)).splits.all;
        if (r.teta != 100.0 || r.loca != 100.0 || r.clsa != 100.0 || r.assa != 100.0) {
            return fail(fmt("set %d: TETA %.17g LocA %.17g ClsA %.17g AssA %.17g", i, r.teta, r.loca, r.clsa, r.assa));
        }
    }
    return pass("50 synthetic sets score exactly 100");
}

// Boxes on a diagonal never overlap, so each frame's matching is known in
// advance and the oracle can count from the raw labels alone.
Verdict metric_formula_oracle()
{
    std::size_t checked = 0;
    double worst = 0.0;
    auto check = [&](int tracks, int frames, const std::vector<int>& labels) {
        AnnotationSet gt;
        gt.videos = {{1, "v", 1000, 1000, frames, 30, 30}};
        gt.categories = {{1, "c"}};
        TrackResult pred;
        std::vector<LocMatch> expected;
        for (int g = 0; g < tracks; ++g) {
            for (int f = 0; f < frames; ++f) {
                const BBox box{100.0 * g, 100.0 * g, 50, 50};
                gt.annotations.push_back({1, f, g + 1, 1, box});
                const int label = labels[static_cast<std::size_t>(g * frames + f)];
                if (label == 0) continue;  // prediction absent
                pred.records.push_back({1, f, label, 1, box, 1.0});
                expected.push_back({1, f, g + 1, label, 1, 1, 1.0});
            }
        }
        const double got = compute_teta(gt, pred).splits.all.assa;
        worst = std::max(worst, std::abs(got - oracle::brute_force_assa(expected)));
        ++checked;
    };
    // Exhaustive where the label space is small, sampled where it is not.
    for (int tracks = 1; tracks <= 3; ++tracks) {
        for (int frames = 1; frames <= 5; ++frames) {
            const int cells = tracks * frames;
            const int alphabet = tracks + 2;  // absent plus tracks+1 predicted ids
            const double space = std::pow(alphabet, cells);
            std::vector<int> labels(static_cast<std::size_t>(cells), 0);
            if (space <= 50000) {
                for (long code = 0; code < static_cast<long>(space); ++code) {
                    long c = code;
                    for (auto& l : labels) {
                        l = static_cast<int>(c % alphabet);
                        c /= alphabet;
                    }
                    check(tracks, frames, labels);
                }
            } else {
                std::mt19937_64 rng(static_cast<std::uint64_t>(cells));
                std::uniform_int_distribution<int> pick(0, alphabet - 1);
                for (int s = 0; s < 20000; ++s) {
                    for (auto& l : labels) l = pick(rng);
                    check(tracks, frames, labels);
                }
            }
        }
    }
    if (worst > 1e-9) return fail(fmt("max |AssA - oracle| = %.3g over %zu scenarios", worst, checked));
    return pass(fmt("%zu scenarios, max deviation %.3g", checked, worst));
}

Verdict metric_monotonicity()
{
    int switch_cases = 0, flip_cases = 0, delete_cases = 0;
    for (int seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed) + 100);
        const auto gt = generate_scenario(random_small_config(rng, 1)).annotations;
        const auto clean_pred = ground_truth_as_result(gt);
        const auto clean = compute_teta(gt, clean_pred).splits.all;

        ErrorPlan sw;
        sw.id_switch_rate = 0.5;
        sw.seed = static_cast<std::uint64_t>(seed);
        const auto s = inject_errors(clean_pred, sw);
        const auto rs = compute_teta(gt, s.result).splits.all;
        if (rs.loca != clean.loca) return fail(fmt("seed %d: id switches moved LocA", seed));
        if (rs.assa > clean.assa) return fail(fmt("seed %d: id switches raised AssA", seed));
        if (s.id_switches > 0) {
            ++switch_cases;
            if (!(rs.assa < clean.assa)) return fail(fmt("seed %d: %zu switches left AssA unchanged", seed, s.id_switches));
        }

        ErrorPlan fl;
        fl.class_flip_rate = 0.2;
        fl.seed = static_cast<std::uint64_t>(seed);
        fl.categories = {1, 2, 3, 4, 5, 6, 7};
        const auto f = inject_errors(clean_pred, fl);
        const auto rf = compute_teta(gt, f.result).splits.all;
        if (rf.loca != clean.loca || rf.assa != clean.assa) return fail(fmt("seed %d: class flips moved LocA/AssA", seed));
        if (f.class_flips > 0) {
            ++flip_cases;
            if (!(rf.clsa < clean.clsa)) return fail(fmt("seed %d: class flips left ClsA unchanged", seed));
        }

        ErrorPlan de;
        de.deletion_rate = 0.1;
        de.seed = static_cast<std::uint64_t>(seed);
        const auto d = inject_errors(clean_pred, de);
        const auto rd = compute_teta(gt, d.result).splits.all;
        if (rd.loca > clean.loca) return fail(fmt("seed %d: deletions raised LocA", seed));
        if (d.deletions > 0) {
            ++delete_cases;
            if (!(rd.loca < clean.loca)) return fail(fmt("seed %d: deletions left LocA unchanged", seed));
        }
    }
    return pass(fmt("20 seeds (%d with switches, %d with flips, %d with deletions)", switch_cases, flip_cases,
                    delete_cases));
}

Verdict derived_fixture()
{
    AnnotationSet gt;
    gt.videos = {{1, "v", 100, 100, 4, 30, 30}};
    gt.categories = {{1, "c", Split::Base}};
    TrackResult pred;
    for (int f = 0; f < 4; ++f) {
        const BBox b{10.0 + f, 20, 30, 30};
        gt.annotations.push_back({1, f, 1, 1, b});
        pred.records.push_back({1, f, f < 2 ? 1 : 2, 1, b, 1.0});
    }
    const auto r = compute_teta(gt, pred).splits.all;
    const bool ok = std::abs(r.loca - 100) < 1e-9 && std::abs(r.clsa - 100) < 1e-9 && std::abs(r.assa - 50) < 1e-9 &&
                    std::abs(r.teta - 83.33) <= 0.01;
    const auto d = fmt("LocA %.2f ClsA %.2f AssA %.2f TETA %.2f", r.loca, r.clsa, r.assa, r.teta);
    return ok ? pass(d) : fail(d);
}

Verdict assignment_oracle()
{
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> dim(1, 8);
    std::uniform_real_distribution<double> u(-1.0, 2.0);
    std::uniform_int_distribution<int> small(0, 3);
    for (int i = 0; i < 500; ++i) {
        const int r = dim(rng), c = dim(rng);
        ScoreMatrix m(r, c);
        const bool integer = i % 3 == 0;  // exact ties
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < c; ++b) m(a, b) = integer ? small(rng) : u(rng);
        const auto got = hungarian_assign(m);
        const auto best = oracle::brute_force_assignment(m);
        if (assignment_total(m, got) != best.total && std::abs(assignment_total(m, got) - best.total) > 1e-12) {
            return fail(fmt("matrix %d (%dx%d): total %.17g vs brute force %.17g", i, r, c, assignment_total(m, got),
                            best.total));
        }
        if (integer && got != best.pairs) return fail(fmt("matrix %d: tie broken differently", i));
    }
    return pass("500 matrices up to 8x8 agree with exhaustive search");
}

Verdict score_spot_checks()
{
    const double e = std::exp(1.0);
    const double sbi1 = 0.5 * (e / (e + 1) + 1), sbi2 = 0.5 * (1 / (e + 1) + 1);
    EmbeddingMatrix t(1, 2), d(2, 2);
    t << 1, 0;
    d << 1, 0, 0, 1;
    const auto s = kernels::appearance_scores(t, d, kernels::Execution::Serial);
    const auto app = appearance_score_matrix(t, d);
    const std::vector<BBox> pred{{0, 0, 12, 12}}, det{{4, 0, 12, 12}};  // IoU 8/16 = 0.5
    Eigen::MatrixXd a1(1, 1);
    a1 << app(0, 0);
    const double fused = fused_score_matrix(a1, pred, det, 0.03, TrackerMode::Fused)(0, 0);

    EmbeddingMatrix one(1, 3);
    one << 0.2, -1, 4;
    const double singleton = appearance_score_matrix(one, one)(0, 0);

    const double dev = std::max({std::abs(s.bi_softmax(0, 0) - sbi1), std::abs(s.bi_softmax(0, 1) - sbi2),
                                 std::abs(app(0, 0) - 1.8655292893150024), std::abs(app(0, 1) - 1.1344707106849976),
                                 std::abs(fused - 1.8245634106355522), std::abs(singleton - 2.0)});
    const auto detail = fmt("D_app %.4f / %.4f, fused %.4f, max deviation %.2g", app(0, 0), app(0, 1), fused, dev);
    return dev < 1e-6 ? pass(detail) : fail(detail);
}

// Pred id -> GT id must be a bijection on the matched records.
bool identities_recovered(const AnnotationSet& gt, const TrackResult& pred, std::size_t& matched)
{
    std::map<int, std::vector<GtAnnotation>> gt_frames;
    for (const auto& a : gt.annotations) gt_frames[a.frame_index].push_back(a);
    std::map<int, std::vector<TrackRecord>> pred_frames;
    for (const auto& r : pred.records) pred_frames[r.frame_index].push_back(r);
    std::map<TrackId, TrackId> p2g, g2p;
    matched = 0;
    for (const auto& [f, g] : gt_frames) {
        const auto m = match_localization(g, pred_frames[f], 0.5);
        for (const auto& x : m.matches) {
            ++matched;
            auto [a, ia] = p2g.emplace(x.pred_track_id, x.gt_track_id);
            auto [b, ib] = g2p.emplace(x.gt_track_id, x.pred_track_id);
            if (a->second != x.gt_track_id || b->second != x.pred_track_id) return false;
        }
    }
    return true;
}

Verdict tracker_recovery()
{
    const TrackerMode modes[] = {TrackerMode::Fused, TrackerMode::AppearanceOnly, TrackerMode::MotionOnly};
    std::size_t matched_total = 0, gt_total = 0;
    for (int seed = 0; seed < 20; ++seed) {
        SynthConfig c;
        c.seed = static_cast<std::uint64_t>(seed);
        const auto s = generate_scenario(c);
        for (auto mode : modes) {
            TrackerConfig tc;
            tc.mode = mode;
            std::size_t matched = 0;
            if (!identities_recovered(s.annotations, run_tracker(s.detections, tc), matched)) {
                return fail(fmt("noiseless seed %d, mode %s: identity switch", seed, std::string(to_string(mode)).c_str()));
            }
            matched_total += matched;
            gt_total += s.annotations.annotations.size();
        }
    }
    int wins = 0;
    std::string losses;
    for (int seed = 0; seed < 20; ++seed) {
        SynthConfig c;
        c.seed = static_cast<std::uint64_t>(seed);
        c.box_noise_std = 2.0;
        c.embedding_noise_std = 0.05;
        c.detection_drop_rate = 0.05;
        const auto s = generate_scenario(c);
        double assa[3];
        for (int m = 0; m < 3; ++m) {
            TrackerConfig tc;
            tc.mode = modes[m];
            assa[m] = compute_teta(s.annotations, run_tracker(s.detections, tc)).splits.all.assa;
        }
        if (assa[0] >= assa[1] && assa[0] >= assa[2]) {
            ++wins;
        } else {
            losses += fmt(" %d(%.1f/%.1f/%.1f)", seed, assa[0], assa[1], assa[2]);
        }
    }
    const auto detail = fmt("noiseless: 0 switches in 60 runs (%zu/%zu boxes matched); noisy: fused best on %d/20",
                            matched_total, gt_total, wins) + (losses.empty() ? "" : "; lost on" + losses);
    return wins >= 15 ? pass(detail) : fail(detail);
}

Verdict kalman_property()
{
    double err10 = 0.0;
    auto s = kf_init({100, 200, 40, 80});
    for (int t = 1; t <= 10; ++t) {
        const BBox truth{100.0 + 4.0 * t, 200.0 - 1.5 * t, 40, 80};
        const auto p = kf_predict(s);
        err10 = std::hypot(p.box.cx() - truth.cx(), p.box.cy() - truth.cy());
        s = kf_update(p.state, truth);
    }
    if (!(err10 < 1.0)) return fail(fmt("prediction error at frame 10 is %.3f px", err10));

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> pos(0, 1500), size(2, 400);
    s = kf_init({10, 10, 30, 60});
    double min_eig = INFINITY;
    for (int i = 0; i < 1000; ++i) {
        s = kf_update(kf_predict(s).state, {pos(rng), pos(rng), size(rng), size(rng)});
        const double asym = (s.covariance - s.covariance.transpose()).cwiseAbs().maxCoeff();
        Eigen::SelfAdjointEigenSolver<StateCovariance> eig(s.covariance);
        min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
        if (asym > 1e-9 || !(min_eig > 0)) return fail(fmt("cycle %d: asymmetry %.2g, min eigenvalue %.2g", i, asym, min_eig));
    }
    return pass(fmt("error at frame 10 %.3f px; min eigenvalue over 1000 cycles %.3g", err10, min_eig));
}

Verdict ingestion_round_trip()
{
    const VideoMeta seq{1, "MOT17-02", 1920, 1080, 6, 30, 30};
    const auto mot = convert_motchallenge(
        "1,1,10,20,30,40,1,-1,-1,-1\n2,1,12,20,30,40,1,-1,-1,-1\n5,1,20,20,30,40,1,-1,-1,-1\n"
        "1,2,500,500,60,120,1,1,1,0.4\n2,2,505,500,60,120,0,1,1,0.4\n",
        seq, {1, "pedestrian"});

    SynonymMap syn;
    syn.add("couch", {"sofa"});
    syn.add("cat", {});
    syn.add("airplane", {"n02691156"});
    const auto coco = convert_cocovid(R"({
      "videos": [{"id": 3, "name": "clip", "width": 640, "height": 360, "length": 6}],
      "categories": [{"id": 1, "name": "sofa"}, {"id": 2, "name": "couch"}, {"id": 5, "name": "cat"}],
      "annotations": [
        {"id": 10, "video_id": 3, "category_id": 1, "bboxes": [null, [1,2,3,4], null, [2,3,4,5], null, null]},
        {"id": 11, "video_id": 3, "category_id": 2, "bboxes": [[5,5,5,5], [6,6,5,5], [7,7,5,5], null, null, null]},
        {"id": 12, "video_id": 3, "category_id": 5, "bboxes": [[9,9,9,9], null, null, null, null, [9,9,9,9]]}]})",
                                      &syn);
    const auto vid = convert_imagenet_vid({7, "ILSVRC2015_val_00000001", 500, 375, 4, 30, 30},
                                          {{0, {{0, "n02691156", 10, 40, 20, 60}, {1, "n02691156", 100, 180, 50, 90}}},
                                           {1, {{0, "n02691156", 12, 42, 20, 60}}},
                                           {3, {{0, "n02691156", 16, 46, 20, 60}, {1, "n02691156", 104, 184, 50, 90}}}},
                                          syn);
    int n = 0;
    for (const auto* c : {&mot, &coco, &vid}) {
        const auto& set = c->annotations;
        const char* name[] = {"motchallenge", "cocovid", "imagenetvid"};
        if (!validate_annotation_set(set).ok()) return fail(std::string(name[n]) + ": output fails validation");
        if (parse_annotations(serialize_annotations(set)) != set) return fail(std::string(name[n]) + ": round trip differs");
        const auto norm = normalize_occlusions(set);
        if (!validate_annotation_set(norm).ok() || normalize_occlusions(norm) != norm) {
            return fail(std::string(name[n]) + ": normalize_occlusions not idempotent");
        }
        const auto merged = merge_categories(norm, syn);
        if (merge_categories(merged, syn) != merged) return fail(std::string(name[n]) + ": merge not idempotent");
        if (parse_annotations(serialize_annotations(merged)) != merged) {
            return fail(std::string(name[n]) + ": merged round trip differs");
        }
        ++n;
    }
    return pass("3 converters validate, round-trip, and normalize/merge idempotently");
}

Verdict dataset_check()
{
    const char* ann = std::getenv("OVTK_OVTB_ANNOTATIONS");
    const char* base = std::getenv("OVTK_OVTB_BASE_CLASSES");
    if (!ann || !std::filesystem::exists(ann)) return {Outcome::Skip, "OVTK_OVTB_ANNOTATIONS not set or file absent"};
    auto set = parse_annotations(read_file(ann));
    const auto s = dataset_summary(set);
    std::string detail = fmt("classes %zu videos %zu tracks %zu boxes %zu (claims: 637,608 and 673K)", s.n_classes,
                             s.n_videos, s.n_tracks, s.n_boxes);
    bool ok = s.n_classes == 1048 && s.n_videos == 1973 && s.n_tracks == 13686;
    if (base && std::filesystem::exists(base)) {
        const auto split = count_splits(split_categories(set.categories, parse_name_list(read_file(base))));
        detail += fmt("; base %zu novel %zu", split.base, split.novel);
        ok = ok && split.base == 534 && split.novel == 514;
    } else {
        detail += "; base list absent, split not checked";
    }
    return ok ? pass(detail) : fail(detail);
}

}  // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        std::function<Verdict()> run;
        double budget_s;  // 0: no runtime bound
    };
    const std::vector<Criterion> criteria{
        {1, "metric identity", metric_identity, 10},
        {2, "AssA formula oracle", metric_formula_oracle, 0},
        {3, "metric monotonicity", metric_monotonicity, 30},
        {4, "id-switch fixture", derived_fixture, 0},
        {5, "assignment oracle", assignment_oracle, 5},
        {6, "score spot checks", score_spot_checks, 0},
        {7, "tracker recovery", tracker_recovery, 0},
        {8, "Kalman properties", kalman_property, 0},
        {9, "ingestion round trip", ingestion_round_trip, 0},
        {10, "OVT-B dataset check", dataset_check, 0},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (v.outcome == Outcome::Pass && c.budget_s > 0 && secs > c.budget_s) {
            v = fail(fmt("took %.2f s, budget %.0f s; ", secs, c.budget_s) + v.detail);
        }
        const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Fail ? "FAIL" : "SKIP";
        std::printf("[%s] %2d %-22s %7.3fs  %s\n", tag, c.id, c.name, secs, v.detail.c_str());
        if (v.outcome == Outcome::Fail) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
