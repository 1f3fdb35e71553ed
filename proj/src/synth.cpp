#include "ovtk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include <json.hpp>

#include "ovtk/error.hpp"

namespace ovtk {

using nlohmann::json;

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool bernoulli(Rng& rng, double p)
{
    return p > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

std::vector<double> random_unit(Rng& rng, int dim)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(dim));
    double n = 0.0;
    do {
        n = 0.0;
        for (double& x : v) {
            x = normal(rng);
            n += x * x;
        }
    } while (n == 0.0);
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
}

double distance(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

/// Box trajectory for one track over every frame of the video.
std::vector<BBox> trajectory(Rng& rng, const SynthConfig& cfg)
{
    const double w = uniform(rng, cfg.min_box_size, cfg.max_box_size);
    const double h = uniform(rng, cfg.min_box_size, cfg.max_box_size);
    const double max_x = cfg.image_width - w;
    const double max_y = cfg.image_height - h;
    std::vector<BBox> path(static_cast<std::size_t>(cfg.n_frames));

    if (cfg.motion == MotionModel::ConstantVelocity) {
        const double x0 = uniform(rng, 0.0, max_x), y0 = uniform(rng, 0.0, max_y);
        const double x1 = uniform(rng, 0.0, max_x), y1 = uniform(rng, 0.0, max_y);
        const double denom = std::max(cfg.n_frames - 1, 1);
        for (int f = 0; f < cfg.n_frames; ++f) {
            const double t = f / denom;
            path[static_cast<std::size_t>(f)] = BBox{x0 + (x1 - x0) * t, y0 + (y1 - y0) * t, w, h};
        }
    } else {
        const double bx = uniform(rng, 0.0, max_x), by = uniform(rng, 0.0, max_y);
        const double ax = uniform(rng, 0.0, std::min(bx, max_x - bx));
        const double ay = uniform(rng, 0.0, std::min(by, max_y - by));
        const double period = uniform(rng, 30.0, 120.0);
        const double phase_x = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        const double phase_y = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        for (int f = 0; f < cfg.n_frames; ++f) {
            const double angle = 2.0 * std::numbers::pi * f / period;
            path[static_cast<std::size_t>(f)] =
                BBox{bx + ax * std::sin(angle + phase_x), by + ay * std::sin(angle + phase_y), w, h};
        }
    }
    return path;
}

std::map<CategoryId, double> class_scores_for(Rng& rng, int n_categories, CategoryId truth)
{
    std::map<CategoryId, double> scores;
    for (CategoryId c = 1; c <= n_categories; ++c) {
        scores[c] = c == truth ? uniform(rng, 0.5, 1.0) : uniform(rng, 0.0, 0.45);
    }
    return scores;
}

}  // namespace

void SynthConfig::validate() const
{
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument(std::string(name) + " must lie in [0, 1)");
    };
    if (n_tracks < 0 || n_frames < 1 || n_categories < 1) {
        throw InvalidArgument("n_tracks >= 0, n_frames >= 1 and n_categories >= 1 are required");
    }
    if (image_width < 1 || image_height < 1) throw InvalidArgument("image size must be positive");
    if (!(fps > 0.0)) throw InvalidArgument("fps must be positive");
    if (embedding_dim < 1) throw InvalidArgument("embedding_dim must be >= 1");
    if (!(embedding_separation > 0.0)) throw InvalidArgument("embedding_separation must be positive");
    if (!(box_noise_std >= 0.0) || !(embedding_noise_std >= 0.0)) throw InvalidArgument("noise must be >= 0");
    prob(detection_drop_rate, "detection_drop_rate");
    prob(clutter_rate, "clutter_rate");
    if (!(min_box_size > 0.0) || !(max_box_size >= min_box_size)) {
        throw InvalidArgument("box sizes need 0 < min_box_size <= max_box_size");
    }
    if (max_box_size >= image_width || max_box_size >= image_height) {
        throw InvalidArgument("infeasible scenario: max_box_size " + std::to_string(max_box_size) +
                              " does not fit a " + std::to_string(image_width) + "x" + std::to_string(image_height) +
                              " image");
    }
}

SynthConfig parse_synth_config(std::string_view document)
{
    json doc;
    try {
        doc = json::parse(document.begin(), document.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("synth config: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("synth config: top level must be an object");
    SynthConfig c;
    auto get = [&](const char* key, auto& target) {
        auto it = doc.find(key);
        if (it == doc.end()) return;
        using T = std::decay_t<decltype(target)>;
        if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) throw ParseError(std::string("synth config: '") + key + "' must be a boolean");
        } else {
            if (!it->is_number()) throw ParseError(std::string("synth config: '") + key + "' must be a number");
        }
        target = it->get<T>();
    };
    get("n_tracks", c.n_tracks);
    get("n_frames", c.n_frames);
    get("n_categories", c.n_categories);
    get("image_width", c.image_width);
    get("image_height", c.image_height);
    get("fps", c.fps);
    get("embedding_dim", c.embedding_dim);
    get("embedding_separation", c.embedding_separation);
    get("box_noise_std", c.box_noise_std);
    get("embedding_noise_std", c.embedding_noise_std);
    get("detection_drop_rate", c.detection_drop_rate);
    get("clutter_rate", c.clutter_rate);
    get("min_box_size", c.min_box_size);
    get("max_box_size", c.max_box_size);
    get("full_span", c.full_span);
    get("video_id", c.video_id);
    get("seed", c.seed);
    if (auto it = doc.find("motion"); it != doc.end()) {
        const auto m = it->is_string() ? it->get<std::string>() : std::string();
        if (m == "constant_velocity") {
            c.motion = MotionModel::ConstantVelocity;
        } else if (m == "sinusoidal") {
            c.motion = MotionModel::Sinusoidal;
        } else {
            throw ParseError("synth config: motion must be \"constant_velocity\" or \"sinusoidal\"");
        }
    }
    c.validate();
    return c;
}

std::string serialize_synth_config(const SynthConfig& c)
{
    json doc{{"n_tracks", c.n_tracks},
             {"n_frames", c.n_frames},
             {"n_categories", c.n_categories},
             {"image_width", c.image_width},
             {"image_height", c.image_height},
             {"fps", c.fps},
             {"motion", c.motion == MotionModel::Sinusoidal ? "sinusoidal" : "constant_velocity"},
             {"embedding_dim", c.embedding_dim},
             {"embedding_separation", c.embedding_separation},
             {"box_noise_std", c.box_noise_std},
             {"embedding_noise_std", c.embedding_noise_std},
             {"detection_drop_rate", c.detection_drop_rate},
             {"clutter_rate", c.clutter_rate},
             {"min_box_size", c.min_box_size},
             {"max_box_size", c.max_box_size},
             {"full_span", c.full_span},
             {"video_id", c.video_id},
             {"seed", c.seed}};
    return doc.dump(2);
}

Scenario generate_scenario(const SynthConfig& cfg)
{
    cfg.validate();
    Rng rng(cfg.seed);
    Scenario out;

    VideoMeta meta;
    meta.id = cfg.video_id;
    meta.name = "synth_" + std::to_string(cfg.video_id);
    meta.width = cfg.image_width;
    meta.height = cfg.image_height;
    meta.frame_count = cfg.n_frames;
    meta.fps = cfg.fps;
    meta.ann_fps = cfg.fps;
    out.annotations.videos.push_back(meta);
    for (CategoryId c = 1; c <= cfg.n_categories; ++c) {
        out.annotations.categories.push_back(
            Category{c, "category_" + std::to_string(c), c <= (cfg.n_categories + 1) / 2 ? Split::Base : Split::Novel});
    }

    // Latent embeddings on the unit sphere, rejection-sampled for separation.
    std::vector<std::vector<double>> latent;
    constexpr int kMaxDraws = 20000;
    for (int k = 0; k < cfg.n_tracks; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < kMaxDraws && !placed; ++attempt) {
            auto v = random_unit(rng, cfg.embedding_dim);
            placed = std::all_of(latent.begin(), latent.end(),
                                 [&](const auto& u) { return distance(u, v) >= cfg.embedding_separation; });
            if (placed) latent.push_back(std::move(v));
        }
        if (!placed) {
            throw InvalidArgument("infeasible scenario: cannot place " + std::to_string(cfg.n_tracks) +
                                  " embeddings with separation " + std::to_string(cfg.embedding_separation) +
                                  " in dimension " + std::to_string(cfg.embedding_dim));
        }
    }

    struct TrackPlan {
        TrackId id;
        CategoryId category;
        int first;
        int last;
        std::vector<BBox> path;
    };
    std::vector<TrackPlan> plans;
    for (int k = 0; k < cfg.n_tracks; ++k) {
        TrackPlan p;
        p.id = cfg.video_id * 10000 + k + 1;
        p.category = std::uniform_int_distribution<CategoryId>(1, cfg.n_categories)(rng);
        p.path = trajectory(rng, cfg);
        p.first = 0;
        p.last = cfg.n_frames - 1;
        if (!cfg.full_span && cfg.n_frames > 1) {
            p.first = std::uniform_int_distribution<int>(0, (cfg.n_frames - 1) / 2)(rng);
            p.last = std::uniform_int_distribution<int>(p.first + 1, cfg.n_frames - 1)(rng);
        }
        plans.push_back(std::move(p));
    }

    std::normal_distribution<double> box_noise(0.0, cfg.box_noise_std > 0.0 ? cfg.box_noise_std : 1.0);
    std::normal_distribution<double> emb_noise(0.0, cfg.embedding_noise_std > 0.0 ? cfg.embedding_noise_std : 1.0);

    out.detections.video_id = cfg.video_id;
    for (int f = 0; f < cfg.n_frames; ++f) {
        DetectionFrame frame;
        frame.frame_index = f;
        for (std::size_t k = 0; k < plans.size(); ++k) {
            const auto& p = plans[k];
            if (f < p.first || f > p.last) continue;
            const BBox gt = p.path[static_cast<std::size_t>(f)];
            out.annotations.annotations.push_back({cfg.video_id, f, p.id, p.category, gt});

            if (bernoulli(rng, cfg.detection_drop_rate)) {
                ++out.dropped;
                continue;
            }
            Detection d;
            d.bbox = gt;
            if (cfg.box_noise_std > 0.0) {
                d.bbox.x += box_noise(rng);
                d.bbox.y += box_noise(rng);
                d.bbox.w = std::max(1.0, d.bbox.w + box_noise(rng));
                d.bbox.h = std::max(1.0, d.bbox.h + box_noise(rng));
            }
            d.score = uniform(rng, 0.5, 1.0);
            d.class_scores = class_scores_for(rng, cfg.n_categories, p.category);
            d.assigned_category = argmax_category(*d.class_scores);
            d.embedding = latent[k];
            if (cfg.embedding_noise_std > 0.0) {
                for (double& x : d.embedding) x += emb_noise(rng);
            }
            frame.detections.push_back(std::move(d));
        }
        for (int slot = 0; slot < cfg.n_tracks; ++slot) {
            if (!bernoulli(rng, cfg.clutter_rate)) continue;
            Detection d;
            const double w = uniform(rng, cfg.min_box_size, cfg.max_box_size);
            const double h = uniform(rng, cfg.min_box_size, cfg.max_box_size);
            d.bbox = BBox{uniform(rng, 0.0, cfg.image_width - w), uniform(rng, 0.0, cfg.image_height - h), w, h};
            d.score = uniform(rng, 0.05, 0.5);
            std::map<CategoryId, double> scores;
            for (CategoryId c = 1; c <= cfg.n_categories; ++c) scores[c] = uniform(rng, 0.0, 1.0);
            d.assigned_category = argmax_category(scores);
            d.class_scores = std::move(scores);
            d.embedding = random_unit(rng, cfg.embedding_dim);
            frame.detections.push_back(std::move(d));
            ++out.clutter;
        }
        std::shuffle(frame.detections.begin(), frame.detections.end(), rng);
        out.detections.frames.push_back(std::move(frame));
    }
    return out;
}

Injection inject_errors(const TrackResult& input, const ErrorPlan& plan)
{
    for (double r : {plan.id_switch_rate, plan.class_flip_rate, plan.deletion_rate}) {
        if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument("inject_errors: rates must lie in [0, 1]");
    }
    if (!(plan.box_jitter_std >= 0.0)) throw InvalidArgument("inject_errors: box_jitter_std must be >= 0");

    Injection out;
    out.result = input;
    auto& recs = out.result.records;

    if (plan.id_switch_rate > 0.0) {
        Rng rng(plan.seed ^ 0x9e3779b97f4a7c15ULL);
        std::map<std::pair<VideoId, TrackId>, std::vector<std::size_t>> tracks;
        std::map<VideoId, TrackId> max_id;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            tracks[{recs[i].video_id, recs[i].track_id}].push_back(i);
            auto& m = max_id[recs[i].video_id];
            m = std::max(m, recs[i].track_id);
        }
        for (auto& [key, idx] : tracks) {
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                return recs[a].frame_index < recs[b].frame_index;
            });
            if (idx.size() < 2 || !bernoulli(rng, plan.id_switch_rate)) continue;
            const auto cut = std::uniform_int_distribution<std::size_t>(1, idx.size() - 1)(rng);
            const TrackId fresh = ++max_id[key.first];
            for (std::size_t j = cut; j < idx.size(); ++j) recs[idx[j]].track_id = fresh;
            ++out.id_switches;
        }
    }

    if (plan.class_flip_rate > 0.0) {
        Rng rng(plan.seed ^ 0xc2b2ae3d27d4eb4fULL);
        std::vector<CategoryId> pool = plan.categories;
        if (pool.empty()) {
            std::set<CategoryId> seen;
            for (const auto& r : recs) seen.insert(r.category_id);
            pool.assign(seen.begin(), seen.end());
        }
        for (auto& r : recs) {
            if (!bernoulli(rng, plan.class_flip_rate)) continue;
            std::vector<CategoryId> others;
            for (auto c : pool) {
                if (c != r.category_id) others.push_back(c);
            }
            // With no alternative category available, flip to an id outside the pool.
            r.category_id = others.empty()
                                ? (pool.empty() ? r.category_id : *std::max_element(pool.begin(), pool.end())) + 1
                                : others[std::uniform_int_distribution<std::size_t>(0, others.size() - 1)(rng)];
            ++out.class_flips;
        }
    }

    if (plan.box_jitter_std > 0.0) {
        Rng rng(plan.seed ^ 0x165667b19e3779f9ULL);
        std::normal_distribution<double> noise(0.0, plan.box_jitter_std);
        for (auto& r : recs) {
            r.bbox.x += noise(rng);
            r.bbox.y += noise(rng);
            ++out.jittered;
        }
    }

    if (plan.deletion_rate > 0.0) {
        Rng rng(plan.seed ^ 0x27d4eb2f165667c5ULL);
        std::vector<TrackRecord> kept;
        kept.reserve(recs.size());
        for (const auto& r : recs) {
            if (bernoulli(rng, plan.deletion_rate)) {
                ++out.deletions;
            } else {
                kept.push_back(r);
            }
        }
        recs = std::move(kept);
    }
    return out;
}

TrackResult ground_truth_as_result(const AnnotationSet& set)
{
    TrackResult r;
    for (const auto& a : set.annotations) {
        if (!a.bbox) continue;
        r.records.push_back({a.video_id, a.frame_index, a.track_id, a.category_id, *a.bbox, 1.0});
    }
    return r;
}

}  // namespace ovtk
