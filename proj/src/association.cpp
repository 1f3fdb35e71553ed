#include "ovtk/association.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "ovtk/error.hpp"
#include "ovtk/hungarian.hpp"

namespace ovtk {

using nlohmann::json;

std::string_view to_string(TrackerMode mode)
{
    switch (mode) {
        case TrackerMode::Fused: return "fused";
        case TrackerMode::AppearanceOnly: return "appearance_only";
        case TrackerMode::MotionOnly: return "motion_only";
    }
    return "fused";
}

TrackerMode parse_tracker_mode(std::string_view text)
{
    if (text == "fused") return TrackerMode::Fused;
    if (text == "appearance_only") return TrackerMode::AppearanceOnly;
    if (text == "motion_only") return TrackerMode::MotionOnly;
    throw InvalidArgument("unknown tracker mode '" + std::string(text) +
                          "' (expected fused, appearance_only or motion_only)");
}

void TrackerConfig::validate() const
{
    auto unit = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
    };
    unit(w, "w");
    unit(alpha, "alpha");
    unit(init_iou_threshold, "init_iou_threshold");
    unit(occlusion_iou_threshold, "occlusion_iou_threshold");
    if (!std::isfinite(match_threshold)) throw InvalidArgument("match_threshold must be finite");
    if (memory_frames < 0) throw InvalidArgument("memory_frames must be >= 0");
}

TrackerConfig parse_tracker_config(std::string_view document)
{
    json doc;
    try {
        doc = json::parse(document.begin(), document.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("tracker config: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("tracker config: top level must be an object");

    TrackerConfig cfg;
    auto number = [&](const json& obj, const char* key, double& target) {
        if (auto it = obj.find(key); it != obj.end()) {
            if (!it->is_number()) throw ParseError(std::string("tracker config: '") + key + "' must be a number");
            target = it->get<double>();
        }
    };
    number(doc, "w", cfg.w);
    number(doc, "alpha", cfg.alpha);
    number(doc, "match_threshold", cfg.match_threshold);
    number(doc, "init_iou_threshold", cfg.init_iou_threshold);
    number(doc, "occlusion_iou_threshold", cfg.occlusion_iou_threshold);
    if (auto it = doc.find("memory_frames"); it != doc.end()) {
        if (!it->is_number_integer()) throw ParseError("tracker config: 'memory_frames' must be an integer");
        cfg.memory_frames = it->get<int>();
    }
    if (auto it = doc.find("mode"); it != doc.end()) {
        if (!it->is_string()) throw ParseError("tracker config: 'mode' must be a string");
        cfg.mode = parse_tracker_mode(it->get<std::string>());
    }
    if (auto it = doc.find("normalize_embeddings"); it != doc.end()) {
        if (!it->is_boolean()) throw ParseError("tracker config: 'normalize_embeddings' must be a boolean");
        cfg.normalize_embeddings = it->get<bool>();
    }
    if (auto it = doc.find("kalman"); it != doc.end()) {
        if (!it->is_object()) throw ParseError("tracker config: 'kalman' must be an object");
        auto& k = cfg.kalman;
        number(*it, "std_weight_position", k.std_weight_position);
        number(*it, "std_weight_velocity", k.std_weight_velocity);
        number(*it, "std_weight_measurement", k.std_weight_measurement);
        number(*it, "initial_velocity_scale", k.initial_velocity_scale);
        number(*it, "initial_position_scale", k.initial_position_scale);
        number(*it, "aspect_position_std", k.aspect_position_std);
        number(*it, "aspect_velocity_std", k.aspect_velocity_std);
        number(*it, "aspect_measurement_std", k.aspect_measurement_std);
    }
    cfg.validate();
    return cfg;
}

std::string serialize_tracker_config(const TrackerConfig& c)
{
    json doc = {{"w", c.w},
                {"alpha", c.alpha},
                {"match_threshold", c.match_threshold},
                {"init_iou_threshold", c.init_iou_threshold},
                {"memory_frames", c.memory_frames},
                {"occlusion_iou_threshold", c.occlusion_iou_threshold},
                {"mode", std::string(to_string(c.mode))},
                {"normalize_embeddings", c.normalize_embeddings},
                {"kalman",
                 {{"std_weight_position", c.kalman.std_weight_position},
                  {"std_weight_velocity", c.kalman.std_weight_velocity},
                  {"std_weight_measurement", c.kalman.std_weight_measurement},
                  {"initial_velocity_scale", c.kalman.initial_velocity_scale},
                  {"initial_position_scale", c.kalman.initial_position_scale},
                  {"aspect_position_std", c.kalman.aspect_position_std},
                  {"aspect_velocity_std", c.kalman.aspect_velocity_std},
                  {"aspect_measurement_std", c.kalman.aspect_measurement_std}}}};
    return doc.dump(2) + "\n";
}

std::vector<std::size_t> occlusion_prefilter(std::span<const Detection> dets, double threshold)
{
    struct Overlap {
        double iou;
        std::size_t a;
        std::size_t b;
    };
    std::vector<Overlap> overlaps;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        for (std::size_t j = i + 1; j < dets.size(); ++j) {
            const double v = iou(dets[i].bbox, dets[j].bbox);
            if (v > threshold) overlaps.push_back({v, i, j});
        }
    }
    std::stable_sort(overlaps.begin(), overlaps.end(),
                     [](const Overlap& l, const Overlap& r) { return l.iou > r.iou; });

    std::vector<char> alive(dets.size(), 1);
    for (const auto& o : overlaps) {
        if (!alive[o.a] || !alive[o.b]) continue;
        // Ties in confidence drop the later detection.
        const bool drop_a = dets[o.a].score < dets[o.b].score;
        alive[drop_a ? o.a : o.b] = 0;
    }
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (alive[i]) kept.push_back(i);
    }
    return kept;
}

Eigen::MatrixXd appearance_score_matrix(const EmbeddingMatrix& tracks, const EmbeddingMatrix& dets,
                                        kernels::Execution exec)
{
    return kernels::appearance_scores(tracks, dets, exec).combined;
}

Eigen::MatrixXd fused_score_matrix(const Eigen::MatrixXd& app, std::span<const BBox> predicted,
                                   std::span<const BBox> detected, double w, TrackerMode mode,
                                   kernels::Execution exec)
{
    if (mode == TrackerMode::AppearanceOnly) return app;
    Eigen::MatrixXd motion = kernels::iou_matrix(predicted, detected, exec);
    if (mode == TrackerMode::MotionOnly) return motion;
    if (app.rows() != motion.rows() || app.cols() != motion.cols()) {
        throw InvalidArgument("fused_score_matrix: appearance and motion matrices differ in shape");
    }
    return (1.0 - w) * app + w * motion;
}

std::vector<double> update_embedding(std::span<const double> previous, std::span<const double> observed,
                                     double alpha)
{
    if (previous.size() != observed.size()) {
        throw InvalidArgument("update_embedding: dimensions differ (" + std::to_string(previous.size()) + " vs " +
                              std::to_string(observed.size()) + ")");
    }
    std::vector<double> out(previous.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * previous[i] + (1.0 - alpha) * observed[i];
    return out;
}

namespace {

std::vector<double> entry_embedding(const Detection& d, bool normalize)
{
    if (!normalize) return d.embedding;
    double n = 0.0;
    for (double v : d.embedding) n += v * v;
    n = std::sqrt(n);
    std::vector<double> out = d.embedding;
    if (n > 0.0) {
        for (double& v : out) v /= n;
    }
    return out;
}

EmbeddingMatrix stack(const std::vector<const std::vector<double>*>& rows)
{
    const auto dim = rows.empty() ? 0 : rows.front()->size();
    EmbeddingMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i]->size() != dim) {
            throw InvalidArgument("embedding dimension mismatch: " + std::to_string(rows[i]->size()) + " vs " +
                                  std::to_string(dim));
        }
        for (std::size_t k = 0; k < dim; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = (*rows[i])[k];
    }
    return m;
}

void vote(ActiveTrack& track, CategoryId category, int frame_index)
{
    auto& [count, last_seen] = track.votes[category];
    ++count;
    last_seen = frame_index;
    CategoryId best = category;
    std::pair<int, int> best_key{count, last_seen};
    for (const auto& [id, key] : track.votes) {
        if (key > best_key) {
            best = id;
            best_key = key;
        }
    }
    track.category_id = best;
}

}  // namespace

std::vector<TrackOutput> advance_tracker(TrackerState& state, const DetectionFrame& frame)
{
    if (frame.frame_index <= state.frame_cursor) {
        throw InvalidArgument("frame " + std::to_string(frame.frame_index) + " does not follow frame " +
                              std::to_string(state.frame_cursor));
    }
    const TrackerConfig& cfg = state.config;
    const bool uses_appearance = cfg.mode != TrackerMode::MotionOnly;
    state.frame_cursor = frame.frame_index;

    // (1) occlusion filter
    const auto kept = occlusion_prefilter(frame.detections, cfg.occlusion_iou_threshold);
    std::vector<const Detection*> dets;
    dets.reserve(kept.size());
    for (auto i : kept) {
        if (!frame.detections[i].bbox.valid()) {
            throw InvalidArgument("frame " + std::to_string(frame.frame_index) + ": detection " +
                                  std::to_string(i) + " has an invalid box");
        }
        dets.push_back(&frame.detections[i]);
    }
    std::vector<std::vector<double>> det_embeddings;
    if (uses_appearance) {
        det_embeddings.reserve(dets.size());
        for (const auto* d : dets) det_embeddings.push_back(entry_embedding(*d, cfg.normalize_embeddings));
    }
    std::vector<BBox> det_boxes;
    det_boxes.reserve(dets.size());
    for (const auto* d : dets) det_boxes.push_back(d->bbox);

    // (2) motion prediction for every live track
    std::vector<BBox> predicted;
    predicted.reserve(state.tracks.size());
    for (auto& t : state.tracks) {
        auto p = kf_predict(t.kalman, cfg.kalman);
        t.kalman = p.state;
        predicted.push_back(p.box);
    }

    std::vector<TrackOutput> outputs;
    std::vector<char> det_matched(dets.size(), 0);

    // (3)-(5) score, assign, accept
    if (!state.tracks.empty() && !dets.empty()) {
        Eigen::MatrixXd app;
        if (uses_appearance) {
            std::vector<const std::vector<double>*> track_rows, det_rows;
            for (const auto& t : state.tracks) track_rows.push_back(&t.embedding);
            for (const auto& e : det_embeddings) det_rows.push_back(&e);
            app = appearance_score_matrix(stack(track_rows), stack(det_rows), cfg.execution);
        }
        const Eigen::MatrixXd scores = fused_score_matrix(app, predicted, det_boxes, cfg.w, cfg.mode, cfg.execution);
        for (const auto& [ti, di] : hungarian_assign(scores)) {
            const auto r = static_cast<Eigen::Index>(ti);
            const auto c = static_cast<Eigen::Index>(di);
            if (!(scores(r, c) >= cfg.match_threshold)) continue;
            auto& track = state.tracks[ti];
            const Detection& det = *dets[di];
            track.kalman = kf_update(track.kalman, det.bbox, cfg.kalman);
            if (uses_appearance) track.embedding = update_embedding(track.embedding, det_embeddings[di], cfg.alpha);
            track.last_matched_frame = frame.frame_index;
            track.history.emplace_back(frame.frame_index, det.bbox);
            vote(track, det.assigned_category, frame.frame_index);
            det_matched[di] = 1;
            outputs.push_back({track.track_id, track.category_id, det.bbox, det.score});
        }
    }

    // (6) unmatched detections start tracks when clear of every prediction
    std::vector<ActiveTrack> born;
    for (std::size_t di = 0; di < dets.size(); ++di) {
        if (det_matched[di]) continue;
        double max_overlap = 0.0;
        for (const auto& p : predicted) max_overlap = std::max(max_overlap, iou(p, det_boxes[di]));
        if (!(max_overlap < cfg.init_iou_threshold)) continue;
        ActiveTrack t;
        t.track_id = state.next_id++;
        if (uses_appearance) t.embedding = det_embeddings[di];
        t.kalman = kf_init(det_boxes[di], cfg.kalman);
        t.last_matched_frame = frame.frame_index;
        t.history.emplace_back(frame.frame_index, det_boxes[di]);
        vote(t, dets[di]->assigned_category, frame.frame_index);
        outputs.push_back({t.track_id, t.category_id, det_boxes[di], dets[di]->score});
        born.push_back(std::move(t));
    }

    // (7) retire stale tracks
    std::erase_if(state.tracks, [&](const ActiveTrack& t) {
        return frame.frame_index - t.last_matched_frame > cfg.memory_frames;
    });
    for (auto& t : born) state.tracks.push_back(std::move(t));

    std::sort(outputs.begin(), outputs.end(),
              [](const TrackOutput& a, const TrackOutput& b) { return a.track_id < b.track_id; });
    return outputs;
}

StepResult step_tracker(TrackerState state, const DetectionFrame& frame)
{
    auto outputs = advance_tracker(state, frame);
    return {std::move(state), std::move(outputs)};
}

TrackResult run_tracker(const DetectionSequence& dets, const TrackerConfig& config)
{
    config.validate();
    TrackerState state;
    state.config = config;
    TrackResult result;
    for (const auto& frame : dets.frames) {
        for (const auto& o : advance_tracker(state, frame)) {
            result.records.push_back({dets.video_id, frame.frame_index, o.track_id, o.category_id, o.bbox, o.score});
        }
    }
    return result;
}

TrackResult run_tracker(std::span<const DetectionSequence> videos, const TrackerConfig& config, int jobs)
{
    config.validate();
    std::vector<std::size_t> order(videos.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return videos[a].video_id < videos[b].video_id; });

    std::vector<TrackResult> per_video(videos.size());
    std::vector<std::string> failures(videos.size());
    const long n = static_cast<long>(videos.size());
#ifdef _OPENMP
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (long i = 0; i < n; ++i) {
        try {
            per_video[static_cast<std::size_t>(i)] = run_tracker(videos[order[static_cast<std::size_t>(i)]], config);
        } catch (const std::exception& e) {
            failures[static_cast<std::size_t>(i)] = e.what();
        }
    }
    (void)jobs;

    TrackResult merged;
    for (std::size_t i = 0; i < per_video.size(); ++i) {
        if (!failures[i].empty()) {
            throw InvalidArgument("video " + std::to_string(videos[order[i]].video_id) + ": " + failures[i]);
        }
        auto& recs = per_video[i].records;
        merged.records.insert(merged.records.end(), recs.begin(), recs.end());
    }
    return merged;
}

}  // namespace ovtk
