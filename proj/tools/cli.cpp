#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "digest.hpp"
#include "ovtk/association.hpp"
#include "ovtk/convert.hpp"
#include "ovtk/error.hpp"
#include "ovtk/io.hpp"
#include "ovtk/stats.hpp"
#include "ovtk/synth.hpp"
#include "ovtk/teta.hpp"
#include "reports.hpp"

#ifndef OVTK_VERSION
#define OVTK_VERSION "unknown"
#endif

namespace ovtk::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kCommands{"convert", "validate", "stats", "track", "evaluate", "synth", "report"};

struct Shared {
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::string config;
};

// Per-invocation bookkeeping: resolves output paths, records every file read
// or written, and writes the manifest.
class Run {
public:
    Run(std::string command, std::vector<std::string> argv, const Shared& shared, std::ostream& out)
        : command_(std::move(command)), argv_(std::move(argv)), shared_(shared), out_(out),
          start_(std::chrono::steady_clock::now())
    {
    }

    std::ostream& out() { return out_; }
    const Shared& shared() const { return shared_; }

    std::string read(const std::string& path)
    {
        auto text = read_file(path);
        inputs_.push_back({{"path", path}, {"sha256", sha256_hex(text)}, {"bytes", text.size()}});
        return text;
    }

    /// Relative paths land under --out-dir.
    fs::path output_path(const std::string& path) const
    {
        const fs::path p(path);
        return p.is_absolute() ? p : fs::path(shared_.out_dir) / p;
    }

    fs::path write(const std::string& path, const std::string& contents)
    {
        return write_at(output_path(path), contents);
    }

    /// For paths already resolved, e.g. siblings of an earlier output.
    fs::path write_at(const fs::path& p, const std::string& contents)
    {
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        write_file(p, contents);
        outputs_.push_back({{"path", p.string()}, {"sha256", sha256_hex(contents)}, {"bytes", contents.size()}});
        if (primary_.empty()) primary_ = p;
        return p;
    }

    void set_config(json config) { config_ = std::move(config); }

    /// Optional command config: --config, else $OVTK_CONFIG. A file with
    /// top-level sections named after commands contributes only this
    /// command's section.
    std::optional<json> command_config()
    {
        std::string path = shared_.config;
        if (path.empty()) {
            if (const char* env = std::getenv(kConfigEnv); env && *env) path = env;
        }
        if (path.empty()) return std::nullopt;
        json doc;
        try {
            doc = json::parse(read(path));
        } catch (const json::parse_error& e) {
            throw ParseError("config '" + path + "': " + e.what());
        }
        if (!doc.is_object()) throw ParseError("config '" + path + "': top level must be an object");
        const bool sectioned = std::any_of(doc.items().begin(), doc.items().end(), [](const auto& kv) {
            return kCommands.count(kv.key()) && kv.value().is_object();
        });
        if (!sectioned) return doc;
        if (auto it = doc.find(command_); it != doc.end()) return *it;
        return std::nullopt;
    }

    void finish()
    {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        json manifest{{"command", command_},
                      {"argv", argv_},
                      {"config", config_},
                      {"inputs", inputs_},
                      {"outputs", outputs_},
                      {"version", OVTK_VERSION},
                      {"jobs", shared_.jobs},
                      {"seed", shared_.seed ? json(*shared_.seed) : json(nullptr)},
                      {"wall_time_seconds", secs}};
        fs::path where = primary_.empty() ? output_path(command_ + ".json") : primary_;
        where.replace_filename(where.stem().string() + ".manifest.json");
        if (where.has_parent_path()) fs::create_directories(where.parent_path());
        write_file(where, manifest.dump(2) + "\n");
    }

private:
    std::string command_;
    std::vector<std::string> argv_;
    Shared shared_;
    std::ostream& out_;
    std::chrono::steady_clock::time_point start_;
    json config_ = json::object();
    json inputs_ = json::array();
    json outputs_ = json::array();
    fs::path primary_;
};

fs::path stem_sibling(const fs::path& primary, const std::string& suffix)
{
    return primary.parent_path() / (primary.stem().string() + suffix);
}

std::optional<std::set<std::string>> load_base_classes(Run& run, const std::string& path)
{
    if (path.empty()) return std::nullopt;
    return parse_name_list(run.read(path));
}

void print_set_summary(std::ostream& out, const AnnotationSet& set)
{
    const auto r = validate_annotation_set(set);
    out << r.n_videos << " videos, " << r.n_categories << " categories, " << r.n_tracks << " tracks, " << r.n_boxes
        << " boxes, " << r.n_occluded << " occluded records\n";
}

// ---------------------------------------------------------------------------

struct ConvertOpts {
    std::string from;
    std::string input;
    std::string seqinfo;
    std::string category = "pedestrian";
    CategoryId category_id = 1;
    VideoId video_id = 1;
    std::string synonyms;
    std::string source;
    std::string exclude;
    std::string out = "annotations.json";
};

AnnotationSet drop_categories(const AnnotationSet& set, const std::set<std::string>& names)
{
    AnnotationSet out;
    out.videos = set.videos;
    std::set<CategoryId> dropped;
    for (const auto& c : set.categories) {
        if (names.count(c.name)) {
            dropped.insert(c.id);
        } else {
            out.categories.push_back(c);
        }
    }
    for (const auto& a : set.annotations)
        if (!dropped.count(a.category_id)) out.annotations.push_back(a);
    return out;
}

int cmd_convert(Run& run, const ConvertOpts& o)
{
    std::optional<SynonymMap> synonyms;
    if (!o.synonyms.empty()) synonyms = SynonymMap::parse(run.read(o.synonyms));
    run.set_config({{"from", o.from}, {"source", o.source}, {"category", o.category}, {"category_id", o.category_id},
                    {"video_id", o.video_id}, {"synonyms", o.synonyms}, {"exclude", o.exclude}});

    Converted c;
    if (o.from == "motchallenge") {
        if (o.seqinfo.empty()) throw InvalidArgument("--seqinfo is required with --from motchallenge");
        const auto meta = parse_seqinfo(run.read(o.seqinfo), o.video_id);
        c = convert_motchallenge(run.read(o.input), meta, Category{o.category_id, o.category});
        if (synonyms) c.annotations = merge_categories(c.annotations, *synonyms, o.source);
    } else if (o.from == "cocovid") {
        c = convert_cocovid(run.read(o.input), synonyms ? &*synonyms : nullptr, o.source);
    } else {
        if (!synonyms) throw InvalidArgument("--synonyms is required with --from imagenetvid (wnid to name map)");
        c = convert_imagenet_vid_json(run.read(o.input), *synonyms, o.source);
    }
    auto set = normalize_occlusions(c.annotations);
    if (!o.exclude.empty()) set = drop_categories(set, parse_name_list(run.read(o.exclude)));
    require_valid(set);
    run.write(o.out, serialize_annotations(set));
    print_set_summary(run.out(), set);
    if (c.dropped_rows) run.out() << c.dropped_rows << " source rows dropped\n";
    return kExitOk;
}

struct ValidateOpts {
    std::string annotations;
    std::string base_classes;
    std::string out = "validation.json";
};

int cmd_validate(Run& run, const ValidateOpts& o)
{
    auto set = parse_annotations_unchecked(run.read(o.annotations));
    if (auto base = load_base_classes(run, o.base_classes)) set.categories = split_categories(set.categories, *base);
    const auto r = validate_annotation_set(set);
    run.set_config({{"base_classes", o.base_classes}});
    json doc{{"ok", r.ok()},
             {"errors", r.errors},
             {"n_videos", r.n_videos},
             {"n_categories", r.n_categories},
             {"n_tracks", r.n_tracks},
             {"n_records", r.n_records},
             {"n_boxes", r.n_boxes},
             {"n_occluded", r.n_occluded}};
    if (!o.base_classes.empty()) {
        const auto s = count_splits(set.categories);
        doc["splits"] = {{"base", s.base}, {"novel", s.novel}};
    }
    run.write(o.out, doc.dump(2) + "\n");
    if (r.ok()) {
        run.out() << "valid: ";
        print_set_summary(run.out(), set);
        if (doc.contains("splits")) run.out() << "base " << doc["splits"]["base"] << ", novel " << doc["splits"]["novel"] << "\n";
        return kExitOk;
    }
    run.out() << r.errors.size() << " problem(s):\n";
    for (const auto& e : r.errors) run.out() << "  " << e << "\n";
    return kExitUsage;
}

struct StatsOpts {
    std::string annotations;
    std::string base_classes;
    std::string out = "stats.json";
    bool csv = false;
    bool svg = false;
};

int cmd_stats(Run& run, const StatsOpts& o)
{
    auto set = parse_annotations(run.read(o.annotations));
    std::optional<SplitCounts> splits;
    if (auto base = load_base_classes(run, o.base_classes)) {
        set.categories = split_categories(set.categories, *base);
        splits = count_splits(set.categories);
    }
    run.set_config({{"base_classes", o.base_classes}, {"csv", o.csv}, {"svg", o.svg}});
    const auto doc = stats_report_json(dataset_summary(set), attribute_report(set), splits);
    const auto primary = run.write(o.out, doc.dump(2) + "\n");
    if (o.csv) run.write_at(stem_sibling(primary, "_histograms.csv"), histogram_csv(doc));
    if (o.svg) run.write_at(stem_sibling(primary, "_histograms.svg"), histogram_svg(doc));
    run.out() << stats_table(doc);
    return kExitOk;
}

struct TrackOpts {
    std::string detections;
    std::string mode;
    std::string out = "tracks.json";
};

int cmd_track(Run& run, const TrackOpts& o)
{
    TrackerConfig cfg;
    if (auto section = run.command_config()) cfg = parse_tracker_config(section->dump());
    if (!o.mode.empty()) cfg.mode = parse_tracker_mode(o.mode);
    cfg.validate();
    run.set_config(json::parse(serialize_tracker_config(cfg)));

    const auto videos = parse_detection_stream(run.read(o.detections));
    const auto result = run_tracker(videos, cfg, run.shared().jobs);
    run.write(o.out, serialize_track_result(result));
    std::set<std::pair<VideoId, TrackId>> ids;
    for (const auto& r : result.records) ids.insert({r.video_id, r.track_id});
    run.out() << videos.size() << " videos, " << result.records.size() << " records, " << ids.size() << " tracks ("
              << to_string(cfg.mode) << ")\n";
    return kExitOk;
}

struct EvaluateOpts {
    std::string gt;
    std::string pred;
    std::string base_classes;
    std::vector<double> iou_thresholds;
    std::string out = "teta.json";
};

int cmd_evaluate(Run& run, const EvaluateOpts& o)
{
    TetaOptions opts;
    if (auto section = run.command_config()) {
        if (auto it = section->find("iou_thresholds"); it != section->end()) {
            opts.iou_thresholds = it->get<std::vector<double>>();
        }
    }
    if (!o.iou_thresholds.empty()) opts.iou_thresholds = o.iou_thresholds;
    for (double t : opts.iou_thresholds) {
        if (!(t > 0.0 && t <= 1.0)) throw InvalidArgument("IoU thresholds must lie in (0, 1]");
    }
    if (opts.iou_thresholds.empty()) throw InvalidArgument("at least one IoU threshold is required");
    opts.jobs = run.shared().jobs;
    run.set_config({{"iou_thresholds", opts.iou_thresholds}, {"base_classes", o.base_classes}});

    auto gt = parse_annotations(run.read(o.gt));
    if (auto base = load_base_classes(run, o.base_classes)) gt.categories = split_categories(gt.categories, *base);
    const auto pred = parse_track_result(run.read(o.pred));
    const auto doc = teta_report_json(compute_teta(gt, pred, opts));
    const auto primary = run.write(o.out, doc.dump(2) + "\n");
    const auto rows = teta_rows(doc);
    run.write_at(stem_sibling(primary, ".csv"), teta_csv(rows));
    run.out() << teta_table(rows);
    return kExitOk;
}

struct SynthOpts {
    int videos = 1;
    std::string out_ann = "synth_annotations.json";
    std::string out_det = "synth_detections.jsonl";
};

int cmd_synth(Run& run, const SynthOpts& o)
{
    SynthConfig cfg;
    if (auto section = run.command_config()) cfg = parse_synth_config(section->dump());
    if (run.shared().seed) cfg.seed = *run.shared().seed;
    if (o.videos < 1) throw InvalidArgument("--videos must be >= 1");
    cfg.validate();
    auto snapshot = json::parse(serialize_synth_config(cfg));
    snapshot["videos"] = o.videos;
    run.set_config(snapshot);

    AnnotationSet set;
    std::vector<DetectionSequence> dets;
    std::size_t dropped = 0, clutter = 0;
    for (int v = 0; v < o.videos; ++v) {
        SynthConfig c = cfg;
        c.video_id = cfg.video_id + v;
        c.seed = cfg.seed + static_cast<std::uint64_t>(v);
        auto s = generate_scenario(c);
        if (v == 0) set.categories = s.annotations.categories;
        set.videos.insert(set.videos.end(), s.annotations.videos.begin(), s.annotations.videos.end());
        set.annotations.insert(set.annotations.end(), s.annotations.annotations.begin(), s.annotations.annotations.end());
        dets.push_back(std::move(s.detections));
        dropped += s.dropped;
        clutter += s.clutter;
    }
    run.write(o.out_ann, serialize_annotations(set));
    run.write(o.out_det, serialize_detections(dets));
    print_set_summary(run.out(), set);
    run.out() << dropped << " detections dropped, " << clutter << " clutter detections\n";
    return kExitOk;
}

struct ReportOpts {
    std::vector<std::string> inputs;
    std::vector<std::string> names;
    std::string out = "report.csv";
    bool svg = false;
};

int cmd_report(Run& run, const ReportOpts& o)
{
    if (!o.names.empty() && o.names.size() != o.inputs.size()) {
        throw InvalidArgument("--names needs one name per input");
    }
    run.set_config({{"names", o.names}, {"svg", o.svg}});
    std::vector<json> docs;
    std::string schema;
    for (std::size_t i = 0; i < o.inputs.size(); ++i) {
        json doc;
        try {
            doc = json::parse(run.read(o.inputs[i]));
        } catch (const json::parse_error& e) {
            throw ParseError(o.inputs[i] + ": " + e.what());
        }
        const auto s = doc.is_object() ? doc.value("schema", std::string()) : std::string();
        if (s != kTetaSchema && s != kStatsSchema) throw ParseError(o.inputs[i] + ": unrecognised report schema");
        if (i == 0) schema = s;
        if (s != schema) {
            throw ParseError("incompatible report schemas: " + o.inputs[0] + " is " + schema + ", " + o.inputs[i] +
                             " is " + s);
        }
        docs.push_back(std::move(doc));
    }
    auto name_of = [&](std::size_t i) { return o.names.empty() ? fs::path(o.inputs[i]).stem().string() : o.names[i]; };

    if (schema == kTetaSchema) {
        struct Method {
            std::string name;
            std::vector<MetricRow> rows;
        };
        std::vector<Method> methods;
        for (std::size_t i = 0; i < docs.size(); ++i) methods.push_back({name_of(i), teta_rows(docs[i])});
        std::stable_sort(methods.begin(), methods.end(),
                         [](const Method& a, const Method& b) { return a.rows[0].values[0] > b.rows[0].values[0]; });
        std::string csv = "method,split,TETA,LocA,AssA,ClsA\n";
        char line[160];
        std::snprintf(line, sizeof line, "%-20s %-6s %6s %6s %6s %6s\n", "method", "split", "TETA", "LocA", "AssA", "ClsA");
        run.out() << line;
        for (const auto& m : methods) {
            for (const auto& r : m.rows) {
                std::snprintf(line, sizeof line, "%s,%s,%.1f,%.1f,%.1f,%.1f\n", m.name.c_str(), r.split.c_str(),
                              r.values[0], r.values[1], r.values[2], r.values[3]);
                csv += line;
                std::snprintf(line, sizeof line, "%-20s %-6s %6.1f %6.1f %6.1f %6.1f\n", m.name.c_str(), r.split.c_str(),
                              r.values[0], r.values[1], r.values[2], r.values[3]);
                run.out() << line;
            }
        }
        run.write(o.out, csv);
        return kExitOk;
    }

    std::string csv = "method," + std::string("group,class,count,proportion\n");
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto body = histogram_csv(docs[i]);
        std::size_t pos = body.find('\n') + 1;  // skip header
        while (pos < body.size()) {
            const auto end = body.find('\n', pos);
            csv += name_of(i) + "," + body.substr(pos, end - pos) + "\n";
            pos = end + 1;
        }
        run.out() << name_of(i) << "\n" << stats_table(docs[i]);
    }
    const auto primary = run.write(o.out, csv);
    if (o.svg) {
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const std::string suffix = docs.size() == 1 ? ".svg" : "_" + name_of(i) + ".svg";
            run.write_at(stem_sibling(primary, suffix), histogram_svg(docs[i]));
        }
    }
    return kExitOk;
}

void add_shared(CLI::App* sub, Shared& s)
{
    sub->add_option("--jobs", s.jobs, "Worker threads for per-video work (0 = all cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", s.seed, "Random seed (synth); recorded in the manifest");
    sub->add_option("--out-dir", s.out_dir, "Directory for relative output paths")->capture_default_str();
    sub->add_option("--config", s.config, std::string("JSON config file; defaults to $") + kConfigEnv);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Open-vocabulary multi-object tracking toolkit", "ovtk"};
    app.set_version_flag("--version", OVTK_VERSION);
    app.require_subcommand(1);

    Shared shared;
    ConvertOpts conv;
    ValidateOpts val;
    StatsOpts st;
    TrackOpts tr;
    EvaluateOpts ev;
    SynthOpts sy;
    ReportOpts rep;

    auto* c = app.add_subcommand("convert", "Convert MOTChallenge, COCO-video or ImageNet-VID annotations");
    c->add_option("--from", conv.from, "Source format")
        ->required()
        ->check(CLI::IsMember({"motchallenge", "cocovid", "imagenetvid"}));
    c->add_option("--input", conv.input, "Source annotation file (gt.txt, COCO-video JSON, or VID JSON)")->required();
    c->add_option("--seqinfo", conv.seqinfo, "MOTChallenge seqinfo.ini");
    c->add_option("--category", conv.category, "Category name for MOTChallenge input")->capture_default_str();
    c->add_option("--category-id", conv.category_id, "Category id for MOTChallenge input")->capture_default_str();
    c->add_option("--video-id", conv.video_id, "Video id for MOTChallenge input")->capture_default_str();
    c->add_option("--synonyms", conv.synonyms, "Synonym map JSON");
    c->add_option("--source", conv.source, "Source dataset name for synonym constraints");
    c->add_option("--exclude", conv.exclude, "Newline-delimited category names to drop");
    c->add_option("--out", conv.out, "Output annotation file")->capture_default_str();
    add_shared(c, shared);

    auto* v = app.add_subcommand("validate", "Check an annotation file against the data model");
    v->add_option("--annotations", val.annotations, "Annotation file")->required();
    v->add_option("--base-classes", val.base_classes, "Newline-delimited base category names");
    v->add_option("--out", val.out, "Validation report")->capture_default_str();
    add_shared(v, shared);

    auto* s = app.add_subcommand("stats", "Dataset statistics and attribute histograms");
    s->add_option("--annotations", st.annotations, "Annotation file")->required();
    s->add_option("--base-classes", st.base_classes, "Newline-delimited base category names");
    s->add_option("--out", st.out, "Statistics report")->capture_default_str();
    s->add_flag("--csv", st.csv, "Also write <out>_histograms.csv");
    s->add_flag("--svg", st.svg, "Also write <out>_histograms.svg");
    add_shared(s, shared);

    auto* t = app.add_subcommand("track", "Run the association engine over a detection file");
    t->add_option("--detections", tr.detections, "Detection JSON Lines file")->required();
    t->add_option("--mode", tr.mode, "Association mode, overrides the config")
        ->check(CLI::IsMember({"fused", "appearance_only", "motion_only"}));
    t->add_option("--out", tr.out, "Track result file")->capture_default_str();
    add_shared(t, shared);

    auto* e = app.add_subcommand("evaluate", "TETA evaluation with base/novel splits");
    e->add_option("--gt", ev.gt, "Ground-truth annotation file")->required();
    e->add_option("--pred", ev.pred, "Track result file")->required();
    e->add_option("--base-classes", ev.base_classes, "Newline-delimited base category names");
    e->add_option("--iou-thresholds", ev.iou_thresholds, "Localization thresholds (default 0.5)")->delimiter(',');
    e->add_option("--out", ev.out, "JSON report; a CSV with the same stem is written beside it")->capture_default_str();
    add_shared(e, shared);

    auto* y = app.add_subcommand("synth", "Generate a synthetic scenario");
    y->add_option("--videos", sy.videos, "Number of videos (ids and seeds count up from the config)")->capture_default_str();
    y->add_option("--out-ann", sy.out_ann, "Ground-truth annotation file")->capture_default_str();
    y->add_option("--out-det", sy.out_det, "Detection JSON Lines file")->capture_default_str();
    add_shared(y, shared);

    auto* r = app.add_subcommand("report", "Combine evaluate or stats reports into tables");
    r->add_option("inputs", rep.inputs, "Report JSON files")->required();
    r->add_option("--names", rep.names, "Row names, one per input (default: file stems)");
    r->add_option("--out", rep.out, "Output CSV")->capture_default_str();
    r->add_flag("--svg", rep.svg, "Write histogram plots for stats reports");
    add_shared(r, shared);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const auto* sub = app.get_subcommands().front();
    Run run(sub->get_name(), args, shared, out);
    try {
        int code = kExitInternal;
        if (sub == c) code = cmd_convert(run, conv);
        if (sub == v) code = cmd_validate(run, val);
        if (sub == s) code = cmd_stats(run, st);
        if (sub == t) code = cmd_track(run, tr);
        if (sub == e) code = cmd_evaluate(run, ev);
        if (sub == y) code = cmd_synth(run, sy);
        if (sub == r) code = cmd_report(run, rep);
        run.finish();
        return code;
    } catch (const Error& ex) {
        err << "ovtk " << sub->get_name() << ": " << ex.what() << "\n";
    } catch (const json::exception& ex) {
        err << "ovtk " << sub->get_name() << ": malformed JSON value: " << ex.what() << "\n";
    } catch (const fs::filesystem_error& ex) {
        err << "ovtk " << sub->get_name() << ": " << ex.what() << "\n";
    } catch (const std::exception& ex) {
        err << "ovtk " << sub->get_name() << ": internal error: " << ex.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}

}  // namespace ovtk::cli
