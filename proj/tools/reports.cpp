#include "reports.hpp"

#include <cstdio>
#include <sstream>

#include "ovtk/error.hpp"

namespace ovtk::cli {

namespace {

const char* const kSplitNames[] = {"All", "Base", "Novel"};
const char* const kMetricNames[] = {"TETA", "LocA", "AssA", "ClsA"};

json split_json(const SplitScores& s)
{
    const auto& c = s.counts;
    return {{"TETA", s.teta},
            {"LocA", s.loca},
            {"AssA", s.assa},
            {"ClsA", s.clsa},
            {"counts", {{"tpl", c.tpl}, {"fpl", c.fpl}, {"fnl", c.fnl}, {"tpc", c.tpc}, {"fpc", c.fpc}, {"fnc", c.fnc}}}};
}

json splits_json(const TetaSplits& s)
{
    return {{"All", split_json(s.all)}, {"Base", split_json(s.base)}, {"Novel", split_json(s.novel)}};
}

std::string fixed(double v, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// Histogram groups in display order: key in the stats document, class labels.
struct Group {
    const char* key;
    std::array<const char*, 3> labels;
};
const Group kGroups[] = {
    {"size", {"large", "medium", "small"}},
    {"shape", {"complex", "intermediate", "normal"}},
    {"length", {"long", "medium", "short"}},
};
const char* const kFlagNames[] = {"occluded_track", "fast_motion", "out_of_view", "shape_change"};

std::array<double, 3> counts_of(const json& stats, const Group& g)
{
    std::array<double, 3> c{};
    const json& h = stats.at("histograms").at(g.key);
    for (std::size_t i = 0; i < 3; ++i) c[i] = h.at(g.labels[i]).get<double>();
    return c;
}

}  // namespace

json teta_report_json(const TetaReport& report)
{
    json per = json::array();
    for (std::size_t i = 0; i < report.per_threshold.size(); ++i) {
        per.push_back({{"iou_threshold", report.iou_thresholds[i]}, {"splits", splits_json(report.per_threshold[i])}});
    }
    return {{"schema", kTetaSchema},
            {"iou_thresholds", report.iou_thresholds},
            {"splits", splits_json(report.splits)},
            {"per_threshold", per}};
}

std::vector<MetricRow> teta_rows(const json& report)
{
    if (!report.is_object() || report.value("schema", std::string()) != kTetaSchema || !report.contains("splits")) {
        throw ParseError("not a TETA report (expected schema " + std::string(kTetaSchema) + ")");
    }
    std::vector<MetricRow> rows;
    for (const char* split : kSplitNames) {
        MetricRow row{split, {}};
        const json& s = report["splits"].at(split);
        for (std::size_t m = 0; m < 4; ++m) row.values[m] = s.at(kMetricNames[m]).get<double>();
        rows.push_back(row);
    }
    return rows;
}

std::string teta_csv(const std::vector<MetricRow>& rows, int decimals)
{
    std::string out = "split,TETA,LocA,AssA,ClsA\n";
    for (const auto& r : rows) {
        out += r.split;
        for (double v : r.values) out += "," + fixed(v, decimals);
        out += "\n";
    }
    return out;
}

std::string teta_table(const std::vector<MetricRow>& rows)
{
    std::ostringstream os;
    char line[128];
    std::snprintf(line, sizeof line, "%-6s %6s %6s %6s %6s\n", "", "TETA", "LocA", "AssA", "ClsA");
    os << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-6s %6.1f %6.1f %6.1f %6.1f\n", r.split.c_str(), r.values[0], r.values[1],
                      r.values[2], r.values[3]);
        os << line;
    }
    return os.str();
}

json stats_report_json(const SummaryStats& s, const AttributeReport& a, const std::optional<SplitCounts>& splits)
{
    json summary{{"n_classes", s.n_classes},
                 {"n_videos", s.n_videos},
                 {"n_tracks", s.n_tracks},
                 {"n_boxes", s.n_boxes},
                 {"n_frames", s.n_frames},
                 {"n_annotated_frames", s.n_annotated_frames},
                 {"resolution", {s.resolution.min, s.resolution.max}},
                 {"duration_seconds", {s.duration_seconds.min, s.duration_seconds.max}},
                 {"objects_per_frame", {s.objects_per_frame.min, s.objects_per_frame.max}},
                 {"ann_fps", {s.ann_fps.min, s.ann_fps.max}}};
    json hist;
    const std::array<std::size_t, 3>* arrays[] = {&a.size, &a.shape, &a.length};
    for (std::size_t g = 0; g < 3; ++g) {
        json h;
        for (std::size_t i = 0; i < 3; ++i) h[kGroups[g].labels[i]] = (*arrays[g])[i];
        hist[kGroups[g].key] = h;
    }
    json attrs{{"n_tracks", a.n_tracks}, {"n_videos", a.n_videos}};
    for (std::size_t f = 0; f < 4; ++f) {
        attrs[kFlagNames[f]] = {{"tracks", a.tracks_with[f]}, {"videos", a.videos_with[f]}};
    }
    json doc{{"schema", kStatsSchema}, {"summary", summary}, {"histograms", hist}, {"attributes", attrs}};
    if (splits) doc["splits"] = {{"base", splits->base}, {"novel", splits->novel}};
    return doc;
}

std::string histogram_csv(const json& stats)
{
    std::string out = "group,class,count,proportion\n";
    for (const auto& g : kGroups) {
        const auto c = counts_of(stats, g);
        const double total = c[0] + c[1] + c[2];
        for (std::size_t i = 0; i < 3; ++i) {
            out += std::string(g.key) + "," + g.labels[i] + "," + fixed(c[i], 0) + "," +
                   fixed(total > 0 ? c[i] / total : 0.0, 6) + "\n";
        }
    }
    const json& attrs = stats.at("attributes");
    const double tracks = attrs.at("n_tracks").get<double>();
    for (const char* f : kFlagNames) {
        const double n = attrs.at(f).at("tracks").get<double>();
        out += std::string("attribute,") + f + "," + fixed(n, 0) + "," + fixed(tracks > 0 ? n / tracks : 0.0, 6) + "\n";
    }
    return out;
}

std::string histogram_svg(const json& stats)
{
    constexpr int panel_w = 220, panel_h = 200, bar_w = 50, top = 30, base_y = 170;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 3 * panel_w << "\" height=\"" << panel_h
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (std::size_t g = 0; g < 3; ++g) {
        const auto c = counts_of(stats, kGroups[g]);
        const double total = c[0] + c[1] + c[2];
        const int x0 = static_cast<int>(g) * panel_w;
        os << "  <text x=\"" << x0 + panel_w / 2 << "\" y=\"18\" text-anchor=\"middle\">" << kGroups[g].key
           << "</text>\n";
        for (std::size_t i = 0; i < 3; ++i) {
            const double p = total > 0 ? c[i] / total : 0.0;
            const int h = static_cast<int>(p * (base_y - top) + 0.5);
            const int x = x0 + 20 + static_cast<int>(i) * (bar_w + 15);
            os << "  <rect x=\"" << x << "\" y=\"" << base_y - h << "\" width=\"" << bar_w << "\" height=\"" << h
               << "\" fill=\"#4a78a8\"/>\n";
            os << "  <text x=\"" << x + bar_w / 2 << "\" y=\"" << base_y - h - 3 << "\" text-anchor=\"middle\">"
               << fixed(100.0 * p, 1) << "%</text>\n";
            os << "  <text x=\"" << x + bar_w / 2 << "\" y=\"" << base_y + 14 << "\" text-anchor=\"middle\">"
               << kGroups[g].labels[i] << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

std::string stats_table(const json& stats)
{
    const json& s = stats.at("summary");
    std::ostringstream os;
    os << "classes " << s["n_classes"] << "  videos " << s["n_videos"] << "  tracks " << s["n_tracks"] << "  boxes "
       << s["n_boxes"] << "  frames " << s["n_frames"] << "\n";
    os << "resolution " << s["resolution"][0] << "-" << s["resolution"][1] << " px  duration "
       << fixed(s["duration_seconds"][0].get<double>(), 1) << "-" << fixed(s["duration_seconds"][1].get<double>(), 1)
       << " s  objects/frame " << s["objects_per_frame"][0] << "-" << s["objects_per_frame"][1] << "  ann fps "
       << fixed(s["ann_fps"][0].get<double>(), 1) << "-" << fixed(s["ann_fps"][1].get<double>(), 1) << "\n";
    if (stats.contains("splits")) {
        os << "base " << stats["splits"]["base"] << "  novel " << stats["splits"]["novel"] << "\n";
    }
    for (const auto& g : kGroups) {
        const auto c = counts_of(stats, g);
        const double total = c[0] + c[1] + c[2];
        os << g.key << ":";
        for (std::size_t i = 0; i < 3; ++i) os << " " << g.labels[i] << " " << fixed(total > 0 ? 100 * c[i] / total : 0, 1) << "%";
        os << "\n";
    }
    return os.str();
}

}  // namespace ovtk::cli
