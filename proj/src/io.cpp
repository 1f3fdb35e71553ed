#include "ovtk/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "ovtk/error.hpp"

namespace ovtk {

using nlohmann::json;

namespace {

std::string describe(const std::string& where, const std::string& what)
{
    return where + ": " + what;
}

const json& field(const json& obj, const char* key, const std::string& where)
{
    if (!obj.is_object()) throw ParseError(describe(where, "expected an object"));
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(describe(where, std::string("missing key '") + key + "'"));
    return *it;
}

template <typename T>
T get_number(const json& obj, const char* key, const std::string& where)
{
    const json& v = field(obj, key, where);
    if (!v.is_number()) throw ParseError(describe(where + "." + key, "expected a number"));
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ParseError(describe(where + "." + key, "expected an integer"));
    }
    return v.get<T>();
}

std::string get_string(const json& obj, const char* key, const std::string& where)
{
    const json& v = field(obj, key, where);
    if (!v.is_string()) throw ParseError(describe(where + "." + key, "expected a string"));
    return v.get<std::string>();
}

BBox parse_bbox(const json& v, const std::string& where)
{
    if (!v.is_array() || v.size() != 4) throw ParseError(describe(where, "bbox must be [x, y, w, h]"));
    for (const auto& e : v) {
        if (!e.is_number()) throw ParseError(describe(where, "bbox entries must be numbers"));
    }
    return BBox{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
}

json bbox_json(const BBox& b)
{
    return json::array({b.x, b.y, b.w, b.h});
}

json parse_json(std::string_view text, const std::string& what)
{
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(what + ": " + e.what());
    }
}

Detection parse_detection(const json& d, const std::string& where)
{
    Detection det;
    det.bbox = parse_bbox(field(d, "bbox", where), where + ".bbox");
    if (!det.bbox.valid()) throw ParseError(describe(where + ".bbox", "box must be finite with positive size"));
    det.score = get_number<double>(d, "score", where);
    if (!std::isfinite(det.score)) throw ParseError(describe(where + ".score", "score must be finite"));
    auto cs = d.find("class_scores");
    if (cs != d.end() && !cs->is_null()) {
        if (!cs->is_object()) throw ParseError(describe(where + ".class_scores", "expected an object or null"));
        std::map<CategoryId, double> scores;
        for (const auto& [key, value] : cs->items()) {
            CategoryId id = 0;
            try {
                std::size_t used = 0;
                id = std::stoll(key, &used);
                if (used != key.size()) throw std::invalid_argument(key);
            } catch (const std::exception&) {
                throw ParseError(describe(where + ".class_scores", "key '" + key + "' is not a category id"));
            }
            if (!value.is_number()) throw ParseError(describe(where + ".class_scores." + key, "expected a number"));
            scores[id] = value.get<double>();
        }
        det.assigned_category = argmax_category(scores);
        det.class_scores = std::move(scores);
    }
    auto emb = d.find("embedding");
    if (emb != d.end() && !emb->is_null()) {
        if (!emb->is_array()) throw ParseError(describe(where + ".embedding", "expected an array"));
        det.embedding.reserve(emb->size());
        for (const auto& e : *emb) {
            if (!e.is_number()) throw ParseError(describe(where + ".embedding", "entries must be numbers"));
            det.embedding.push_back(e.get<double>());
        }
    }
    return det;
}

}  // namespace

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

AnnotationSet parse_annotations_unchecked(std::string_view document)
{
    const json doc = parse_json(document, "annotation document");
    if (!doc.is_object()) throw ParseError("annotation document: top level must be an object");

    AnnotationSet set;
    const json& videos = field(doc, "videos", "$");
    if (!videos.is_array()) throw ParseError("$.videos: expected an array");
    for (std::size_t i = 0; i < videos.size(); ++i) {
        const std::string where = "$.videos[" + std::to_string(i) + "]";
        const json& v = videos[i];
        VideoMeta meta;
        meta.id = get_number<VideoId>(v, "id", where);
        meta.name = get_string(v, "name", where);
        meta.width = get_number<int>(v, "width", where);
        meta.height = get_number<int>(v, "height", where);
        meta.frame_count = get_number<int>(v, "frame_count", where);
        meta.fps = get_number<double>(v, "fps", where);
        meta.ann_fps = get_number<double>(v, "ann_fps", where);
        set.videos.push_back(std::move(meta));
    }

    const json& categories = field(doc, "categories", "$");
    if (!categories.is_array()) throw ParseError("$.categories: expected an array");
    for (std::size_t i = 0; i < categories.size(); ++i) {
        const std::string where = "$.categories[" + std::to_string(i) + "]";
        const json& c = categories[i];
        Category cat;
        cat.id = get_number<CategoryId>(c, "id", where);
        cat.name = get_string(c, "name", where);
        if (auto it = c.find("split"); it != c.end() && !it->is_null()) {
            const auto s = it->is_string() ? it->get<std::string>() : std::string();
            if (s == "base") {
                cat.split = Split::Base;
            } else if (s == "novel") {
                cat.split = Split::Novel;
            } else {
                throw ParseError(where + ".split: expected \"base\" or \"novel\"");
            }
        }
        set.categories.push_back(std::move(cat));
    }

    const json& annotations = field(doc, "annotations", "$");
    if (!annotations.is_array()) throw ParseError("$.annotations: expected an array");
    set.annotations.reserve(annotations.size());
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        const std::string where = "$.annotations[" + std::to_string(i) + "]";
        const json& a = annotations[i];
        GtAnnotation ann;
        ann.video_id = get_number<VideoId>(a, "video_id", where);
        ann.frame_index = get_number<int>(a, "frame_index", where);
        ann.track_id = get_number<TrackId>(a, "track_id", where);
        ann.category_id = get_number<CategoryId>(a, "category_id", where);
        const json& b = field(a, "bbox", where);
        if (!b.is_null()) ann.bbox = parse_bbox(b, where + ".bbox");
        set.annotations.push_back(ann);
    }
    return set;
}

AnnotationSet parse_annotations(std::string_view document)
{
    auto set = parse_annotations_unchecked(document);
    require_valid(set);
    return set;
}

std::string serialize_annotations(const AnnotationSet& set)
{
    json doc;
    json videos = json::array();
    for (const auto& v : set.videos) {
        videos.push_back({{"id", v.id},
                          {"name", v.name},
                          {"width", v.width},
                          {"height", v.height},
                          {"frame_count", v.frame_count},
                          {"fps", v.fps},
                          {"ann_fps", v.ann_fps}});
    }
    json categories = json::array();
    for (const auto& c : set.categories) {
        categories.push_back({{"id", c.id}, {"name", c.name}, {"split", c.split == Split::Base ? "base" : "novel"}});
    }
    json annotations = json::array();
    for (const auto& a : set.annotations) {
        annotations.push_back({{"video_id", a.video_id},
                               {"frame_index", a.frame_index},
                               {"track_id", a.track_id},
                               {"category_id", a.category_id},
                               {"bbox", a.bbox ? bbox_json(*a.bbox) : json(nullptr)}});
    }
    doc["videos"] = std::move(videos);
    doc["categories"] = std::move(categories);
    doc["annotations"] = std::move(annotations);
    return doc.dump() + "\n";
}

std::vector<DetectionSequence> parse_detection_stream(std::string_view document,
                                                      std::optional<std::size_t> expected_dim)
{
    std::vector<DetectionSequence> sequences;
    std::unordered_map<VideoId, std::size_t> index;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < document.size()) {
        std::size_t end = document.find('\n', pos);
        if (end == std::string_view::npos) end = document.size();
        std::string_view line = document.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        const std::string where = "line " + std::to_string(line_no);
        const json rec = parse_json(line, where);
        const auto video_id = get_number<VideoId>(rec, "video_id", where);
        DetectionFrame frame;
        frame.frame_index = get_number<int>(rec, "frame_index", where);
        const json& dets = field(rec, "detections", where);
        if (!dets.is_array()) throw ParseError(describe(where + ".detections", "expected an array"));
        frame.detections.reserve(dets.size());
        for (std::size_t j = 0; j < dets.size(); ++j) {
            const std::string dwhere = where + ".detections[" + std::to_string(j) + "]";
            Detection det = parse_detection(dets[j], dwhere);
            if (!expected_dim) expected_dim = det.embedding.size();
            if (det.embedding.size() != *expected_dim) {
                throw ParseError(describe(dwhere + ".embedding",
                                          "dimension " + std::to_string(det.embedding.size()) +
                                              " does not match expected " + std::to_string(*expected_dim)));
            }
            frame.detections.push_back(std::move(det));
        }

        auto [it, inserted] = index.emplace(video_id, sequences.size());
        if (inserted) sequences.push_back(DetectionSequence{video_id, {}});
        auto& seq = sequences[it->second];
        if (!seq.frames.empty() && frame.frame_index <= seq.frames.back().frame_index) {
            throw ParseError(describe(where, "frame_index " + std::to_string(frame.frame_index) +
                                                 " does not increase (previous " +
                                                 std::to_string(seq.frames.back().frame_index) +
                                                 ") for video " + std::to_string(video_id)));
        }
        seq.frames.push_back(std::move(frame));
    }
    return sequences;
}

DetectionSequence parse_detections(std::string_view document, std::optional<std::size_t> expected_dim)
{
    auto sequences = parse_detection_stream(document, expected_dim);
    if (sequences.empty()) return {};
    if (sequences.size() > 1) {
        throw ParseError("detection document holds " + std::to_string(sequences.size()) +
                         " videos; expected one");
    }
    return std::move(sequences.front());
}

std::string serialize_detections(const std::vector<DetectionSequence>& sequences)
{
    std::string out;
    for (const auto& seq : sequences) {
        for (const auto& frame : seq.frames) {
            json dets = json::array();
            for (const auto& d : frame.detections) {
                json cs = nullptr;
                if (d.class_scores) {
                    cs = json::object();
                    for (const auto& [id, s] : *d.class_scores) cs[std::to_string(id)] = s;
                }
                dets.push_back({{"bbox", bbox_json(d.bbox)},
                                {"score", d.score},
                                {"class_scores", std::move(cs)},
                                {"embedding", d.embedding}});
            }
            json rec = {{"video_id", seq.video_id},
                        {"frame_index", frame.frame_index},
                        {"detections", std::move(dets)}};
            out += rec.dump();
            out += '\n';
        }
    }
    return out;
}

TrackResult parse_track_result(std::string_view document)
{
    const json doc = parse_json(document, "track result");
    if (!doc.is_array()) throw ParseError("track result: top level must be an array");
    TrackResult result;
    result.records.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::string where = "$[" + std::to_string(i) + "]";
        const json& r = doc[i];
        TrackRecord rec;
        rec.video_id = get_number<VideoId>(r, "video_id", where);
        rec.frame_index = get_number<int>(r, "frame_index", where);
        rec.track_id = get_number<TrackId>(r, "track_id", where);
        rec.category_id = get_number<CategoryId>(r, "category_id", where);
        rec.bbox = parse_bbox(field(r, "bbox", where), where + ".bbox");
        rec.score = get_number<double>(r, "score", where);
        result.records.push_back(rec);
    }
    return result;
}

std::string serialize_track_result(const TrackResult& result)
{
    json doc = json::array();
    for (const auto& r : result.records) {
        doc.push_back({{"video_id", r.video_id},
                       {"frame_index", r.frame_index},
                       {"track_id", r.track_id},
                       {"category_id", r.category_id},
                       {"bbox", bbox_json(r.bbox)},
                       {"score", r.score}});
    }
    return doc.dump() + "\n";
}

std::set<std::string> parse_name_list(std::string_view document)
{
    std::set<std::string> names;
    std::istringstream in{std::string(document)};
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        names.insert(line.substr(first, last - first + 1));
    }
    return names;
}

}  // namespace ovtk
