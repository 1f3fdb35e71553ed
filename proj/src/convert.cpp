#include "ovtk/convert.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "ovtk/error.hpp"

namespace ovtk {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, const std::string& what)
{
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(what + ": " + e.what());
    }
}

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& field, std::size_t line_no)
{
    double v = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ParseError("line " + std::to_string(line_no) + ": '" + field + "' is not a number");
    }
    return v;
}

long long to_integer(const std::string& field, std::size_t line_no)
{
    const double v = to_double(field, line_no);
    if (v != std::floor(v)) {
        throw ParseError("line " + std::to_string(line_no) + ": '" + field + "' is not an integer");
    }
    return static_cast<long long>(v);
}

/// Canonical name per source category, collapsing duplicates onto the lowest id.
struct CategoryRemap {
    std::vector<Category> categories;
    std::unordered_map<CategoryId, CategoryId> id_map;
};

CategoryRemap remap_categories(const std::vector<Category>& source,
                               const std::function<std::optional<std::string>(const Category&)>& rename)
{
    std::vector<Category> sorted = source;
    std::sort(sorted.begin(), sorted.end(), [](const Category& a, const Category& b) { return a.id < b.id; });

    CategoryRemap out;
    std::map<std::string, CategoryId> by_name;
    std::vector<std::string> unknown;
    for (const auto& c : sorted) {
        auto name = rename(c);
        if (!name) {
            unknown.push_back(c.name);
            continue;
        }
        auto [it, inserted] = by_name.emplace(*name, c.id);
        if (inserted) out.categories.push_back(Category{c.id, *name, c.split});
        out.id_map[c.id] = it->second;
    }
    if (!unknown.empty()) {
        std::string msg = "no synonym mapping for categor" + std::string(unknown.size() == 1 ? "y" : "ies") + ": ";
        for (std::size_t i = 0; i < unknown.size(); ++i) msg += (i ? ", '" : "'") + unknown[i] + "'";
        throw ConversionError(msg);
    }
    return out;
}

template <typename T>
T json_number(const json& obj, const char* key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) {
        throw ParseError(where + ": missing or non-numeric '" + key + "'");
    }
    return it->get<T>();
}

template <typename T>
T json_number_or(const json& obj, const char* key, T fallback)
{
    auto it = obj.find(key);
    return it != obj.end() && it->is_number() ? it->get<T>() : fallback;
}

VideoMeta parse_video_meta(const json& v, const std::string& where)
{
    VideoMeta meta;
    meta.id = json_number<VideoId>(v, "id", where);
    if (auto it = v.find("name"); it != v.end() && it->is_string()) {
        meta.name = it->get<std::string>();
    } else if (auto files = v.find("file_names"); files != v.end() && files->is_array() && !files->empty() &&
                                                  files->front().is_string()) {
        const auto first = files->front().get<std::string>();
        meta.name = first.substr(0, first.find('/'));
    } else {
        meta.name = "video_" + std::to_string(meta.id);
    }
    meta.width = json_number<int>(v, "width", where);
    meta.height = json_number<int>(v, "height", where);
    if (v.contains("frame_count")) {
        meta.frame_count = json_number<int>(v, "frame_count", where);
    } else {
        meta.frame_count = json_number<int>(v, "length", where);
    }
    meta.fps = json_number_or<double>(v, "fps", 30.0);
    meta.ann_fps = json_number_or<double>(v, "ann_fps", meta.fps);
    return meta;
}

}  // namespace

void SynonymMap::add(const std::string& canonical, const std::set<std::string>& sources)
{
    auto bind = [&](const std::string& name) {
        auto [it, inserted] = canonical_of_.emplace(name, canonical);
        if (!inserted && it->second != canonical) {
            throw ConversionError("synonym '" + name + "' maps to both '" + it->second + "' and '" + canonical +
                                  "'; add a source constraint to disambiguate");
        }
    };
    bind(canonical);
    for (const auto& s : sources) bind(s);
}

void SynonymMap::add_constraint(Constraint c)
{
    auto key = std::make_pair(c.name, c.source);
    auto [it, inserted] = constraints_.emplace(key, c.canonical);
    if (!inserted && it->second != c.canonical) {
        throw ConversionError("constraint for '" + c.name + "' in '" + c.source + "' is ambiguous");
    }
}

std::optional<std::string> SynonymMap::resolve(const std::string& name, const std::string& source_dataset) const
{
    if (auto it = constraints_.find({name, source_dataset}); it != constraints_.end()) return it->second;
    if (auto it = canonical_of_.find(name); it != canonical_of_.end()) return it->second;
    return std::nullopt;
}

SynonymMap SynonymMap::parse(std::string_view document)
{
    const json doc = parse_json(document, "synonym map");
    if (!doc.is_object()) throw ParseError("synonym map: top level must be an object");
    SynonymMap map;
    for (const auto& [key, value] : doc.items()) {
        if (key == "constraints") continue;
        if (!value.is_array()) throw ParseError("synonym map: '" + key + "' must map to an array of names");
        std::set<std::string> sources;
        for (const auto& s : value) {
            if (!s.is_string()) throw ParseError("synonym map: '" + key + "' lists a non-string name");
            sources.insert(s.get<std::string>());
        }
        map.add(key, sources);
    }
    if (auto it = doc.find("constraints"); it != doc.end()) {
        if (!it->is_array()) throw ParseError("synonym map: 'constraints' must be an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const json& c = (*it)[i];
            const std::string where = "synonym map: constraints[" + std::to_string(i) + "]";
            if (!c.is_object() || !c.contains("name") || !c.contains("source") || !c.contains("canonical") ||
                !c["name"].is_string() || !c["source"].is_string() || !c["canonical"].is_string()) {
                throw ParseError(where + " needs string fields name, source, canonical");
            }
            map.add_constraint({c["name"].get<std::string>(), c["source"].get<std::string>(),
                                c["canonical"].get<std::string>()});
        }
    }
    return map;
}

VideoMeta parse_seqinfo(std::string_view ini, VideoId id)
{
    std::map<std::string, std::string> values;
    std::istringstream in{std::string(ini)};
    std::string line;
    std::string section;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == ';' || line[0] == '#') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || section != "Sequence") continue;
        values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto need = [&](const char* key) -> const std::string& {
        auto it = values.find(key);
        if (it == values.end()) throw ParseError(std::string("seqinfo: missing key '") + key + "'");
        return it->second;
    };
    VideoMeta meta;
    meta.id = id;
    meta.name = need("name");
    try {
        meta.width = std::stoi(need("imWidth"));
        meta.height = std::stoi(need("imHeight"));
        meta.frame_count = std::stoi(need("seqLength"));
        meta.fps = std::stod(need("frameRate"));
    } catch (const std::logic_error&) {
        throw ParseError("seqinfo: non-numeric sequence field");
    }
    meta.ann_fps = meta.fps;
    return meta;
}

Converted convert_motchallenge(std::string_view text, const VideoMeta& meta, const Category& category)
{
    Converted out;
    out.annotations.videos.push_back(meta);
    out.annotations.categories.push_back(category);

    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields;
        std::stringstream row(line);
        std::string field;
        while (std::getline(row, field, ',')) fields.push_back(trim(field));
        if (fields.size() < 7) {
            throw ParseError("line " + std::to_string(line_no) + ": expected at least 7 comma-separated fields, got " +
                             std::to_string(fields.size()));
        }
        const long long frame = to_integer(fields[0], line_no);
        const long long id = to_integer(fields[1], line_no);
        const BBox box{to_double(fields[2], line_no), to_double(fields[3], line_no), to_double(fields[4], line_no),
                       to_double(fields[5], line_no)};
        const double conf = to_double(fields[6], line_no);
        if (frame < 1) throw ParseError("line " + std::to_string(line_no) + ": frames are 1-based");
        if (conf == 0.0) {
            ++out.dropped_rows;
            continue;
        }
        if (!box.valid()) throw ParseError("line " + std::to_string(line_no) + ": box must have positive size");
        out.annotations.annotations.push_back(
            {meta.id, static_cast<int>(frame - 1), static_cast<TrackId>(id), category.id, box});
    }
    require_valid(out.annotations);
    return out;
}

Converted convert_cocovid(std::string_view document, const SynonymMap* synonyms, const std::string& source_dataset)
{
    const json doc = parse_json(document, "cocovid document");
    if (!doc.is_object()) throw ParseError("cocovid document: top level must be an object");
    for (const char* key : {"videos", "categories", "annotations"}) {
        if (!doc.contains(key) || !doc[key].is_array()) {
            throw ParseError(std::string("cocovid document: '") + key + "' must be an array");
        }
    }

    Converted out;
    for (std::size_t i = 0; i < doc["videos"].size(); ++i) {
        out.annotations.videos.push_back(parse_video_meta(doc["videos"][i], "videos[" + std::to_string(i) + "]"));
    }

    std::vector<Category> source_categories;
    for (std::size_t i = 0; i < doc["categories"].size(); ++i) {
        const json& c = doc["categories"][i];
        const std::string where = "categories[" + std::to_string(i) + "]";
        if (!c.contains("name") || !c["name"].is_string()) throw ParseError(where + ": missing 'name'");
        source_categories.push_back(Category{json_number<CategoryId>(c, "id", where), c["name"].get<std::string>()});
    }
    auto remap = remap_categories(source_categories, [&](const Category& c) -> std::optional<std::string> {
        if (!synonyms) return c.name;
        return synonyms->resolve(c.name, source_dataset);
    });
    out.annotations.categories = std::move(remap.categories);

    for (std::size_t i = 0; i < doc["annotations"].size(); ++i) {
        const json& a = doc["annotations"][i];
        const std::string where = "annotations[" + std::to_string(i) + "]";
        const auto track_id = json_number<TrackId>(a, "id", where);
        const auto video_id = json_number<VideoId>(a, "video_id", where);
        const auto source_cat = json_number<CategoryId>(a, "category_id", where);
        auto cat = remap.id_map.find(source_cat);
        if (cat == remap.id_map.end()) {
            throw ConversionError(where + ": unknown category_id " + std::to_string(source_cat));
        }
        if (!a.contains("bboxes") || !a["bboxes"].is_array()) throw ParseError(where + ": missing 'bboxes' array");
        const json& boxes = a["bboxes"];

        long first = -1, last = -1;
        for (std::size_t f = 0; f < boxes.size(); ++f) {
            if (!boxes[f].is_null()) {
                if (first < 0) first = static_cast<long>(f);
                last = static_cast<long>(f);
            }
        }
        out.dropped_rows += boxes.size() - (first < 0 ? 0 : static_cast<std::size_t>(last - first + 1));
        if (first < 0) continue;
        for (long f = first; f <= last; ++f) {
            const json& b = boxes[static_cast<std::size_t>(f)];
            GtAnnotation ann{video_id, static_cast<int>(f), track_id, cat->second, std::nullopt};
            if (!b.is_null()) {
                if (!b.is_array() || b.size() != 4 || !std::all_of(b.begin(), b.end(), [](const json& e) { return e.is_number(); })) {
                    throw ParseError(where + ".bboxes[" + std::to_string(f) + "]: expected [x, y, w, h] or null");
                }
                ann.bbox = BBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
            }
            out.annotations.annotations.push_back(ann);
        }
    }
    require_valid(out.annotations);
    return out;
}

Converted convert_imagenet_vid(const VideoMeta& meta, const std::vector<VidFrame>& frames, const SynonymMap& synonyms,
                               const std::string& source_dataset)
{
    Converted out;
    out.annotations.videos.push_back(meta);

    std::set<std::string> unmapped;
    std::set<std::string> canonical_names;
    for (const auto& f : frames) {
        for (const auto& o : f.objects) {
            if (auto name = synonyms.resolve(o.name, source_dataset)) {
                canonical_names.insert(*name);
            } else {
                unmapped.insert(o.name);
            }
        }
    }
    if (!unmapped.empty()) {
        std::string msg = "no synonym mapping for wnid(s): ";
        bool first = true;
        for (const auto& n : unmapped) {
            msg += (first ? "'" : ", '") + n + "'";
            first = false;
        }
        throw ConversionError(msg);
    }

    std::map<std::string, CategoryId> ids;
    for (const auto& name : canonical_names) {
        const auto id = static_cast<CategoryId>(ids.size() + 1);
        ids[name] = id;
        out.annotations.categories.push_back(Category{id, name});
    }

    for (const auto& f : frames) {
        for (const auto& o : f.objects) {
            if (!(o.xmax > o.xmin) || !(o.ymax > o.ymin)) {
                throw ConversionError("frame " + std::to_string(f.frame_index) + ", trackid " +
                                      std::to_string(o.trackid) + ": corner box has xmax <= xmin or ymax <= ymin");
            }
            const BBox box{o.xmin, o.ymin, o.xmax - o.xmin, o.ymax - o.ymin};
            out.annotations.annotations.push_back(
                {meta.id, f.frame_index, o.trackid, ids.at(*synonyms.resolve(o.name, source_dataset)), box});
        }
    }
    require_valid(out.annotations);
    return out;
}

Converted convert_imagenet_vid_json(std::string_view document, const SynonymMap& synonyms,
                                    const std::string& source_dataset)
{
    const json doc = parse_json(document, "imagenet-vid document");
    if (!doc.is_object() || !doc.contains("video") || !doc.contains("frames") || !doc["frames"].is_array()) {
        throw ParseError("imagenet-vid document: expected {\"video\": {...}, \"frames\": [...]}");
    }
    const VideoMeta meta = parse_video_meta(doc["video"], "video");
    std::vector<VidFrame> frames;
    for (std::size_t i = 0; i < doc["frames"].size(); ++i) {
        const json& f = doc["frames"][i];
        const std::string where = "frames[" + std::to_string(i) + "]";
        VidFrame frame;
        frame.frame_index = json_number<int>(f, "frame_index", where);
        if (!f.contains("objects") || !f["objects"].is_array()) throw ParseError(where + ": missing 'objects'");
        for (std::size_t j = 0; j < f["objects"].size(); ++j) {
            const json& o = f["objects"][j];
            const std::string owhere = where + ".objects[" + std::to_string(j) + "]";
            if (!o.contains("name") || !o["name"].is_string()) throw ParseError(owhere + ": missing 'name'");
            frame.objects.push_back({json_number<TrackId>(o, "trackid", owhere), o["name"].get<std::string>(),
                                     json_number<double>(o, "xmin", owhere), json_number<double>(o, "xmax", owhere),
                                     json_number<double>(o, "ymin", owhere), json_number<double>(o, "ymax", owhere)});
        }
        frames.push_back(std::move(frame));
    }
    return convert_imagenet_vid(meta, frames, synonyms, source_dataset);
}

AnnotationSet merge_categories(const AnnotationSet& set, const SynonymMap& synonyms, const std::string& source_dataset)
{
    auto remap = remap_categories(set.categories, [&](const Category& c) -> std::optional<std::string> {
        return synonyms.resolve(c.name, source_dataset).value_or(c.name);
    });

    AnnotationSet out;
    out.videos = set.videos;
    out.categories = std::move(remap.categories);
    out.annotations = set.annotations;
    std::map<std::pair<VideoId, TrackId>, CategoryId> track_category;
    for (auto& a : out.annotations) {
        auto it = remap.id_map.find(a.category_id);
        if (it == remap.id_map.end()) {
            throw ConversionError("annotation references unknown category_id " + std::to_string(a.category_id));
        }
        a.category_id = it->second;
        auto [tc, inserted] = track_category.emplace(std::make_pair(a.video_id, a.track_id), a.category_id);
        if (!inserted && tc->second != a.category_id) {
            throw ConversionError("merge gives track " + std::to_string(a.track_id) + " (video " +
                                  std::to_string(a.video_id) + ") two categories: " + std::to_string(tc->second) +
                                  " and " + std::to_string(a.category_id));
        }
    }
    return out;
}

AnnotationSet normalize_occlusions(const AnnotationSet& set)
{
    std::map<VideoId, int> stride;
    for (const auto& v : set.videos) stride[v.id] = v.annotation_stride();

    struct TrackInfo {
        std::set<int> frames;
        int first = 0;
        int last = -1;
        CategoryId category = 0;
        bool any_box = false;
    };
    std::map<std::pair<VideoId, TrackId>, TrackInfo> tracks;
    for (const auto& a : set.annotations) {
        auto& t = tracks[{a.video_id, a.track_id}];
        t.frames.insert(a.frame_index);
        t.category = a.category_id;
        if (a.bbox) {
            if (!t.any_box || a.frame_index < t.first) t.first = a.frame_index;
            if (!t.any_box || a.frame_index > t.last) t.last = a.frame_index;
            t.any_box = true;
        }
    }

    AnnotationSet out = set;
    bool inserted = false;
    for (const auto& [key, t] : tracks) {
        if (!t.any_box) continue;
        auto sit = stride.find(key.first);
        const int step = sit == stride.end() ? 1 : sit->second;
        for (int f = t.first + step; f < t.last; f += step) {
            if (t.frames.contains(f)) continue;
            out.annotations.push_back({key.first, f, key.second, t.category, std::nullopt});
            inserted = true;
        }
    }
    if (inserted) {
        std::stable_sort(out.annotations.begin(), out.annotations.end(), [](const GtAnnotation& a, const GtAnnotation& b) {
            return std::tie(a.video_id, a.track_id, a.frame_index) < std::tie(b.video_id, b.track_id, b.frame_index);
        });
    }
    return out;
}

}  // namespace ovtk
