#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ovtk/data_model.hpp"

namespace ovtk {

/// Category-name unification table.
class SynonymMap {
public:
    struct Constraint {
        std::string name;
        std::string source;
        std::string canonical;
    };

    SynonymMap() = default;

    /// Registers `sources` (and the canonical name itself) under `canonical`.
    /// Throws ConversionError if a source already maps to another canonical.
    void add(const std::string& canonical, const std::set<std::string>& sources);
    /// Source-dataset-specific mapping for a polysemous name; wins over `add`.
    void add_constraint(Constraint c);

    /// Canonical name for `name` as it appears in `source_dataset`, or nullopt
    /// when the map does not know it.
    std::optional<std::string> resolve(const std::string& name, const std::string& source_dataset = {}) const;

    bool empty() const { return canonical_of_.empty() && constraints_.empty(); }

    /// JSON object: canonical -> array of source names, plus an optional
    /// "constraints" array of {name, source, canonical}.
    static SynonymMap parse(std::string_view document);

private:
    std::map<std::string, std::string> canonical_of_;
    std::map<std::pair<std::string, std::string>, std::string> constraints_;
};

/// Converter output plus the number of source rows deliberately skipped.
struct Converted {
    AnnotationSet annotations;
    std::size_t dropped_rows = 0;
};

/// MOTChallenge text rows `frame,id,x,y,w,h,conf,...`, 1-based frames.
/// Rows with conf == 0 are dropped; columns after the 7th are ignored.
Converted convert_motchallenge(std::string_view text, const VideoMeta& meta, const Category& category);

/// Reads `[Sequence]` keys name, imWidth, imHeight, seqLength, frameRate from
/// a MOTChallenge seqinfo.ini.
VideoMeta parse_seqinfo(std::string_view ini, VideoId id = 1);

/// COCO-video document (videos, categories, annotations with per-frame
/// `bboxes`, null marking absence). Interior nulls become occluded records,
/// leading and trailing nulls are trimmed. With a synonym map every category
/// must resolve through it; categories resolving to one name are merged.
Converted convert_cocovid(std::string_view document, const SynonymMap* synonyms = nullptr,
                          const std::string& source_dataset = {});

/// ImageNet-VID style per-frame object records.
struct VidObject {
    TrackId trackid = 0;
    std::string name;  ///< wnid
    double xmin = 0.0;
    double xmax = 0.0;
    double ymin = 0.0;
    double ymax = 0.0;
};

struct VidFrame {
    int frame_index = 0;
    std::vector<VidObject> objects;
};

/// Corner boxes become (x, y, w, h); wnids must resolve through `synonyms`.
/// Throws ConversionError on an inverted box or unmapped wnid.
Converted convert_imagenet_vid(const VideoMeta& meta, const std::vector<VidFrame>& frames,
                               const SynonymMap& synonyms, const std::string& source_dataset = {});

/// JSON form: {"video": {...VideoMeta}, "frames": [{"frame_index", "objects": [...]}]}.
Converted convert_imagenet_vid_json(std::string_view document, const SynonymMap& synonyms,
                                    const std::string& source_dataset = {});

/// Renames categories through `synonyms` (unknown names are kept), collapses
/// categories sharing a canonical name onto the lowest id, and remaps
/// annotations. Throws ConversionError if a track ends up with two categories.
AnnotationSet merge_categories(const AnnotationSet& set, const SynonymMap& synonyms,
                               const std::string& source_dataset = {});

/// Inserts null-box records at every missing annotated frame strictly inside a
/// track's span (annotated frames are spaced by VideoMeta::annotation_stride).
AnnotationSet normalize_occlusions(const AnnotationSet& set);

}  // namespace ovtk
