#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ovtk/data_model.hpp"

namespace ovtk {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Parses the TAO-protocol annotation document and validates it.
AnnotationSet parse_annotations(std::string_view document);

/// Structural parse only; run validate_annotation_set on the result.
AnnotationSet parse_annotations_unchecked(std::string_view document);
std::string serialize_annotations(const AnnotationSet& set);

/// Parses a JSON-Lines detection file that holds a single video.
/// When expected_dim is empty the dimension of the first embedding is used.
DetectionSequence parse_detections(std::string_view document,
                                   std::optional<std::size_t> expected_dim = std::nullopt);

/// Multi-video variant: one sequence per video id, in order of first appearance.
/// Frame indices must strictly increase within each video.
std::vector<DetectionSequence> parse_detection_stream(
    std::string_view document, std::optional<std::size_t> expected_dim = std::nullopt);

std::string serialize_detections(const std::vector<DetectionSequence>& sequences);

TrackResult parse_track_result(std::string_view document);
std::string serialize_track_result(const TrackResult& result);

/// Newline-delimited category names; blank lines and surrounding whitespace ignored.
std::set<std::string> parse_name_list(std::string_view document);

}  // namespace ovtk
