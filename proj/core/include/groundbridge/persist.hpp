#pragma once

// Versioned JSON documents. Every document carries "format" and "version";
// readers accept any 1.x version and refuse newer major versions. Doubles are
// written in shortest round-trip form, so finite values reload bit-exactly.

#include <filesystem>
#include <string>

#include "groundbridge/bridge.hpp"
#include "groundbridge/curriculum.hpp"
#include "groundbridge/encoder.hpp"
#include "groundbridge/objindex.hpp"

namespace groundbridge {

inline constexpr const char* kFormatVersion = "1.0";

std::string params_to_json(const EncoderParams& params);
EncoderParams params_from_json(const std::string& text);
void save_params(const std::filesystem::path& path, const EncoderParams& params);
EncoderParams load_params(const std::filesystem::path& path);

std::string map_to_json(const AffineMap& map);
AffineMap map_from_json(const std::string& text);
void save_map(const std::filesystem::path& path, const AffineMap& map);
AffineMap load_map(const std::filesystem::path& path);

std::string index_to_json(const ObjectIndex& index);
ObjectIndex index_from_json(const std::string& text);
void save_index(const std::filesystem::path& path, const ObjectIndex& index);
ObjectIndex load_index(const std::filesystem::path& path);

// Curriculum snapshots (per-stage evaluations and the final transformed
// points); stage maps are not included.
std::string run_to_json(const CurriculumRun& run);
CurriculumRun run_from_json(const std::string& text);
void save_run(const std::filesystem::path& path, const CurriculumRun& run);
CurriculumRun load_run(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace groundbridge
