#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "rlab/corpus/types.hpp"

namespace rlab::corpus {

// The only export schema: one JSON object per line carrying the ThreadNode
// fields. Blank lines are skipped.
inline constexpr std::string_view kJsonLinesSchema = "jsonl-v1";

std::vector<ThreadNode> ingest_threads(const std::filesystem::path& path,
                                       std::string_view schema = kJsonLinesSchema);
std::vector<ThreadNode> parse_threads(std::string_view contents,
                                      std::string_view schema = kJsonLinesSchema);

std::string thread_node_to_json_line(const ThreadNode& node);

}  // namespace rlab::corpus
