#include "rlab/corpus/ingest.hpp"

#include <unordered_map>

#include "json.hpp"
#include "rlab/util/error.hpp"
#include "rlab/util/io.hpp"

namespace rlab::corpus {

namespace {

using nlohmann::json;

std::string required_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": field '" + key +
                                       "' missing or not a string");
  }
  return it->get<std::string>();
}

std::int64_t required_int(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": field '" + key +
                                       "' missing or not an integer");
  }
  return it->get<std::int64_t>();
}

ThreadNode parse_node(std::string_view text, std::size_t line) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + e.what());
  }
  if (!obj.is_object()) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": record is not an object");
  }
  ThreadNode node;
  node.id = required_string(obj, "id", line);
  if (node.id.empty()) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": empty id");
  }
  if (auto it = obj.find("parent_id"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line) + ": field 'parent_id' is not a string");
    }
    node.parent_id = it->get<std::string>();
  }
  node.community = required_string(obj, "community", line);
  node.post_title = required_string(obj, "post_title", line);
  node.author = required_string(obj, "author", line);
  node.body = required_string(obj, "body", line);
  node.score = required_int(obj, "score", line);
  node.created_utc = required_int(obj, "created_utc", line);
  return node;
}

}  // namespace

std::vector<ThreadNode> parse_threads(std::string_view contents, std::string_view schema) {
  if (schema != kJsonLinesSchema) {
    throw Error(ErrorCode::kInvalidArgument, "unknown export schema '" + std::string(schema) + "'");
  }
  std::vector<ThreadNode> nodes;
  std::unordered_map<std::string, std::size_t> first_line;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    ThreadNode node = parse_node(line, line_no);
    auto [it, inserted] = first_line.emplace(node.id, line_no);
    if (!inserted) {
      throw Error(ErrorCode::kDuplicate, "duplicate id '" + node.id + "' on line " +
                                             std::to_string(it->second) + " and line " +
                                             std::to_string(line_no));
    }
    nodes.push_back(std::move(node));
  }
  return nodes;
}

std::vector<ThreadNode> ingest_threads(const std::filesystem::path& path, std::string_view schema) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIo, "thread export not found: " + path.string());
  }
  return parse_threads(io::read_file(path), schema);
}

std::string thread_node_to_json_line(const ThreadNode& node) {
  json obj = {{"id", node.id},
              {"community", node.community},
              {"post_title", node.post_title},
              {"author", node.author},
              {"body", node.body},
              {"score", node.score},
              {"created_utc", node.created_utc}};
  obj["parent_id"] = node.parent_id ? json(*node.parent_id) : json(nullptr);
  return obj.dump();
}

}  // namespace rlab::corpus
