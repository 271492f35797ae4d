#include "rlab/corpus/extract.hpp"

#include <unordered_map>

namespace rlab::corpus {

Extraction extract_pairs(const std::vector<ThreadNode>& nodes) {
  Extraction out;
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i].id, i);

  std::vector<std::vector<std::size_t>> children(nodes.size());
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_root()) {
      roots.push_back(i);
      continue;
    }
    auto it = index.find(*nodes[i].parent_id);
    if (it != index.end()) children[it->second].push_back(i);
  }

  std::vector<bool> visited(nodes.size(), false);
  std::vector<std::size_t> stack;
  for (std::size_t root : roots) {
    ++out.stats.roots;
    const ThreadNode& post = nodes[root];
    stack.assign(1, root);
    visited[root] = true;
    while (!stack.empty()) {
      const std::size_t parent = stack.back();
      stack.pop_back();
      const ThreadNode& p = nodes[parent];
      for (std::size_t child : children[parent]) {
        if (visited[child]) continue;
        const ThreadNode& c = nodes[child];
        if (parent == root && p.body.empty()) {
          ++out.stats.empty_root_edges;
        } else {
          out.pairs.push_back(CommentReplyPair{c.id, p.body, c.body, post.community,
                                               post.post_title, p.author, c.author});
        }
      }
      // Reverse push keeps pre-order in input order.
      for (auto it = children[parent].rbegin(); it != children[parent].rend(); ++it) {
        if (!visited[*it]) {
          visited[*it] = true;
          stack.push_back(*it);
        }
      }
    }
  }
  for (bool v : visited) {
    if (!v) ++out.stats.unreachable_nodes;
  }
  return out;
}

}  // namespace rlab::corpus
