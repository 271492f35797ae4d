#pragma once

#include <cstddef>
#include <vector>

#include "rlab/corpus/types.hpp"

namespace rlab::corpus {

struct ExtractStats {
  std::size_t roots = 0;
  std::size_t unreachable_nodes = 0;  // orphans and everything beneath them
  std::size_t empty_root_edges = 0;   // top-level replies under a body-less post
};

struct Extraction {
  std::vector<CommentReplyPair> pairs;
  ExtractStats stats;
};

// Walks every thread depth-first from its root, in input order, emitting one
// pair per parent-child edge. Edges out of a root count only when the post
// body is non-empty. Nodes not reachable from a root are skipped.
Extraction extract_pairs(const std::vector<ThreadNode>& nodes);

}  // namespace rlab::corpus
