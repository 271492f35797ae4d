#pragma once

#include <filesystem>
#include <set>
#include <tuple>
#include <string>
#include <vector>

#include "rlab/corpus/types.hpp"
#include "rlab/model/transformer.hpp"
#include "rlab/util/rng.hpp"

namespace rlab::testing {

model::ModelConfig tiny_config(std::uint64_t seed = 7, std::size_t vocab = 32, std::size_t ctx = 16,
                               std::size_t d_model = 16, std::size_t n_heads = 2,
                               std::size_t n_layers = 2, std::size_t d_ff = 32);

model::TokenSequence random_sequence(Rng& rng, std::size_t length, std::size_t vocab);

// Same weights as tests/oracles/forward_oracle.py.
model::Model oracle_model();
inline const model::TokenSequence kOracleSequence = {1, 5, 3, 7, 2, 9};
inline const std::vector<std::uint8_t> kOracleMask = {0, 0, 1, 1, 0, 1};

std::filesystem::path golden_path(const std::string& name);
std::string read_golden(const std::string& name);
std::vector<double> parse_doubles(const std::string& line);

double max_abs_diff(const Tensor& a, const Tensor& b);

corpus::CommentReplyPair make_pair(const std::string& id, const std::string& source,
                                   const std::string& target,
                                   const std::string& community = "r/test",
                                   const std::string& title = "A title");

// Random forest of comment trees: a few roots, random parents drawn from
// earlier nodes, some empty root bodies and some orphans pointing at ids
// that are not in the set.
std::vector<corpus::ThreadNode> random_forest(Rng& rng, std::size_t n_nodes);

// (pair_id, source, target, community) for every parent-child edge whose
// parent is reachable from a root, minus edges out of body-less roots.
// Reachability is a plain fixpoint over the node list.
using EdgeKey = std::tuple<std::string, std::string, std::string, std::string>;
std::multiset<EdgeKey> direct_edges(const std::vector<corpus::ThreadNode>& nodes);

// A small corpus of distinct short exchanges for training tests.
std::vector<corpus::CommentReplyPair> toy_pairs(std::size_t n, std::uint64_t seed = 3);

// Fresh empty directory under the system temp dir.
std::filesystem::path fresh_dir(const std::string& name);

}  // namespace rlab::testing
