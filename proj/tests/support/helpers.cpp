#include "support/helpers.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "rlab/util/io.hpp"

namespace rlab::testing {

model::ModelConfig tiny_config(std::uint64_t seed, std::size_t vocab, std::size_t ctx,
                               std::size_t d_model, std::size_t n_heads, std::size_t n_layers,
                               std::size_t d_ff) {
  model::ModelConfig c;
  c.vocab_size = vocab;
  c.context_len = ctx;
  c.d_model = d_model;
  c.n_heads = n_heads;
  c.n_layers = n_layers;
  c.d_ff = d_ff;
  c.seed = seed;
  return c;
}

model::TokenSequence random_sequence(Rng& rng, std::size_t length, std::size_t vocab) {
  model::TokenSequence s(length);
  for (auto& id : s) id = static_cast<model::TokenId>(uniform_below(rng, vocab));
  return s;
}

model::Model oracle_model() {
  model::Model m = model::Model::init(tiny_config(1, 11, 8, 8, 2, 2, 12));
  std::size_t t = 0;
  m.weights.for_each([&](const std::string& name, Tensor& w) {
    const bool gain = name.size() > 5 && name.compare(name.size() - 5, 5, ".gain") == 0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      w.data[j] = 0.1 * std::sin(0.37 * static_cast<double>(j + 1) + 1.1 * static_cast<double>(t + 1)) +
                  (gain ? 1.0 : 0.0);
    }
    ++t;
  });
  return m;
}

std::filesystem::path golden_path(const std::string& name) {
  return std::filesystem::path(RLAB_TEST_GOLDEN_DIR) / name;
}

std::string read_golden(const std::string& name) { return io::read_file(golden_path(name)); }

std::vector<double> parse_doubles(const std::string& line) {
  std::istringstream in(line);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(std::strtod(tok.c_str(), nullptr));
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

corpus::CommentReplyPair make_pair(const std::string& id, const std::string& source,
                                   const std::string& target, const std::string& community,
                                   const std::string& title) {
  corpus::CommentReplyPair p;
  p.pair_id = id;
  p.source = source;
  p.target = target;
  p.community = community;
  p.post_title = title;
  p.source_author = "alice";
  p.target_author = "bob";
  return p;
}

std::vector<corpus::ThreadNode> random_forest(Rng& rng, std::size_t n_nodes) {
  std::vector<corpus::ThreadNode> nodes;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    corpus::ThreadNode n;
    n.id = "n" + std::to_string(i);
    n.community = "c" + std::to_string(i % 3);
    n.post_title = "title";
    n.author = "u" + std::to_string(uniform_below(rng, 9));
    n.body = uniform_below(rng, 8) == 0 ? "" : "body " + std::to_string(i);
    const std::uint64_t roll = uniform_below(rng, 10);
    if (i == 0 || roll == 0) {
      // root
    } else if (roll == 1) {
      n.parent_id = "ghost" + std::to_string(i);  // orphan
    } else {
      n.parent_id = "n" + std::to_string(uniform_below(rng, i));
    }
    n.created_utc = static_cast<std::int64_t>(i);
    nodes.push_back(std::move(n));
  }
  // Shuffle so parents do not always precede children.
  fisher_yates(std::span<corpus::ThreadNode>(nodes), rng);
  return nodes;
}

std::vector<corpus::CommentReplyPair> toy_pairs(std::size_t n, std::uint64_t seed) {
  static const char* kSubjects[] = {"the bill", "rent control", "the new park", "bike lanes",
                                    "the tax plan", "the strike", "school lunches", "the bridge"};
  static const char* kVerdicts[] = {"is great", "is awful", "needs work", "will pass",
                                    "costs too much", "helps people"};
  static const char* kReplies[] = {"I agree with you", "No way, that is wrong", "Maybe, who knows",
                                   "Source please", "Totally true", "Not in my town"};
  Rng rng(seed);
  std::vector<corpus::CommentReplyPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string subj = kSubjects[i % 8];
    const std::string src = subj + " " + kVerdicts[uniform_below(rng, 6)];
    const std::string tgt = std::string(kReplies[uniform_below(rng, 6)]) + " about " + subj;
    out.push_back(make_pair("p" + std::to_string(i), src, tgt));
  }
  return out;
}

std::multiset<EdgeKey> direct_edges(const std::vector<corpus::ThreadNode>& nodes) {
  std::map<std::string, const corpus::ThreadNode*> by_id;
  for (const auto& n : nodes) by_id[n.id] = &n;
  std::map<std::string, std::string> root_of;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& n : nodes) {
      if (root_of.count(n.id)) continue;
      if (n.is_root()) {
        root_of[n.id] = n.id;
        changed = true;
      } else if (auto it = root_of.find(*n.parent_id); it != root_of.end()) {
        root_of[n.id] = it->second;
        changed = true;
      }
    }
  }
  std::multiset<EdgeKey> edges;
  for (const auto& n : nodes) {
    if (n.is_root() || !root_of.count(n.id)) continue;
    const corpus::ThreadNode& p = *by_id.at(*n.parent_id);
    if (p.is_root() && p.body.empty()) continue;
    edges.insert({n.id, p.body, n.body, by_id.at(root_of.at(n.id))->community});
  }
  return edges;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("rlab-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace rlab::testing
