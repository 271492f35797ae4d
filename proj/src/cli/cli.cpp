#include "rlab/cli/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rlab/adapt/lora.hpp"
#include "rlab/corpus/extract.hpp"
#include "rlab/corpus/filter.hpp"
#include "rlab/corpus/format.hpp"
#include "rlab/corpus/ingest.hpp"
#include "rlab/corpus/split.hpp"
#include "rlab/corpus/store.hpp"
#include "rlab/eval/bleu.hpp"
#include "rlab/eval/perplexity.hpp"
#include "rlab/eval/report.hpp"
#include "rlab/eval/sentiment.hpp"
#include "rlab/harness/generate.hpp"
#include "rlab/harness/prompt.hpp"
#include "rlab/survey/packet.hpp"
#include "rlab/survey/ratings.hpp"
#include "rlab/train/checkpoint.hpp"
#include "rlab/train/example.hpp"
#include "rlab/train/sft.hpp"
#include "rlab/util/error.hpp"
#include "rlab/util/hash.hpp"
#include "rlab/util/io.hpp"
#include "rlab/util/text.hpp"

namespace rlab::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Options {
  std::string out_dir = "rlab-out";
  std::string config;
  std::uint64_t seed = 1;

  // ingest
  std::string input;
  std::string schema{corpus::kJsonLinesSchema};

  // prepare
  std::size_t min_chars = 20;
  std::size_t min_tokens = 4;
  bool strip_urls = true;
  bool drop_moderation_artifacts = true;
  bool dedup = true;
  std::string blocklist = "AutoModerator";
  std::size_t test_size = corpus::kDefaultTestSize;
  double val_fraction = corpus::kDefaultValFraction;

  // train
  std::string stage = "adapter";
  std::string preset;
  std::size_t vocab_size = 512;
  std::size_t context_len = 256;
  std::size_t d_model = 48;
  std::size_t n_heads = 4;
  std::size_t n_layers = 2;
  std::size_t d_ff = 128;
  double lr = 0;
  std::size_t batch_size = 0;
  std::size_t epochs = 0;
  double weight_decay = 0;
  std::size_t max_steps = 0;
  std::size_t checkpoint_every = 50;
  double grad_clip = 1.0;
  bool mask_prompt = true;
  std::size_t rank = 8;
  double alpha = 16.0;
  std::string targets = "wq,wv";

  // generate
  std::string arm = "all";
  std::string checkpoint;
  double temperature = 0.9;
  std::size_t top_k = 40;
  std::size_t max_new_tokens = 128;
  bool greedy = false;

  // evaluate / report
  std::string lexicon;
  std::string format = "table";

  // survey
  std::size_t items = survey::kDefaultItems;
  std::vector<std::string> ratings;
  std::string key;
};

struct Commands {
  CLI::App* ingest = nullptr;
  CLI::App* prepare = nullptr;
  CLI::App* train = nullptr;
  CLI::App* generate = nullptr;
  CLI::App* evaluate = nullptr;
  CLI::App* survey = nullptr;
  CLI::App* survey_make = nullptr;
  CLI::App* survey_aggregate = nullptr;
  CLI::App* report = nullptr;
};

std::unique_ptr<CLI::App> make_app(Options& o, Commands& c) {
  auto app = std::make_unique<CLI::App>("Comment/reply fine-tuning lab", "rlab");
  app->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app->require_subcommand(1);
  app->fallthrough();
  app->add_option("--out-dir", o.out_dir, "Directory every artifact path is relative to")
      ->capture_default_str();
  app->add_option("--config", o.config, "Flat key = value file; flags override its values");
  app->add_option("--seed", o.seed, "Seed for the stage (RLAB_SEED overrides the config file)")
      ->capture_default_str();

  c.ingest = app->add_subcommand("ingest", "Parse a thread export and extract reply pairs");
  c.ingest->add_option("--input", o.input, "Thread export file")->required();
  c.ingest->add_option("--schema", o.schema)->capture_default_str();

  c.prepare = app->add_subcommand("prepare", "Filter pairs and split train/validation/test");
  c.prepare->add_option("--min-chars", o.min_chars)->capture_default_str();
  c.prepare->add_option("--min-tokens", o.min_tokens)->capture_default_str();
  c.prepare->add_option("--strip-urls", o.strip_urls)->capture_default_str();
  c.prepare->add_option("--drop-moderation-artifacts", o.drop_moderation_artifacts)
      ->capture_default_str();
  c.prepare->add_option("--dedup", o.dedup)->capture_default_str();
  c.prepare->add_option("--blocklist", o.blocklist, "Comma-separated author names")
      ->capture_default_str();
  c.prepare->add_option("--test-size", o.test_size)->capture_default_str();
  c.prepare->add_option("--val-fraction", o.val_fraction)->capture_default_str();

  c.train = app->add_subcommand("train", "Pretrain the base model or fit LoRA adapters");
  c.train->add_option("--stage", o.stage)
      ->check(CLI::IsMember({"base", "adapter"}))
      ->capture_default_str();
  c.train->add_option("--preset", o.preset, "single | large (adapter), base (base)")
      ->check(CLI::IsMember({"single", "large", "base"}));
  c.train->add_option("--vocab-size", o.vocab_size)->capture_default_str();
  c.train->add_option("--context-len", o.context_len)->capture_default_str();
  c.train->add_option("--d-model", o.d_model)->capture_default_str();
  c.train->add_option("--n-heads", o.n_heads)->capture_default_str();
  c.train->add_option("--n-layers", o.n_layers)->capture_default_str();
  c.train->add_option("--d-ff", o.d_ff)->capture_default_str();
  c.train->add_option("--lr", o.lr);
  c.train->add_option("--batch-size", o.batch_size);
  c.train->add_option("--epochs", o.epochs);
  c.train->add_option("--weight-decay", o.weight_decay);
  c.train->add_option("--max-steps", o.max_steps);
  c.train->add_option("--checkpoint-every", o.checkpoint_every)->capture_default_str();
  c.train->add_option("--grad-clip", o.grad_clip)->capture_default_str();
  c.train->add_option("--mask-prompt", o.mask_prompt)->capture_default_str();
  c.train->add_option("--rank", o.rank)->capture_default_str();
  c.train->add_option("--alpha", o.alpha)->capture_default_str();
  c.train->add_option("--targets", o.targets,
                      "Comma-separated: full names (layers.0.attn.wq) or short names for every "
                      "layer (wq, wk, wv, wo, w_up, w_down)")
      ->capture_default_str();

  c.generate = app->add_subcommand("generate", "Generate test-set replies for one or all arms");
  c.generate->add_option("--arm", o.arm, "AI-1 .. AI-4 or all")->capture_default_str();
  c.generate->add_option("--checkpoint", o.checkpoint,
                         "Checkpoint for the selected arms instead of the trained one");
  c.generate->add_option("--temperature", o.temperature)->capture_default_str();
  c.generate->add_option("--top-k", o.top_k)->capture_default_str();
  c.generate->add_option("--max-new-tokens", o.max_new_tokens)->capture_default_str();
  c.generate->add_flag("--greedy", o.greedy);

  c.evaluate = app->add_subcommand("evaluate", "Score generated replies against the test set");
  c.evaluate->add_option("--lexicon", o.lexicon, "Sentiment lexicon TSV (default: built in)");
  c.evaluate->add_option("--format", o.format)
      ->check(CLI::IsMember({"table", "tsv"}))
      ->capture_default_str();

  c.survey = app->add_subcommand("survey", "Blind rating packets");
  c.survey->require_subcommand(1);
  c.survey_make = c.survey->add_subcommand("make", "Build a rater packet and its key");
  c.survey_make->add_option("--items", o.items)->capture_default_str();
  c.survey_aggregate = c.survey->add_subcommand("aggregate", "Unblind and summarize ratings");
  c.survey_aggregate->add_option("--ratings", o.ratings, "Ratings CSV files")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  c.survey_aggregate->add_option("--key", o.key, "Key file (default: from survey make)");

  c.report = app->add_subcommand("report", "Render the metrics table");
  c.report->add_option("--format", o.format)
      ->check(CLI::IsMember({"table", "tsv"}))
      ->capture_default_str();
  return app;
}

// ---- config file and environment -------------------------------------------

std::string dashed(std::string key) {
  for (char& ch : key) {
    if (ch == '_') ch = '-';
  }
  return key;
}

void collect_option_names(const CLI::App* app, std::set<std::string>& names) {
  for (const CLI::Option* opt : app->get_options()) {
    for (const std::string& n : opt->get_lnames()) names.insert(n);
  }
  for (const CLI::App* sub : app->get_subcommands([](const CLI::App*) { return true; })) {
    collect_option_names(sub, names);
  }
}

CLI::App* selected_leaf(CLI::App* app) {
  CLI::App* cur = app;
  while (true) {
    auto subs = cur->get_subcommands();
    if (subs.empty()) return cur;
    cur = subs.front();
  }
}

bool leaf_accepts(CLI::App* leaf, const std::string& lname) {
  for (CLI::App* a = leaf; a != nullptr; a = a->get_parent()) {
    if (a->get_option_no_throw("--" + lname) != nullptr) return true;
  }
  return false;
}

// Rewrites args so file values and RLAB_SEED sit between the subcommand name
// and the user's own flags; with take-last options the flags then win.
std::vector<std::string> augment_args(const std::vector<std::string>& args, CLI::App* app,
                                      const Options& first_pass, const fs::path& config_path) {
  CLI::App* leaf = selected_leaf(app);
  std::vector<std::string> injected;

  if (!first_pass.config.empty()) {
    std::set<std::string> known;
    collect_option_names(app, known);
    std::vector<CLI::ConfigItem> items;
    try {
      items = CLI::ConfigINI().from_file(config_path.string());
    } catch (const CLI::FileError&) {
      throw Error(ErrorCode::kIo, "cannot read config file " + config_path.string());
    }
    for (const CLI::ConfigItem& item : items) {
      if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == "default")) {
        throw Error(ErrorCode::kParse, "config file is flat; section '" + item.parents[0] +
                                           "' is not supported");
      }
      const std::string name = dashed(item.name);
      if (name == "config" || name == "out-dir") continue;
      if (!known.contains(name)) {
        throw Error(ErrorCode::kParse, "config file: unknown key '" + item.name + "'");
      }
      if (!leaf_accepts(leaf, name)) continue;  // belongs to another subcommand
      std::string value;
      for (std::size_t i = 0; i < item.inputs.size(); ++i) {
        if (i) value += ',';
        value += item.inputs[i];
      }
      injected.push_back("--" + name + "=" + value);
    }
  }
  if (const char* env = std::getenv("RLAB_SEED"); env != nullptr && *env != '\0') {
    injected.push_back(std::string("--seed=") + env);
  }

  // Insert right after the leaf subcommand's own token.
  std::vector<std::string> chain;
  for (CLI::App* a = leaf; a != app; a = a->get_parent()) chain.insert(chain.begin(), a->get_name());
  std::size_t pos = 0;
  std::size_t matched = 0;
  for (; pos < args.size() && matched < chain.size(); ++pos) {
    if (args[pos] == chain[matched]) ++matched;
  }
  std::vector<std::string> out(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(pos));
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(pos), args.end());
  return out;
}

// CLI11 wants argv-order reversed args for vector parsing.
void parse_args(CLI::App& app, std::vector<std::string> args) {
  std::reverse(args.begin(), args.end());
  app.parse(args);
}

// ---- workspace --------------------------------------------------------------

class Workspace {
 public:
  explicit Workspace(fs::path root) : root_(std::move(root)) {}

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : root_ / path;
  }

  void write(const std::string& rel, std::string_view contents) const {
    const fs::path p = resolve(rel);
    fs::create_directories(p.parent_path());
    io::write_file_atomic(p, contents);
  }

  std::string read(const std::string& rel) const { return io::read_file(resolve(rel)); }

  bool exists(const std::string& rel) const { return fs::exists(resolve(rel)); }

  json manifest(const std::string& rel, std::string_view hint) const {
    if (!exists(rel)) {
      throw Error(ErrorCode::kNotFound,
                  "missing " + rel + " under " + root_.string() + "; run `rlab " +
                      std::string(hint) + "` first");
    }
    return json::parse(read(rel));
  }

  void write_manifest(const std::string& rel, const json& m) const { write(rel, m.dump(2) + "\n"); }

 private:
  fs::path root_;
};

std::string digest_of(const json& config) { return hex64(fnv64(config.dump())); }
std::string short_digest(const std::string& digest) { return digest.substr(0, 12); }

json stage_manifest(std::string_view stage, const json& config, const std::string& digest,
                    const json& seeds, const json& artifacts) {
  return json{{"stage", stage},     {"config", config},      {"config_digest", digest},
              {"seeds", seeds},     {"artifacts", artifacts}};
}

std::vector<std::string> comma_list(std::string_view s) {
  std::vector<std::string> out;
  for (const std::string& part : text::split(s, ',')) {
    std::string t = text::trim(part);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::string file_digest(const Workspace& ws, const std::string& rel) {
  return hex64(fnv64(ws.read(rel)));
}

std::string arm_manifest_path(harness::ArmId id) {
  return "generate/manifest-" + std::string(harness::arm_name(id)) + ".json";
}

model::Vocab load_vocab(const Workspace& ws, const json& base_manifest) {
  return model::Vocab::parse(ws.read(base_manifest["artifacts"]["vocab"].get<std::string>()));
}

void check_vocab(const train::TrainState& st, const model::Vocab& vocab, const std::string& path) {
  if (st.vocab_digest != hex64(vocab.digest())) {
    throw Error(ErrorCode::kCheckpointDigest,
                path + " was trained with a different vocabulary (" + st.vocab_digest + ")");
  }
}

// ---- stages -----------------------------------------------------------------

int run_ingest(const Options& o, const Workspace& ws, std::ostream& out) {
  const std::string bytes = io::read_file(ws.resolve(o.input));
  const auto nodes = corpus::parse_threads(bytes, o.schema);
  const auto extraction = corpus::extract_pairs(nodes);

  const json config{{"schema", o.schema}, {"input_fnv", hex64(fnv64(bytes))}};
  const std::string digest = digest_of(config);
  const std::string d = short_digest(digest);

  std::string threads;
  for (const auto& n : nodes) threads += corpus::thread_node_to_json_line(n) + "\n";
  const std::string threads_path = "ingest/threads-" + d + ".jsonl";
  const std::string pairs_path = "ingest/pairs-" + d + ".tsv";
  ws.write(threads_path, threads);
  ws.write(pairs_path, corpus::serialize_pairs(extraction.pairs));

  json m = stage_manifest("ingest", config, digest, json::object(),
                          {{"threads", threads_path}, {"pairs", pairs_path}});
  m["input"] = o.input;
  m["stats"] = {{"nodes", nodes.size()},
                {"pairs", extraction.pairs.size()},
                {"roots", extraction.stats.roots},
                {"unreachable_nodes", extraction.stats.unreachable_nodes},
                {"empty_root_edges", extraction.stats.empty_root_edges}};
  ws.write_manifest("ingest/manifest.json", m);
  out << "ingest: " << nodes.size() << " nodes, " << extraction.pairs.size() << " pairs ("
      << extraction.stats.unreachable_nodes << " unreachable nodes skipped)\n";
  return kExitOk;
}

int run_prepare(const Options& o, const Workspace& ws, std::ostream& out) {
  const json im = ws.manifest("ingest/manifest.json", "ingest");
  const auto nodes = corpus::parse_threads(ws.read(im["artifacts"]["threads"].get<std::string>()));
  const auto extraction = corpus::extract_pairs(nodes);

  corpus::FilterConfig fc;
  fc.min_chars = o.min_chars;
  fc.min_tokens = o.min_tokens;
  fc.strip_urls = o.strip_urls;
  fc.drop_moderation_artifacts = o.drop_moderation_artifacts;
  fc.dedup = o.dedup;
  fc.blocked_authors = comma_list(o.blocklist);
  fc.validate();
  const auto filtered = corpus::filter_pairs(extraction.pairs, fc);
  const auto split = corpus::split_corpus(filtered.retained, o.seed, o.test_size, o.val_fraction);

  const json config{{"upstream", im["config_digest"]},
                    {"min_chars", fc.min_chars},
                    {"min_tokens", fc.min_tokens},
                    {"strip_urls", fc.strip_urls},
                    {"drop_moderation_artifacts", fc.drop_moderation_artifacts},
                    {"dedup", fc.dedup},
                    {"blocked_authors", fc.blocked_authors},
                    {"seed", o.seed},
                    {"test_size", o.test_size},
                    {"val_fraction", o.val_fraction}};
  const std::string digest = digest_of(config);
  const std::string d = short_digest(digest);
  const json artifacts{{"train", "prepare/train-" + d + ".tsv"},
                       {"validation", "prepare/validation-" + d + ".tsv"},
                       {"test", "prepare/test-" + d + ".tsv"},
                       {"drops", "prepare/drops-" + d + ".tsv"},
                       {"corpus_manifest", "prepare/corpus-" + d + ".json"}};
  ws.write(artifacts["train"], corpus::serialize_pairs(split.train));
  ws.write(artifacts["validation"], corpus::serialize_pairs(split.validation));
  ws.write(artifacts["test"], corpus::serialize_pairs(split.test));
  ws.write(artifacts["drops"], corpus::serialize_drop_log(filtered.drop_log));
  ws.write(artifacts["corpus_manifest"],
           corpus::serialize_manifest(
               corpus::build_manifest(nodes, extraction, filtered, fc, o.seed, split)));

  json m = stage_manifest("prepare", config, digest, {{"split", o.seed}}, artifacts);
  m["sizes"] = {{"train", split.train.size()},
                {"validation", split.validation.size()},
                {"test", split.test.size()},
                {"dropped", filtered.drop_log.size()}};
  ws.write_manifest("prepare/manifest.json", m);
  out << "prepare: " << filtered.retained.size() << " pairs kept, " << filtered.drop_log.size()
      << " dropped; split " << split.train.size() << "/" << split.validation.size() << "/"
      << split.test.size() << "\n";
  return kExitOk;
}

std::vector<corpus::CommentReplyPair> load_split(const Workspace& ws, const json& pm,
                                                 const char* name) {
  return corpus::parse_pairs(ws.read(pm["artifacts"][name].get<std::string>()));
}

train::TrainConfig resolve_train_config(const Options& o, const CLI::App& cmd) {
  std::string preset = o.preset;
  if (preset.empty()) preset = o.stage == "base" ? "base" : "single";
  train::TrainConfig tc;
  if (preset == "single") {
    tc = train::TrainConfig::single_sample_preset();
  } else if (preset == "large") {
    tc = train::TrainConfig::large_batch_preset();
  } else {
    // Full-parameter pretraining of a small model tolerates a much larger step.
    tc.learning_rate = 3e-3;
    tc.batch_size = 8;
    tc.epochs = 8;
  }
  auto given = [&](const char* name) { return cmd.get_option(name)->count() > 0; };
  if (given("--lr")) tc.learning_rate = o.lr;
  if (given("--batch-size")) tc.batch_size = o.batch_size;
  if (given("--epochs")) tc.epochs = o.epochs;
  if (given("--weight-decay")) tc.weight_decay = o.weight_decay;
  if (given("--max-steps")) tc.max_steps = o.max_steps;
  tc.context_len = o.context_len;
  tc.checkpoint_every = o.checkpoint_every;
  tc.grad_clip = o.grad_clip;
  tc.mask_prompt = o.mask_prompt;
  tc.seed = o.seed;
  return tc;
}

json train_config_json(const train::TrainConfig& tc) {
  return json{{"learning_rate", tc.learning_rate},
              {"batch_size", tc.batch_size},
              {"epochs", tc.epochs},
              {"context_len", tc.context_len},
              {"seed", tc.seed},
              {"weight_decay", tc.weight_decay},
              {"mask_prompt", tc.mask_prompt},
              {"checkpoint_every", tc.checkpoint_every},
              {"grad_clip", tc.grad_clip},
              {"max_steps", tc.max_steps ? json(*tc.max_steps) : json(nullptr)}};
}

json history_json(const std::vector<train::LossPoint>& h) {
  json a = json::array();
  for (const auto& p : h) a.push_back({p.step, p.loss});
  return a;
}

void report_divergence(const train::TrainResult& res, std::ostream& out) {
  if (res.diverged) {
    out << "warning: loss diverged at step " << res.diverged_at_step
        << "; rolled back to the last snapshot (step " << res.state.step << ")\n";
  }
}

int run_train_base(const Options& o, const CLI::App& cmd, const Workspace& ws, std::ostream& out) {
  const json pm = ws.manifest("prepare/manifest.json", "prepare");
  const auto train_pairs = load_split(ws, pm, "train");
  const auto val_pairs = load_split(ws, pm, "validation");

  // Plain comment text, no reply format: the fine-tuning stage teaches that.
  auto documents = [](const std::vector<corpus::CommentReplyPair>& pairs) {
    std::vector<std::string> docs;
    std::set<std::string> seen;
    for (const auto& p : pairs) {
      for (const std::string* s : {&p.source, &p.target}) {
        if (seen.insert(*s).second) docs.push_back(*s);
      }
    }
    return docs;
  };
  const auto train_docs = documents(train_pairs);
  const auto val_docs = documents(val_pairs);

  std::vector<std::string> vocab_corpus;
  for (const auto& p : train_pairs) {
    vocab_corpus.push_back(corpus::format_training_sample(p));
    vocab_corpus.push_back(harness::prompt_preamble(p.post_title, p.community));
  }
  const model::Vocab vocab = model::Vocab::train(vocab_corpus, o.vocab_size);

  model::ModelConfig mc;
  mc.vocab_size = vocab.size();
  mc.context_len = o.context_len;
  mc.d_model = o.d_model;
  mc.n_heads = o.n_heads;
  mc.n_layers = o.n_layers;
  mc.d_ff = o.d_ff;
  mc.seed = o.seed;
  mc.validate();
  const train::TrainConfig tc = resolve_train_config(o, cmd);
  tc.validate(mc);

  std::vector<train::TrainingExample> train_ex, val_ex;
  for (const auto& d : train_docs) train_ex.push_back(train::make_lm_example(d, vocab, tc.context_len));
  for (const auto& d : val_docs) val_ex.push_back(train::make_lm_example(d, vocab, tc.context_len));

  train::TrainState st;
  st.kind = "base";
  st.vocab_digest = hex64(vocab.digest());
  st.model = model::Model::init(mc);
  train::TrainResult res = train::pretrain_base(std::move(st), train_ex, val_ex, tc);
  report_divergence(res, out);
  train::quantize_base(res.state.model);
  const double val_after_nf4 = val_ex.empty() ? 0.0 : train::dataset_loss(res.state.model, val_ex);
  // Last history entry describes the stored (quantized) weights.
  if (!val_ex.empty()) res.state.val_history.push_back({res.state.step, val_after_nf4});

  const json config{{"upstream", pm["config_digest"]},
                    {"stage", "base"},
                    {"model", mc.canonical()},
                    {"vocab_target", o.vocab_size},
                    {"train", train_config_json(tc)}};
  const std::string digest = digest_of(config);
  const std::string d = short_digest(digest);
  const json artifacts{{"checkpoint", "train/base-" + d + ".ckpt"},
                       {"vocab", "train/vocab-" + d + ".txt"},
                       {"loss_curve", "train/loss-base-" + d + ".tsv"}};
  ws.write(artifacts["vocab"], vocab.serialize());
  train::save_checkpoint(ws.resolve(artifacts["checkpoint"]), res.state);
  ws.write(artifacts["loss_curve"], train::serialize_loss_curve(res.curve));

  json m = stage_manifest("train-base", config, digest, {{"model", mc.seed}, {"shuffle", tc.seed}},
                          artifacts);
  m["checkpoint_digest"] = hex64(train::checkpoint_digest(ws.resolve(artifacts["checkpoint"])));
  m["vocab_digest"] = hex64(vocab.digest());
  m["steps"] = res.state.step;
  m["train_history"] = history_json(res.state.train_history);
  m["val_history"] = history_json(res.state.val_history);
  m["val_loss_after_nf4"] = val_after_nf4;
  m["diverged"] = res.diverged;
  ws.write_manifest("train/manifest-base.json", m);
  out << "train[base]: " << res.state.step << " steps, vocab " << vocab.size() << ", final train loss "
      << (res.state.train_history.empty() ? 0.0 : res.state.train_history.back().loss)
      << ", val loss after NF4 " << val_after_nf4 << "\n";
  return kExitOk;
}

std::vector<std::string> expand_targets(const std::string& spec, std::size_t n_layers) {
  static const std::map<std::string, std::string> kShort = {
      {"wq", "attn.wq"}, {"wk", "attn.wk"},     {"wv", "attn.wv"},
      {"wo", "attn.wo"}, {"w_up", "ffn.w_up"}, {"w_down", "ffn.w_down"}};
  std::vector<std::string> out;
  for (const std::string& t : comma_list(spec)) {
    auto it = kShort.find(t);
    if (it == kShort.end()) {
      out.push_back(t);
      continue;
    }
    for (std::size_t l = 0; l < n_layers; ++l) {
      out.push_back("layers." + std::to_string(l) + "." + it->second);
    }
  }
  return out;
}

int run_train_adapter(const Options& o, const CLI::App& cmd, const Workspace& ws,
                      std::ostream& out) {
  const json pm = ws.manifest("prepare/manifest.json", "prepare");
  const json bm = ws.manifest("train/manifest-base.json", "train --stage base");
  const auto train_pairs = load_split(ws, pm, "train");
  const auto val_pairs = load_split(ws, pm, "validation");
  const model::Vocab vocab = load_vocab(ws, bm);
  const std::string base_path = bm["artifacts"]["checkpoint"];
  train::TrainState st = train::load_checkpoint(ws.resolve(base_path));
  check_vocab(st, vocab, base_path);

  train::TrainConfig tc = resolve_train_config(o, cmd);
  if (cmd.get_option("--context-len")->count() == 0) tc.context_len = st.model.config.context_len;
  tc.validate(st.model.config);

  adapt::LoraOptions lo;
  lo.rank = o.rank;
  lo.alpha = o.alpha;
  lo.seed = o.seed;
  const auto targets = expand_targets(o.targets, st.model.config.n_layers);
  adapt::inject_adapters(st.model, targets, lo);
  st.kind = "adapter";
  st.step = 0;
  st.optimizer = {};
  st.train_history.clear();
  st.val_history.clear();

  std::vector<train::TrainingExample> train_ex, val_ex;
  for (const auto& p : train_pairs) {
    train_ex.push_back(train::make_sft_example(p, vocab, tc.context_len, tc.mask_prompt));
  }
  for (const auto& p : val_pairs) {
    val_ex.push_back(train::make_sft_example(p, vocab, tc.context_len, tc.mask_prompt));
  }
  const adapt::ParamBudget budget = adapt::count_params(st.model);
  train::TrainResult res = train::run_sft(std::move(st), train_ex, val_ex, tc);
  report_divergence(res, out);

  const json config{{"upstream", pm["config_digest"]},
                    {"base", bm["checkpoint_digest"]},
                    {"stage", "adapter"},
                    {"lora", {{"rank", lo.rank}, {"alpha", lo.alpha}, {"targets", targets}}},
                    {"train", train_config_json(tc)}};
  const std::string digest = digest_of(config);
  const std::string d = short_digest(digest);
  const json artifacts{{"checkpoint", "train/adapter-" + d + ".ckpt"},
                       {"loss_curve", "train/loss-adapter-" + d + ".tsv"}};
  train::save_checkpoint(ws.resolve(artifacts["checkpoint"]), res.state);
  ws.write(artifacts["loss_curve"], train::serialize_loss_curve(res.curve));

  json m = stage_manifest("train-adapter", config, digest, {{"lora", lo.seed}, {"shuffle", tc.seed}},
                          artifacts);
  m["checkpoint_digest"] = hex64(train::checkpoint_digest(ws.resolve(artifacts["checkpoint"])));
  m["vocab_digest"] = hex64(vocab.digest());
  m["params"] = budget.report_line();
  m["steps"] = res.state.step;
  m["train_history"] = history_json(res.state.train_history);
  m["val_history"] = history_json(res.state.val_history);
  m["diverged"] = res.diverged;
  ws.write_manifest("train/manifest-adapter.json", m);
  out << budget.report_line() << "\n";
  out << "train[adapter]: " << res.state.step << " steps, train loss "
      << (res.state.train_history.empty() ? 0.0 : res.state.train_history.front().loss) << " -> "
      << (res.state.train_history.empty() ? 0.0 : res.state.train_history.back().loss) << "\n";
  return kExitOk;
}

int run_generate(const Options& o, const Workspace& ws, std::ostream& out) {
  std::vector<harness::ArmId> arms;
  if (o.arm == "all") {
    arms.assign(harness::kAllArms.begin(), harness::kAllArms.end());
  } else {
    arms.push_back(harness::parse_arm(o.arm));
  }
  harness::SamplingConfig sc;
  sc.temperature = o.temperature;
  sc.top_k = o.top_k;
  sc.max_new_tokens = o.max_new_tokens;
  sc.seed = o.seed;
  sc.greedy = o.greedy;
  sc.validate();

  const json pm = ws.manifest("prepare/manifest.json", "prepare");
  const json bm = ws.manifest("train/manifest-base.json", "train --stage base");
  const auto test = load_split(ws, pm, "test");
  const model::Vocab vocab = load_vocab(ws, bm);

  for (harness::ArmId id : arms) {
    const harness::ArmConfig ac = harness::arm_config(id, sc);
    std::string ckpt = o.checkpoint;
    if (ckpt.empty() && ac.fine_tuned) {
      if (!ws.exists("train/manifest-adapter.json")) {
        throw Error(ErrorCode::kMissingCheckpoint,
                    std::string(harness::arm_name(id)) +
                        " needs a fine-tuned checkpoint; run `rlab train --stage adapter` or pass "
                        "--checkpoint");
      }
      ckpt = ws.manifest("train/manifest-adapter.json", "train --stage adapter")["artifacts"]
                        ["checkpoint"];
    } else if (ckpt.empty()) {
      ckpt = bm["artifacts"]["checkpoint"];
    }
    const train::TrainState st = train::load_checkpoint(ws.resolve(ckpt));
    check_vocab(st, vocab, ckpt);
    const std::string ckpt_digest = hex64(train::checkpoint_digest(ws.resolve(ckpt)));
    auto records = harness::generate(ac, harness::ArmModel{&st.model, ckpt_digest}, vocab, test);
    harness::sort_records(records);

    const json config{{"upstream", pm["config_digest"]},
                      {"arm", harness::arm_name(id)},
                      {"checkpoint_digest", ckpt_digest},
                      {"temperature", sc.temperature},
                      {"top_k", sc.top_k},
                      {"max_new_tokens", sc.max_new_tokens},
                      {"greedy", sc.greedy},
                      {"seed", sc.seed}};
    const std::string digest = digest_of(config);
    const std::string rel =
        "generate/" + std::string(harness::arm_name(id)) + "-" + short_digest(digest) + ".jsonl";
    ws.write(rel, harness::serialize_records(records));
    json m = stage_manifest("generate", config, digest, {{"sampling", sc.seed}},
                            {{"records", rel}});
    m["checkpoint"] = ckpt;
    ws.write_manifest(arm_manifest_path(id), m);
    out << "generate[" << harness::arm_name(id) << "]: " << records.size() << " replies -> " << rel
        << "\n";
  }
  return kExitOk;
}

int run_evaluate(const Options& o, const Workspace& ws, std::ostream& out) {
  const eval::ReportFormat fmt = eval::parse_report_format(o.format);
  const eval::SentimentLexicon lexicon = o.lexicon.empty()
                                             ? eval::SentimentLexicon::builtin()
                                             : eval::SentimentLexicon::load(ws.resolve(o.lexicon));
  const json pm = ws.manifest("prepare/manifest.json", "prepare");
  const json bm = ws.manifest("train/manifest-base.json", "train --stage base");
  const auto test = load_split(ws, pm, "test");
  const model::Vocab vocab = load_vocab(ws, bm);

  std::vector<eval::MetricRow> rows;
  json upstream = json::array();
  for (harness::ArmId id : harness::kAllArms) {
    if (!ws.exists(arm_manifest_path(id))) continue;
    const json gm = ws.manifest(arm_manifest_path(id), "generate");
    upstream.push_back(gm["config_digest"]);
    const auto records = harness::parse_records(ws.read(gm["artifacts"]["records"]));
    std::map<std::string, const harness::GenerationRecord*> by_pair;
    for (const auto& r : records) by_pair[r.pair_id] = &r;

    const std::string ckpt = gm["checkpoint"];
    const train::TrainState st = train::load_checkpoint(ws.resolve(ckpt));
    check_vocab(st, vocab, ckpt);

    std::vector<std::string> candidates, references;
    std::vector<train::TrainingExample> scored;
    for (const auto& pair : test) {
      auto it = by_pair.find(pair.pair_id);
      if (it == by_pair.end()) {
        throw Error(ErrorCode::kNotFound, std::string(harness::arm_name(id)) +
                                              " has no reply for test pair " + pair.pair_id);
      }
      candidates.push_back(it->second->response_text);
      references.push_back(pair.target);
      scored.push_back(train::make_completion_example(it->second->prompt_text, " " + pair.target,
                                                      vocab, st.model.config.context_len, true));
    }
    eval::MetricRow row;
    row.system_name = std::string(harness::arm_label(id));
    row.bleu = eval::bleu(candidates, references);
    row.perplexity = eval::masked_perplexity(st.model, scored);
    row.sentiment_alignment = eval::sentiment_alignment(candidates, references, lexicon);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kNotFound, "no generation outputs under generate/; run `rlab generate` first");
  }

  const json config{{"upstream", upstream},
                    {"lexicon", o.lexicon.empty() ? std::string("builtin")
                                                  : hex64(fnv64(io::read_file(ws.resolve(o.lexicon))))},
                    {"test", pm["config_digest"]}};
  const std::string digest = digest_of(config);
  const std::string d = short_digest(digest);
  const json artifacts{{"metrics", "evaluate/metrics-" + d + ".jsonl"},
                       {"report", "evaluate/report-" + d + (o.format == "tsv" ? ".tsv" : ".txt")}};
  const std::string report = eval::render_report(rows, fmt);
  ws.write(artifacts["metrics"], eval::serialize_metric_rows(rows));
  ws.write(artifacts["report"], report);
  ws.write_manifest("evaluate/manifest.json",
                    stage_manifest("evaluate", config, digest, json::object(), artifacts));
  out << report;
  return kExitOk;
}

int run_report(const Options& o, const Workspace& ws, std::ostream& out) {
  const json em = ws.manifest("evaluate/manifest.json", "evaluate");
  const auto rows = eval::parse_metric_rows(ws.read(em["artifacts"]["metrics"]));
  const std::string report = eval::render_report(rows, eval::parse_report_format(o.format));
  const json config{{"upstream", em["config_digest"]}, {"format", o.format}};
  const std::string digest = digest_of(config);
  const std::string rel =
      "report/metrics-table-" + short_digest(digest) + (o.format == "tsv" ? ".tsv" : ".txt");
  ws.write(rel, report);
  ws.write_manifest("report/manifest.json",
                    stage_manifest("report", config, digest, json::object(), {{"report", rel}}));
  out << report;
  return kExitOk;
}

int run_survey_make(const Options& o, const Workspace& ws, std::ostream& out) {
  const json pm = ws.manifest("prepare/manifest.json", "prepare");
  const auto test = load_split(ws, pm, "test");
  std::vector<harness::GenerationRecord> records;
  json upstream = json::array();
  for (harness::ArmId id : harness::kAllArms) {
    const json gm = ws.manifest(arm_manifest_path(id), "generate --arm " + std::string(harness::arm_name(id)));
    upstream.push_back(gm["config_digest"]);
    auto r = harness::parse_records(ws.read(gm["artifacts"]["records"]));
    records.insert(records.end(), r.begin(), r.end());
  }
  const survey::SurveyPacket packet = survey::build_packet(test, records, o.items, o.seed);

  const json config{{"upstream", upstream}, {"items", o.items}, {"seed", o.seed}};
  const std::string digest = digest_of(config);
  const std::string d = short_digest(digest);
  const json artifacts{{"packet", "survey/packet-" + d + ".txt"}, {"key", "survey/key-" + d + ".tsv"}};
  ws.write(artifacts["packet"], survey::render_rater_file(packet));
  ws.write(artifacts["key"], survey::render_key_file(packet));
  json m = stage_manifest("survey-make", config, digest, {{"shuffle", o.seed}}, artifacts);
  m["packet_id"] = packet.packet_id;
  ws.write_manifest("survey/manifest-make.json", m);
  out << "survey: packet " << packet.packet_id << " with " << packet.items.size() << " items -> "
      << artifacts["packet"].get<std::string>() << "\n";
  return kExitOk;
}

int run_survey_aggregate(const Options& o, const Workspace& ws, std::ostream& out) {
  std::string key_path = o.key;
  if (key_path.empty()) {
    key_path = ws.manifest("survey/manifest-make.json", "survey make")["artifacts"]["key"];
  }
  const std::string key_bytes = ws.read(key_path);
  const survey::BlindingKey key = survey::parse_key_file(key_bytes);
  std::vector<fs::path> files;
  json rating_digests = json::object();
  for (const std::string& r : o.ratings) {
    files.push_back(ws.resolve(r));
    rating_digests[fs::path(r).filename().string()] = file_digest(ws, r);
  }
  const auto records = survey::ingest_ratings(files);
  const survey::SurveySummary summary = survey::aggregate(records, key);
  const std::string text = survey::render_summary(summary);

  const json config{{"key", hex64(fnv64(key_bytes))}, {"ratings", rating_digests}};
  const std::string digest = digest_of(config);
  const std::string rel = "survey/summary-" + short_digest(digest) + ".txt";
  ws.write(rel, text);
  json m = stage_manifest("survey-aggregate", config, digest, json::object(), {{"summary", rel}});
  m["total_ratings"] = summary.total_ratings;
  ws.write_manifest("survey/manifest-aggregate.json", m);
  out << text;
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  Commands c;
  auto app = make_app(o, c);
  try {
    parse_args(*app, args);
    const char* env_seed = std::getenv("RLAB_SEED");
    if (!o.config.empty() || (env_seed != nullptr && *env_seed != '\0')) {
      const fs::path config_path = Workspace(o.out_dir).resolve(o.config);
      const auto augmented = augment_args(args, app.get(), o, config_path);
      o = Options{};
      c = Commands{};
      app = make_app(o, c);
      parse_args(*app, augmented);
    }
  } catch (const CLI::CallForHelp& e) {
    out << app->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app->help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n\n" << app->help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  const Workspace ws{fs::path(o.out_dir)};
  try {
    if (c.ingest->parsed()) return run_ingest(o, ws, out);
    if (c.prepare->parsed()) return run_prepare(o, ws, out);
    if (c.train->parsed()) {
      return o.stage == "base" ? run_train_base(o, *c.train, ws, out)
                               : run_train_adapter(o, *c.train, ws, out);
    }
    if (c.generate->parsed()) return run_generate(o, ws, out);
    if (c.evaluate->parsed()) return run_evaluate(o, ws, out);
    if (c.report->parsed()) return run_report(o, ws, out);
    if (c.survey_make->parsed()) return run_survey_make(o, ws, out);
    if (c.survey_aggregate->parsed()) return run_survey_aggregate(o, ws, out);
  } catch (const Error& e) {
    err << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  err << app->help();
  return kExitUsage;
}

}  // namespace rlab::cli
