#include "rlab/train/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "json.hpp"
#include "rlab/adapt/nf4.hpp"
#include "rlab/util/error.hpp"
#include "rlab/util/hash.hpp"
#include "rlab/util/io.hpp"

namespace rlab::train {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'R', 'L', 'A', 'B'};

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint64_t get_le(std::string_view bytes, std::size_t at, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[at + static_cast<std::size_t>(i)])) << (8 * i);
  }
  return v;
}

double get_f64(std::string_view bytes, std::size_t at) {
  return std::bit_cast<double>(get_le(bytes, at, 8));
}

json config_to_json(const model::ModelConfig& c) {
  return {{"vocab_size", c.vocab_size}, {"context_len", c.context_len}, {"d_model", c.d_model},
          {"n_heads", c.n_heads},       {"n_layers", c.n_layers},       {"d_ff", c.d_ff},
          {"seed", c.seed}};
}

model::ModelConfig config_from_json(const json& j) {
  model::ModelConfig c;
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.context_len = j.at("context_len").get<std::size_t>();
  c.d_model = j.at("d_model").get<std::size_t>();
  c.n_heads = j.at("n_heads").get<std::size_t>();
  c.n_layers = j.at("n_layers").get<std::size_t>();
  c.d_ff = j.at("d_ff").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json history_to_json(const std::vector<LossPoint>& h) {
  json arr = json::array();
  for (const auto& p : h) arr.push_back(json::array({p.step, p.loss}));
  return arr;
}

std::vector<LossPoint> history_from_json(const json& arr) {
  std::vector<LossPoint> h;
  for (const auto& e : arr) h.push_back(LossPoint{e.at(0).get<std::size_t>(), e.at(1).get<double>()});
  return h;
}

bool is_quantized_name(const model::ModelConfig& cfg, const std::string& name) {
  for (const auto& n : model::linear_weight_names(cfg)) {
    if (n == name) return true;
  }
  return false;
}

struct PayloadWriter {
  std::string payload;
  json directory = json::array();

  void f64(const std::string& name, const Tensor& t) {
    const std::size_t offset = payload.size();
    for (double d : t.data) put_f64(payload, d);
    directory.push_back({{"name", name}, {"dtype", "f64"}, {"shape", {t.rows, t.cols}},
                         {"offset", offset}, {"nbytes", payload.size() - offset}});
  }

  void nf4(const std::string& name, const Tensor& t) {
    const adapt::Nf4Tensor q = adapt::nf4_quantize(t.data);
    if (adapt::nf4_dequantize(q) != t.data) {
      throw Error(ErrorCode::kPrecondition,
                  "frozen weight '" + name + "' is not NF4-representable; quantize the base first");
    }
    const std::size_t offset = payload.size();
    for (const auto& block : q.blocks) {
      for (std::size_t i = 0; i < adapt::kNf4BlockSize; i += 2) {
        payload.push_back(static_cast<char>(block.codes[i] | (block.codes[i + 1] << 4)));
      }
    }
    for (const auto& block : q.blocks) put_f64(payload, block.absmax);
    directory.push_back({{"name", name}, {"dtype", "nf4"}, {"shape", {t.rows, t.cols}},
                         {"offset", offset}, {"nbytes", payload.size() - offset},
                         {"blocks", q.blocks.size()}, {"pad", q.pad}});
  }
};

Error truncated(const std::string& what) {
  return Error(ErrorCode::kCheckpointTruncated, "checkpoint truncated: " + what);
}

Error malformed(const std::string& what) {
  return Error(ErrorCode::kCheckpointFormat, "checkpoint malformed: " + what);
}

Tensor read_tensor(std::string_view payload, const json& entry, const model::ModelConfig& cfg) {
  const auto rows = entry.at("shape").at(0).get<std::size_t>();
  const auto cols = entry.at("shape").at(1).get<std::size_t>();
  const auto offset = entry.at("offset").get<std::size_t>();
  const auto nbytes = entry.at("nbytes").get<std::size_t>();
  const auto dtype = entry.at("dtype").get<std::string>();
  const auto name = entry.at("name").get<std::string>();
  if (offset + nbytes > payload.size()) throw malformed("tensor '" + name + "' overruns payload");
  Tensor t(rows, cols);
  if (dtype == "f64") {
    if (nbytes != t.size() * 8) throw malformed("tensor '" + name + "' size mismatch");
    for (std::size_t i = 0; i < t.size(); ++i) t.data[i] = get_f64(payload, offset + 8 * i);
    return t;
  }
  if (dtype != "nf4" || !is_quantized_name(cfg, name)) throw malformed("bad dtype for '" + name + "'");
  adapt::Nf4Tensor q;
  q.length = t.size();
  q.pad = entry.at("pad").get<std::size_t>();
  const auto blocks = entry.at("blocks").get<std::size_t>();
  if (blocks * adapt::kNf4BlockSize != q.length + q.pad || nbytes != blocks * (adapt::kNf4BlockSize / 2 + 8)) {
    throw malformed("NF4 tensor '" + name + "' size mismatch");
  }
  q.blocks.resize(blocks);
  std::size_t at = offset;
  for (auto& block : q.blocks) {
    for (std::size_t i = 0; i < adapt::kNf4BlockSize; i += 2) {
      const auto byte = static_cast<unsigned char>(payload[at++]);
      block.codes[i] = byte & 0x0f;
      block.codes[i + 1] = byte >> 4;
    }
  }
  for (auto& block : q.blocks) {
    block.absmax = get_f64(payload, at);
    at += 8;
  }
  t.data = adapt::nf4_dequantize(q);
  return t;
}

}  // namespace

void quantize_base(model::Model& model) {
  for (const auto& name : model::linear_weight_names(model.config)) {
    Tensor& w = *model.weights.find(name);
    w.data = adapt::nf4_round_trip(w.data);
  }
  model.base_frozen = true;
}

std::string serialize_checkpoint(const TrainState& state) {
  const auto& cfg = state.model.config;
  PayloadWriter writer;
  state.model.weights.for_each([&](const std::string& name, const Tensor& t) {
    if (state.model.base_frozen && is_quantized_name(cfg, name)) {
      writer.nf4(name, t);
    } else {
      writer.f64(name, t);
    }
  });
  json adapters = json::array();
  for (const auto& [target, ad] : state.model.adapters) {
    adapters.push_back({{"target", target}, {"rank", ad.rank}, {"alpha", ad.alpha}});
    writer.f64("adapter." + target + ".a", ad.a);
    writer.f64("adapter." + target + ".b", ad.b);
  }
  for (const auto& [name, m] : state.optimizer.m) writer.f64("opt.m." + name, m);
  for (const auto& [name, v] : state.optimizer.v) writer.f64("opt.v." + name, v);

  json header = {{"format_version", kCheckpointVersion},
                 {"kind", state.kind},
                 {"vocab_digest", state.vocab_digest},
                 {"config", config_to_json(cfg)},
                 {"config_digest", hex64(cfg.digest())},
                 {"base_frozen", state.model.base_frozen},
                 {"step", state.step},
                 {"optimizer_step", state.optimizer.step},
                 {"adapters", adapters},
                 {"tensors", writer.directory},
                 {"train_history", history_to_json(state.train_history)},
                 {"val_history", history_to_json(state.val_history)},
                 {"payload_bytes", writer.payload.size()},
                 {"payload_fnv", hex64(fnv64(writer.payload))}};
  const std::string header_text = header.dump();

  std::string out(kMagic, 4);
  put_u16(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;
  out += writer.payload;
  return out;
}

TrainState parse_checkpoint(std::string_view bytes, const std::optional<model::ModelConfig>& expected) {
  if (bytes.size() < 4) throw truncated("missing magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw malformed("bad magic bytes");
  if (bytes.size() < 10) throw truncated("missing fixed header");
  const auto version = static_cast<std::uint16_t>(get_le(bytes, 4, 2));
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kCheckpointVersion,
                "checkpoint version " + std::to_string(version) + " unsupported (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  const auto header_len = static_cast<std::size_t>(get_le(bytes, 6, 4));
  if (bytes.size() < 10 + header_len) throw truncated("header cut short");
  json header;
  try {
    header = json::parse(bytes.substr(10, header_len));
  } catch (const json::exception& e) {
    throw malformed(std::string("header: ") + e.what());
  }

  try {
    const auto payload_bytes = header.at("payload_bytes").get<std::size_t>();
    const std::string_view payload = bytes.substr(10 + header_len);
    if (payload.size() < payload_bytes) throw truncated("payload cut short");
    if (payload.size() > payload_bytes) throw malformed("trailing bytes after payload");
    if (header.at("payload_fnv").get<std::string>() != hex64(fnv64(payload))) {
      throw malformed("payload checksum mismatch");
    }

    const model::ModelConfig cfg = config_from_json(header.at("config"));
    if (header.at("config_digest").get<std::string>() != hex64(cfg.digest())) {
      throw malformed("stored config does not match its digest");
    }
    if (expected && expected->digest() != cfg.digest()) {
      throw Error(ErrorCode::kCheckpointDigest, "checkpoint config digest " + hex64(cfg.digest()) +
                                                    " does not match expected " + hex64(expected->digest()));
    }
    cfg.validate();

    TrainState state;
    state.kind = header.at("kind").get<std::string>();
    state.vocab_digest = header.at("vocab_digest").get<std::string>();
    state.step = header.at("step").get<std::size_t>();
    state.optimizer.step = header.at("optimizer_step").get<std::size_t>();
    state.train_history = history_from_json(header.at("train_history"));
    state.val_history = history_from_json(header.at("val_history"));
    state.model.config = cfg;
    state.model.weights = model::ModelWeights::zeros_like(cfg);
    state.model.base_frozen = header.at("base_frozen").get<bool>();

    std::map<std::string, Tensor> tensors;
    for (const auto& entry : header.at("tensors")) {
      tensors.emplace(entry.at("name").get<std::string>(), read_tensor(payload, entry, cfg));
    }
    auto take = [&](const std::string& name) {
      auto it = tensors.find(name);
      if (it == tensors.end()) throw malformed("missing tensor '" + name + "'");
      Tensor t = std::move(it->second);
      tensors.erase(it);
      return t;
    };
    state.model.weights.for_each([&](const std::string& name, Tensor& t) {
      Tensor loaded = take(name);
      if (loaded.rows != t.rows || loaded.cols != t.cols) throw malformed("shape mismatch for '" + name + "'");
      t = std::move(loaded);
    });
    for (const auto& a : header.at("adapters")) {
      adapt::LoraAdapter ad;
      ad.target = a.at("target").get<std::string>();
      ad.rank = a.at("rank").get<std::size_t>();
      ad.alpha = a.at("alpha").get<double>();
      ad.a = take("adapter." + ad.target + ".a");
      ad.b = take("adapter." + ad.target + ".b");
      state.model.adapters.emplace(ad.target, std::move(ad));
    }
    for (auto it = tensors.begin(); it != tensors.end();) {
      const std::string& name = it->first;
      if (name.rfind("opt.m.", 0) == 0) {
        state.optimizer.m.emplace(name.substr(6), std::move(it->second));
      } else if (name.rfind("opt.v.", 0) == 0) {
        state.optimizer.v.emplace(name.substr(6), std::move(it->second));
      } else {
        throw malformed("unexpected tensor '" + name + "'");
      }
      it = tensors.erase(it);
    }
    return state;
  } catch (const json::exception& e) {
    throw malformed(std::string("header field: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const TrainState& state) {
  io::write_file_atomic(path, serialize_checkpoint(state));
}

TrainState load_checkpoint(const std::filesystem::path& path,
                           const std::optional<model::ModelConfig>& expected) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kMissingCheckpoint, "checkpoint not found: " + path.string());
  }
  return parse_checkpoint(io::read_file(path), expected);
}

std::uint64_t checkpoint_digest(const std::filesystem::path& path) {
  return fnv64(io::read_file(path));
}

}  // namespace rlab::train
