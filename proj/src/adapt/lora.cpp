#include "rlab/adapt/lora.hpp"

#include <algorithm>

#include "rlab/model/transformer.hpp"
#include "rlab/util/error.hpp"
#include "rlab/util/hash.hpp"
#include "rlab/util/rng.hpp"

namespace rlab::adapt {

std::vector<std::string> default_targets(std::size_t n_layers) {
  std::vector<std::string> out;
  for (std::size_t l = 0; l < n_layers; ++l) {
    out.push_back("layers." + std::to_string(l) + ".attn.wq");
    out.push_back("layers." + std::to_string(l) + ".attn.wv");
  }
  return out;
}

void inject_adapters(model::Model& model, const std::vector<std::string>& targets,
                     const LoraOptions& options) {
  if (options.rank < 1) throw Error(ErrorCode::kInvalidArgument, "adapter rank must be >= 1");
  if (targets.empty()) throw Error(ErrorCode::kInvalidArgument, "no adapter targets given");
  const auto allowed = model::linear_weight_names(model.config);
  for (const auto& target : targets) {
    if (std::find(allowed.begin(), allowed.end(), target) == allowed.end()) {
      throw Error(ErrorCode::kNotFound, "unknown adapter target '" + target + "'");
    }
    if (model.adapters.count(target)) {
      throw Error(ErrorCode::kDuplicate, "adapter already attached to '" + target + "'");
    }
  }
  for (const auto& target : targets) {
    const Tensor& w = *model.weights.find(target);
    LoraAdapter ad;
    ad.target = target;
    ad.rank = options.rank;
    ad.alpha = options.alpha;
    ad.a = Tensor(options.rank, w.cols);
    ad.b = Tensor(w.rows, options.rank);
    Rng rng(options.seed ^ fnv64(target));
    for (double& v : ad.a.data) v = options.init_std * standard_normal(rng);
    model.adapters.emplace(target, std::move(ad));
  }
  model.base_frozen = true;
}

model::Model merge_adapters(const model::Model& adapted) {
  if (adapted.adapters.empty()) {
    throw Error(ErrorCode::kPrecondition, "model has no adapters to merge");
  }
  model::Model merged = adapted;
  for (const auto& [name, ad] : adapted.adapters) {
    Tensor& w = *merged.weights.find(name);
    const double s = ad.scale();
    for (std::size_t o = 0; o < w.rows; ++o) {
      for (std::size_t i = 0; i < w.cols; ++i) {
        double delta = 0.0;
        for (std::size_t r = 0; r < ad.rank; ++r) delta += ad.b(o, r) * ad.a(r, i);
        w(o, i) += s * delta;
      }
    }
  }
  merged.adapters.clear();
  merged.base_frozen = false;
  return merged;
}

namespace {

std::string with_commas(std::uint64_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

}  // namespace

double ParamBudget::trainable_percent() const {
  if (total_params == 0) return 0.0;
  return 100.0 * static_cast<double>(trainable_params) / static_cast<double>(total_params);
}

std::string ParamBudget::report_line(int decimals) const {
  // Round 100 * t / T half-up at the requested precision in integer arithmetic.
  unsigned __int128 scale = 100;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  unsigned __int128 scaled = 0;
  if (total_params > 0) {
    const unsigned __int128 num = 2 * scale * trainable_params + total_params;
    scaled = num / (2 * static_cast<unsigned __int128>(total_params));
  }
  unsigned __int128 unit = 1;
  for (int i = 0; i < decimals; ++i) unit *= 10;
  std::string pct = std::to_string(static_cast<std::uint64_t>(scaled / unit));
  if (decimals > 0) {
    std::string frac = std::to_string(static_cast<std::uint64_t>(scaled % unit));
    pct += "." + std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
  }
  return with_commas(trainable_params) + " trainable parameters (" + pct + "% of total)";
}

ParamBudget count_params(const model::Model& model) {
  ParamBudget budget;
  model.weights.for_each([&](const std::string&, const Tensor& t) { budget.total_params += t.size(); });
  std::uint64_t adapter = 0;
  for (const auto& [name, ad] : model.adapters) adapter += ad.a.size() + ad.b.size();
  budget.trainable_params = adapter;
  budget.total_params += adapter;
  return budget;
}

}  // namespace rlab::adapt
