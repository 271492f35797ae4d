#include "rlab/model/transformer.hpp"

#include <cmath>
#include <limits>

#include "rlab/simd/kernels.hpp"
#include "rlab/util/error.hpp"
#include "rlab/util/rng.hpp"

namespace rlab::model {

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kInitStd = 0.02;
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluK = 0.044715;

struct LnCache {
  Tensor xhat;
  std::vector<double> rstd;
};

struct LayerAdapters {
  const adapt::LoraAdapter* wq = nullptr;
  const adapt::LoraAdapter* wk = nullptr;
  const adapt::LoraAdapter* wv = nullptr;
  const adapt::LoraAdapter* wo = nullptr;
  const adapt::LoraAdapter* w_up = nullptr;
  const adapt::LoraAdapter* w_down = nullptr;
};

struct LayerTrace {
  Tensor x_in;
  LnCache ln1;
  Tensor h1, q, k, v, zq, zk, zv;
  std::vector<Tensor> probs;
  Tensor attn, zo, x_mid;
  LnCache ln2;
  Tensor h2, up, act, z_up, z_down;
};

struct Trace {
  std::vector<LayerTrace> layers;
  Tensor x_final;
  LnCache lnf;
  Tensor hf;
  Tensor logits;
};

const adapt::LoraAdapter* lookup(const adapt::AdapterSet& set, const std::string& name) {
  auto it = set.find(name);
  return it == set.end() ? nullptr : &it->second;
}

std::vector<LayerAdapters> resolve_adapters(const Model& model) {
  std::vector<LayerAdapters> out(model.config.n_layers);
  if (model.adapters.empty()) return out;
  for (std::size_t l = 0; l < out.size(); ++l) {
    const std::string p = "layers." + std::to_string(l) + ".";
    out[l].wq = lookup(model.adapters, p + "attn.wq");
    out[l].wk = lookup(model.adapters, p + "attn.wk");
    out[l].wv = lookup(model.adapters, p + "attn.wv");
    out[l].wo = lookup(model.adapters, p + "attn.wo");
    out[l].w_up = lookup(model.adapters, p + "ffn.w_up");
    out[l].w_down = lookup(model.adapters, p + "ffn.w_down");
  }
  return out;
}

void layernorm_row(std::span<const double> x, std::span<const double> gain,
                   std::span<const double> bias, std::span<double> y, std::span<double> xhat,
                   double& rstd_out) {
  const std::size_t d = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(d);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(d);
  const double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
  for (std::size_t i = 0; i < d; ++i) {
    xhat[i] = (x[i] - mean) * rstd;
    y[i] = gain[i] * xhat[i] + bias[i];
  }
  rstd_out = rstd;
}

void layernorm_forward(const Tensor& x, const Tensor& gain, const Tensor& bias, Tensor& y,
                       LnCache& cache) {
  y = Tensor(x.rows, x.cols);
  cache.xhat = Tensor(x.rows, x.cols);
  cache.rstd.assign(x.rows, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    layernorm_row(x.row(r), gain.row(0), bias.row(0), y.row(r), cache.xhat.row(r), cache.rstd[r]);
  }
}

// Accumulates into dx.
void layernorm_backward(const Tensor& dy, const Tensor& gain, const LnCache& cache, Tensor& dx,
                        Tensor* dgain, Tensor* dbias) {
  const std::size_t d = dy.cols;
  std::vector<double> dxhat(d);
  for (std::size_t r = 0; r < dy.rows; ++r) {
    const auto dyr = dy.row(r);
    const auto xh = cache.xhat.row(r);
    double mean_dxhat = 0.0;
    double mean_dxhat_xhat = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      dxhat[i] = dyr[i] * gain(0, i);
      mean_dxhat += dxhat[i];
      mean_dxhat_xhat += dxhat[i] * xh[i];
      if (dgain) (*dgain)(0, i) += dyr[i] * xh[i];
      if (dbias) (*dbias)(0, i) += dyr[i];
    }
    mean_dxhat /= static_cast<double>(d);
    mean_dxhat_xhat /= static_cast<double>(d);
    auto dxr = dx.row(r);
    for (std::size_t i = 0; i < d; ++i) {
      dxr[i] += cache.rstd[r] * (dxhat[i] - mean_dxhat - xh[i] * mean_dxhat_xhat);
    }
  }
}

void linear_row(std::span<const double> x, const Tensor& w, const Tensor* bias,
                const adapt::LoraAdapter* lora, std::span<double> y, std::span<double> z) {
  for (std::size_t o = 0; o < w.rows; ++o) {
    y[o] = simd::dot(w.row(o), x) + (bias ? (*bias)(0, o) : 0.0);
  }
  if (lora) {
    for (std::size_t r = 0; r < lora->rank; ++r) z[r] = simd::dot(lora->a.row(r), x);
    const double s = lora->scale();
    for (std::size_t o = 0; o < w.rows; ++o) y[o] += s * simd::dot(lora->b.row(o), z);
  }
}

// y = x W^T (+ bias) (+ scale * (x A^T) B^T). z caches x A^T.
void linear_forward(const Tensor& x, const Tensor& w, const Tensor* bias,
                    const adapt::LoraAdapter* lora, Tensor& y, Tensor& z) {
  y = Tensor(x.rows, w.rows);
  z = lora ? Tensor(x.rows, lora->rank) : Tensor();
  for (std::size_t n = 0; n < x.rows; ++n) {
    linear_row(x.row(n), w, bias, lora, y.row(n), lora ? z.row(n) : std::span<double>());
  }
}

// Accumulates dx; dw, dbias and dlora are optional.
void linear_backward(const Tensor& x, const Tensor& dy, const Tensor& w,
                     const adapt::LoraAdapter* lora, const Tensor& z, Tensor& dx, Tensor* dw,
                     Tensor* dbias, AdapterGrads* dlora) {
  std::vector<double> dz(lora ? lora->rank : 0);
  for (std::size_t n = 0; n < x.rows; ++n) {
    const auto dyn = dy.row(n);
    auto dxn = dx.row(n);
    for (std::size_t o = 0; o < w.rows; ++o) {
      const double g = dyn[o];
      if (g == 0.0) continue;
      simd::axpy(g, w.row(o), dxn);
      if (dw) simd::axpy(g, x.row(n), dw->row(o));
      if (dbias) (*dbias)(0, o) += g;
    }
    if (lora) {
      const double s = lora->scale();
      std::fill(dz.begin(), dz.end(), 0.0);
      for (std::size_t o = 0; o < w.rows; ++o) {
        const double g = s * dyn[o];
        if (g == 0.0) continue;
        simd::axpy(g, lora->b.row(o), dz);
        if (dlora) simd::axpy(g, z.row(n), dlora->b.row(o));
      }
      for (std::size_t r = 0; r < lora->rank; ++r) {
        simd::axpy(dz[r], lora->a.row(r), dxn);
        if (dlora) simd::axpy(dz[r], x.row(n), dlora->a.row(r));
      }
    }
  }
}

double gelu(double u) { return 0.5 * u * (1.0 + std::tanh(kGeluC * (u + kGeluK * u * u * u))); }

double gelu_grad(double u) {
  const double t = std::tanh(kGeluC * (u + kGeluK * u * u * u));
  return 0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluK * u * u);
}

// Causal attention for query row i over key/value rows [0, i]. Writes the
// normalized probabilities into p[0..i] and accumulates the output row.
void attend_row(std::span<const double> q_i, const Tensor& k, const Tensor& v, std::size_t i,
                std::size_t head, std::size_t hd, std::span<double> p, std::span<double> out_i) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const std::size_t off = head * hd;
  double max_s = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j <= i; ++j) {
    p[j] = simd::dot(q_i.subspan(off, hd), k.row(j).subspan(off, hd)) * scale;
    max_s = std::max(max_s, p[j]);
  }
  double sum = 0.0;
  for (std::size_t j = 0; j <= i; ++j) {
    p[j] = std::exp(p[j] - max_s);
    sum += p[j];
  }
  for (std::size_t j = 0; j <= i; ++j) {
    p[j] /= sum;
    simd::axpy(p[j], v.row(j).subspan(off, hd), out_i.subspan(off, hd));
  }
}

void attention_forward(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t n_heads,
                       Tensor& out, std::vector<Tensor>& probs) {
  const std::size_t n = q.rows;
  const std::size_t hd = q.cols / n_heads;
  out = Tensor(n, q.cols);
  probs.assign(n_heads, Tensor(n, n));
  for (std::size_t h = 0; h < n_heads; ++h) {
    for (std::size_t i = 0; i < n; ++i) attend_row(q.row(i), k, v, i, h, hd, probs[h].row(i), out.row(i));
  }
}

void attention_backward(const Tensor& q, const Tensor& k, const Tensor& v,
                        const std::vector<Tensor>& probs, const Tensor& dout, Tensor& dq, Tensor& dk,
                        Tensor& dv) {
  const std::size_t n = q.rows;
  const std::size_t n_heads = probs.size();
  const std::size_t hd = q.cols / n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  dq = Tensor(n, q.cols);
  dk = Tensor(n, q.cols);
  dv = Tensor(n, q.cols);
  std::vector<double> dp(n);
  for (std::size_t h = 0; h < n_heads; ++h) {
    const std::size_t off = h * hd;
    for (std::size_t i = 0; i < n; ++i) {
      const auto dout_i = dout.row(i).subspan(off, hd);
      const auto p = probs[h].row(i);
      double weighted = 0.0;
      for (std::size_t j = 0; j <= i; ++j) {
        dp[j] = simd::dot(dout_i, v.row(j).subspan(off, hd));
        simd::axpy(p[j], dout_i, dv.row(j).subspan(off, hd));
        weighted += p[j] * dp[j];
      }
      for (std::size_t j = 0; j <= i; ++j) {
        const double ds = p[j] * (dp[j] - weighted) * scale;
        simd::axpy(ds, k.row(j).subspan(off, hd), dq.row(i).subspan(off, hd));
        simd::axpy(ds, q.row(i).subspan(off, hd), dk.row(j).subspan(off, hd));
      }
    }
  }
}

void check_ids(const Model& model, std::span<const TokenId> ids) {
  if (ids.empty()) throw Error(ErrorCode::kInvalidArgument, "empty token sequence");
  if (ids.size() > model.config.context_len) {
    throw Error(ErrorCode::kRange, "sequence of " + std::to_string(ids.size()) +
                                       " tokens exceeds context_len " +
                                       std::to_string(model.config.context_len));
  }
  for (TokenId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= model.config.vocab_size) {
      throw Error(ErrorCode::kRange, "token id " + std::to_string(id) + " outside vocabulary");
    }
  }
}

Trace run_forward(const Model& model, std::span<const TokenId> ids) {
  check_ids(model, ids);
  const auto& w = model.weights;
  const std::size_t n = ids.size();
  const std::size_t d = model.config.d_model;
  const auto adapters = resolve_adapters(model);

  Trace t;
  Tensor x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto te = w.token_embedding.row(static_cast<std::size_t>(ids[i]));
    const auto pe = w.position_embedding.row(i);
    auto xr = x.row(i);
    for (std::size_t c = 0; c < d; ++c) xr[c] = te[c] + pe[c];
  }

  t.layers.resize(model.config.n_layers);
  for (std::size_t l = 0; l < model.config.n_layers; ++l) {
    const auto& L = w.layers[l];
    const auto& A = adapters[l];
    auto& tr = t.layers[l];
    tr.x_in = x;
    layernorm_forward(x, L.ln1_gain, L.ln1_bias, tr.h1, tr.ln1);
    linear_forward(tr.h1, L.wq, nullptr, A.wq, tr.q, tr.zq);
    linear_forward(tr.h1, L.wk, nullptr, A.wk, tr.k, tr.zk);
    linear_forward(tr.h1, L.wv, nullptr, A.wv, tr.v, tr.zv);
    attention_forward(tr.q, tr.k, tr.v, model.config.n_heads, tr.attn, tr.probs);
    Tensor proj;
    linear_forward(tr.attn, L.wo, nullptr, A.wo, proj, tr.zo);
    for (std::size_t i = 0; i < x.size(); ++i) x.data[i] += proj.data[i];
    tr.x_mid = x;
    layernorm_forward(x, L.ln2_gain, L.ln2_bias, tr.h2, tr.ln2);
    linear_forward(tr.h2, L.w_up, &L.b_up, A.w_up, tr.up, tr.z_up);
    tr.act = Tensor(tr.up.rows, tr.up.cols);
    for (std::size_t i = 0; i < tr.up.size(); ++i) tr.act.data[i] = gelu(tr.up.data[i]);
    Tensor down;
    linear_forward(tr.act, L.w_down, &L.b_down, A.w_down, down, tr.z_down);
    for (std::size_t i = 0; i < x.size(); ++i) x.data[i] += down.data[i];
  }
  t.x_final = x;
  layernorm_forward(x, w.final_gain, w.final_bias, t.hf, t.lnf);
  Tensor unused;
  linear_forward(t.hf, w.lm_head, nullptr, nullptr, t.logits, unused);
  return t;
}

double log_sum_exp(std::span<const double> row) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : row) m = std::max(m, v);
  double s = 0.0;
  for (double v : row) s += std::exp(v - m);
  return m + std::log(s);
}

std::size_t count_scored(std::span<const TokenId> ids, std::span<const std::uint8_t> mask) {
  if (mask.size() != ids.size()) {
    throw Error(ErrorCode::kInvalidArgument, "loss mask length " + std::to_string(mask.size()) +
                                                 " != sequence length " + std::to_string(ids.size()));
  }
  std::size_t scored = 0;
  for (std::size_t i = 1; i < ids.size(); ++i) scored += mask[i] ? 1 : 0;
  if (scored == 0) throw Error(ErrorCode::kPrecondition, "every position is masked; nothing to score");
  return scored;
}

void normal_fill(Tensor& t, Rng& rng, double std) {
  for (double& v : t.data) v = std * standard_normal(rng);
}

}  // namespace

ModelWeights ModelWeights::zeros_like(const ModelConfig& cfg) {
  const std::size_t d = cfg.d_model;
  ModelWeights w;
  w.token_embedding = Tensor(cfg.vocab_size, d);
  w.position_embedding = Tensor(cfg.context_len, d);
  w.layers.resize(cfg.n_layers);
  for (auto& L : w.layers) {
    L.ln1_gain = Tensor(1, d);
    L.ln1_bias = Tensor(1, d);
    L.wq = Tensor(d, d);
    L.wk = Tensor(d, d);
    L.wv = Tensor(d, d);
    L.wo = Tensor(d, d);
    L.ln2_gain = Tensor(1, d);
    L.ln2_bias = Tensor(1, d);
    L.w_up = Tensor(cfg.d_ff, d);
    L.b_up = Tensor(1, cfg.d_ff);
    L.w_down = Tensor(d, cfg.d_ff);
    L.b_down = Tensor(1, d);
  }
  w.final_gain = Tensor(1, d);
  w.final_bias = Tensor(1, d);
  w.lm_head = Tensor(cfg.vocab_size, d);
  return w;
}

Tensor* ModelWeights::find(const std::string& name) {
  Tensor* found = nullptr;
  for_each([&](const std::string& n, Tensor& t) {
    if (n == name) found = &t;
  });
  return found;
}

const Tensor* ModelWeights::find(const std::string& name) const {
  return const_cast<ModelWeights*>(this)->find(name);
}

std::vector<std::string> linear_weight_names(const ModelConfig& cfg) {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    const std::string p = "layers." + std::to_string(l) + ".";
    for (const char* s : {"attn.wq", "attn.wk", "attn.wv", "attn.wo", "ffn.w_up", "ffn.w_down"}) {
      names.push_back(p + s);
    }
  }
  return names;
}

Model Model::init(const ModelConfig& cfg) {
  cfg.validate();
  Model m;
  m.config = cfg;
  m.weights = ModelWeights::zeros_like(cfg);
  Rng rng(cfg.seed);
  const double resid_std = kInitStd / std::sqrt(2.0 * static_cast<double>(cfg.n_layers));
  normal_fill(m.weights.token_embedding, rng, kInitStd);
  normal_fill(m.weights.position_embedding, rng, kInitStd);
  for (auto& L : m.weights.layers) {
    L.ln1_gain.fill(1.0);
    L.ln2_gain.fill(1.0);
    normal_fill(L.wq, rng, kInitStd);
    normal_fill(L.wk, rng, kInitStd);
    normal_fill(L.wv, rng, kInitStd);
    normal_fill(L.wo, rng, resid_std);
    normal_fill(L.w_up, rng, kInitStd);
    normal_fill(L.w_down, rng, resid_std);
  }
  m.weights.final_gain.fill(1.0);
  normal_fill(m.weights.lm_head, rng, kInitStd);
  return m;
}

Tensor forward(const Model& model, std::span<const TokenId> ids) {
  return run_forward(model, ids).logits;
}

Tensor log_softmax_rows(const Tensor& logits) {
  Tensor out(logits.rows, logits.cols);
  for (std::size_t r = 0; r < logits.rows; ++r) {
    const double lse = log_sum_exp(logits.row(r));
    for (std::size_t c = 0; c < logits.cols; ++c) out(r, c) = logits(r, c) - lse;
  }
  return out;
}

double sequence_loss(const Model& model, std::span<const TokenId> ids,
                     std::span<const std::uint8_t> loss_mask) {
  const std::size_t scored = count_scored(ids, loss_mask);
  const Tensor logits = forward(model, ids);
  double total = 0.0;
  for (std::size_t i = 1; i < ids.size(); ++i) {
    if (!loss_mask[i]) continue;
    const auto row = logits.row(i - 1);
    total += log_sum_exp(row) - row[static_cast<std::size_t>(ids[i])];
  }
  return total / static_cast<double>(scored);
}

LossAndGrads loss_and_grads(const Model& model, std::span<const TokenId> ids,
                            std::span<const std::uint8_t> loss_mask) {
  const std::size_t scored = count_scored(ids, loss_mask);
  const Trace t = run_forward(model, ids);
  const auto& w = model.weights;
  const auto adapters = resolve_adapters(model);
  const std::size_t n = ids.size();
  const std::size_t d = model.config.d_model;

  LossAndGrads out;
  out.scored_tokens = scored;
  if (!model.base_frozen) out.grads.base = ModelWeights::zeros_like(model.config);
  for (const auto& [name, ad] : model.adapters) {
    out.grads.adapters[name] = AdapterGrads{Tensor(ad.a.rows, ad.a.cols), Tensor(ad.b.rows, ad.b.cols)};
  }
  ModelWeights* gw = out.grads.base ? &*out.grads.base : nullptr;
  auto agrad = [&](const adapt::LoraAdapter* a) -> AdapterGrads* {
    return a ? &out.grads.adapters.at(a->target) : nullptr;
  };

  const double inv = 1.0 / static_cast<double>(scored);
  Tensor dlogits(n, model.config.vocab_size);
  double total = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    if (!loss_mask[i]) continue;
    const auto row = t.logits.row(i - 1);
    const double lse = log_sum_exp(row);
    const auto target = static_cast<std::size_t>(ids[i]);
    total += lse - row[target];
    auto drow = dlogits.row(i - 1);
    for (std::size_t c = 0; c < row.size(); ++c) drow[c] = std::exp(row[c] - lse) * inv;
    drow[target] -= inv;
  }
  out.loss = total * inv;

  Tensor dhf(n, d);
  linear_backward(t.hf, dlogits, w.lm_head, nullptr, Tensor(), dhf, gw ? &gw->lm_head : nullptr,
                  nullptr, nullptr);
  Tensor dx(n, d);
  layernorm_backward(dhf, w.final_gain, t.lnf, dx, gw ? &gw->final_gain : nullptr,
                     gw ? &gw->final_bias : nullptr);

  for (std::size_t l = model.config.n_layers; l-- > 0;) {
    const auto& L = w.layers[l];
    const auto& A = adapters[l];
    const auto& tr = t.layers[l];
    LayerWeights* G = gw ? &gw->layers[l] : nullptr;

    Tensor dact(n, model.config.d_ff);
    linear_backward(tr.act, dx, L.w_down, A.w_down, tr.z_down, dact, G ? &G->w_down : nullptr,
                    G ? &G->b_down : nullptr, agrad(A.w_down));
    for (std::size_t i = 0; i < dact.size(); ++i) dact.data[i] *= gelu_grad(tr.up.data[i]);
    Tensor dh2(n, d);
    linear_backward(tr.h2, dact, L.w_up, A.w_up, tr.z_up, dh2, G ? &G->w_up : nullptr,
                    G ? &G->b_up : nullptr, agrad(A.w_up));
    layernorm_backward(dh2, L.ln2_gain, tr.ln2, dx, G ? &G->ln2_gain : nullptr,
                       G ? &G->ln2_bias : nullptr);

    Tensor dattn(n, d);
    linear_backward(tr.attn, dx, L.wo, A.wo, tr.zo, dattn, G ? &G->wo : nullptr, nullptr,
                    agrad(A.wo));
    Tensor dq, dk, dv;
    attention_backward(tr.q, tr.k, tr.v, tr.probs, dattn, dq, dk, dv);
    Tensor dh1(n, d);
    linear_backward(tr.h1, dq, L.wq, A.wq, tr.zq, dh1, G ? &G->wq : nullptr, nullptr, agrad(A.wq));
    linear_backward(tr.h1, dk, L.wk, A.wk, tr.zk, dh1, G ? &G->wk : nullptr, nullptr, agrad(A.wk));
    linear_backward(tr.h1, dv, L.wv, A.wv, tr.zv, dh1, G ? &G->wv : nullptr, nullptr, agrad(A.wv));
    layernorm_backward(dh1, L.ln1_gain, tr.ln1, dx, G ? &G->ln1_gain : nullptr,
                       G ? &G->ln1_bias : nullptr);
  }

  if (gw) {
    for (std::size_t i = 0; i < n; ++i) {
      simd::axpy(1.0, dx.row(i), gw->token_embedding.row(static_cast<std::size_t>(ids[i])));
      simd::axpy(1.0, dx.row(i), gw->position_embedding.row(i));
    }
  }
  return out;
}

IncrementalDecoder::IncrementalDecoder(const Model& model) : model_(model) {
  model.config.validate();
  keys_.assign(model.config.n_layers, Tensor(model.config.context_len, model.config.d_model));
  values_ = keys_;
}

std::vector<double> IncrementalDecoder::step(TokenId id) {
  const auto& cfg = model_.config;
  if (full()) throw Error(ErrorCode::kRange, "decoder context is full");
  if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size) {
    throw Error(ErrorCode::kRange, "token id " + std::to_string(id) + " outside vocabulary");
  }
  const auto& w = model_.weights;
  const auto adapters = resolve_adapters(model_);
  const std::size_t d = cfg.d_model;
  const std::size_t pos = length_;
  const std::size_t hd = cfg.head_dim();

  std::vector<double> x(d), h(d), xhat(d), q(d), attn(d), tmp(d);
  std::vector<double> z(64);
  auto zspan = [&](const adapt::LoraAdapter* a) {
    if (a && z.size() < a->rank) z.resize(a->rank);
    return a ? std::span<double>(z.data(), a->rank) : std::span<double>();
  };
  double rstd = 0.0;
  const auto te = w.token_embedding.row(static_cast<std::size_t>(id));
  const auto pe = w.position_embedding.row(pos);
  for (std::size_t c = 0; c < d; ++c) x[c] = te[c] + pe[c];

  std::vector<double> p(pos + 1);
  std::vector<double> up(cfg.d_ff), act(cfg.d_ff);
  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    const auto& L = w.layers[l];
    const auto& A = adapters[l];
    layernorm_row(x, L.ln1_gain.row(0), L.ln1_bias.row(0), h, xhat, rstd);
    linear_row(h, L.wq, nullptr, A.wq, q, zspan(A.wq));
    linear_row(h, L.wk, nullptr, A.wk, keys_[l].row(pos), zspan(A.wk));
    linear_row(h, L.wv, nullptr, A.wv, values_[l].row(pos), zspan(A.wv));
    std::fill(attn.begin(), attn.end(), 0.0);
    for (std::size_t head = 0; head < cfg.n_heads; ++head) {
      attend_row(q, keys_[l], values_[l], pos, head, hd, p, attn);
    }
    linear_row(attn, L.wo, nullptr, A.wo, tmp, zspan(A.wo));
    for (std::size_t c = 0; c < d; ++c) x[c] += tmp[c];
    layernorm_row(x, L.ln2_gain.row(0), L.ln2_bias.row(0), h, xhat, rstd);
    linear_row(h, L.w_up, &L.b_up, A.w_up, up, zspan(A.w_up));
    for (std::size_t c = 0; c < up.size(); ++c) act[c] = gelu(up[c]);
    linear_row(act, L.w_down, &L.b_down, A.w_down, tmp, zspan(A.w_down));
    for (std::size_t c = 0; c < d; ++c) x[c] += tmp[c];
  }
  layernorm_row(x, w.final_gain.row(0), w.final_bias.row(0), h, xhat, rstd);
  std::vector<double> logits(cfg.vocab_size);
  linear_row(h, w.lm_head, nullptr, nullptr, logits, {});
  ++length_;
  return logits;
}

}  // namespace rlab::model
