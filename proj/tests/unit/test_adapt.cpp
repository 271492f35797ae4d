#include <cmath>
#include <limits>

#include "doctest.h"
#include "rlab/adapt/lora.hpp"
#include "rlab/adapt/nf4.hpp"
#include "rlab/model/transformer.hpp"
#include "rlab/util/error.hpp"
#include "support/helpers.hpp"

using namespace rlab;
using namespace rlab::adapt;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected rlab::Error");
  return ErrorCode::kInvalidArgument;
}

void randomize_b(model::Model& m, std::uint64_t seed, double scale) {
  Rng rng(seed);
  for (auto& [name, ad] : m.adapters) {
    for (double& v : ad.b.data) v = scale * standard_normal(rng);
  }
}

std::vector<double> random_block(Rng& rng, std::size_t n) {
  std::vector<double> w(n);
  const double spread = std::exp(4.0 * uniform_unit(rng) - 2.0);
  for (double& v : w) v = spread * standard_normal(rng);
  return w;
}

}  // namespace

// ---- LoRA ---------------------------------------------------------------------

TEST_CASE("lora: zero-initialized B leaves logits exactly unchanged") {
  const model::Model base = model::Model::init(testing::tiny_config(11));
  model::Model adapted = base;
  inject_adapters(adapted, default_targets(2), LoraOptions{4, 8.0, 0.02, 5});
  CHECK(adapted.base_frozen);
  CHECK(adapted.adapters.size() == 4);
  for (const auto& [name, ad] : adapted.adapters) {
    CHECK(ad.a.rows == 4);
    CHECK(ad.b.cols == 4);
    for (double v : ad.b.data) CHECK(v == 0.0);
  }
  Rng rng(3);
  for (int i = 0; i < 8; ++i) {
    const auto ids = testing::random_sequence(rng, 1 + uniform_below(rng, 16), 32);
    CHECK(model::forward(adapted, ids) == model::forward(base, ids));
  }
  CHECK(merge_adapters(adapted).weights == base.weights);
}

TEST_CASE("lora: adapter path equals a dense W + (alpha/r) B A model") {
  model::Model adapted = model::Model::init(testing::tiny_config(12));
  inject_adapters(adapted, {"layers.0.attn.wq", "layers.1.ffn.w_up", "layers.1.attn.wo"},
                  LoraOptions{3, 6.0, 0.3, 9});
  randomize_b(adapted, 4, 0.3);

  model::Model dense = adapted;
  dense.adapters.clear();
  dense.base_frozen = false;
  for (const auto& [name, ad] : adapted.adapters) {
    Tensor& w = *dense.weights.find(name);
    for (std::size_t o = 0; o < w.rows; ++o)
      for (std::size_t i = 0; i < w.cols; ++i) {
        double d = 0;
        for (std::size_t r = 0; r < 3; ++r) d += ad.b(o, r) * ad.a(r, i);
        w(o, i) += 2.0 * d;
      }
  }
  Rng rng(8);
  const auto ids = testing::random_sequence(rng, 16, 32);
  const Tensor a = model::forward(adapted, ids);
  CHECK(testing::max_abs_diff(a, model::forward(dense, ids)) < 1e-12);
  CHECK(testing::max_abs_diff(a, model::forward(merge_adapters(adapted), ids)) < 1e-12);
  CHECK(testing::max_abs_diff(a, model::forward(model::Model::init(testing::tiny_config(12)), ids)) > 1e-6);
}

TEST_CASE("lora: adapter gradients match finite differences, base gets none") {
  model::Model m = model::Model::init(testing::tiny_config(2, 13, 8, 8, 2, 1, 12));
  inject_adapters(m, {"layers.0.attn.wv", "layers.0.ffn.w_down"}, LoraOptions{2, 4.0, 0.3, 1});
  randomize_b(m, 2, 0.2);
  Rng rng(5);
  const auto ids = testing::random_sequence(rng, 8, 13);
  const std::vector<std::uint8_t> mask(8, 1);
  const auto r = model::loss_and_grads(m, ids, mask);
  CHECK_FALSE(r.grads.base.has_value());
  REQUIRE(r.grads.adapters.size() == 2);
  const double h = 1e-5;
  for (auto& [name, ad] : m.adapters) {
    for (int which = 0; which < 2; ++which) {
      Tensor& t = which == 0 ? ad.a : ad.b;
      const Tensor& g = which == 0 ? r.grads.adapters.at(name).a : r.grads.adapters.at(name).b;
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double keep = t.data[i];
        t.data[i] = keep + h;
        const double up = model::sequence_loss(m, ids, mask);
        t.data[i] = keep - h;
        const double down = model::sequence_loss(m, ids, mask);
        t.data[i] = keep;
        CHECK(std::abs((up - down) / (2 * h) - g.data[i]) < 1e-7);
      }
    }
  }
}

TEST_CASE("lora: errors") {
  model::Model m = model::Model::init(testing::tiny_config());
  CHECK(code_of([&] { inject_adapters(m, {"layers.0.attn.wz"}); }) == ErrorCode::kNotFound);
  CHECK(code_of([&] { inject_adapters(m, {"layers.7.attn.wq"}); }) == ErrorCode::kNotFound);
  CHECK(code_of([&] { inject_adapters(m, {"tok_emb"}); }) == ErrorCode::kNotFound);
  CHECK(code_of([&] { inject_adapters(m, {}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { inject_adapters(m, {"layers.0.attn.wq"}, LoraOptions{0}); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(m.adapters.empty());
  CHECK(code_of([&] { merge_adapters(m); }) == ErrorCode::kPrecondition);
  inject_adapters(m, {"layers.0.attn.wq"});
  CHECK(code_of([&] { inject_adapters(m, {"layers.0.attn.wq"}); }) == ErrorCode::kDuplicate);
  const model::Model merged = merge_adapters(m);
  CHECK(code_of([&] { merge_adapters(merged); }) == ErrorCode::kPrecondition);
}

TEST_CASE("lora: seeded A initialization") {
  model::Model a = model::Model::init(testing::tiny_config());
  model::Model b = a;
  inject_adapters(a, default_targets(2));
  inject_adapters(b, default_targets(2));
  CHECK(a.adapters == b.adapters);
  CHECK_FALSE(a.adapters.at("layers.0.attn.wq").a == a.adapters.at("layers.1.attn.wq").a);
}

TEST_CASE("parameter budget") {
  model::Model m = model::Model::init(testing::tiny_config(7, 32, 16, 32, 2, 1, 32));
  const auto before = count_params(m);
  CHECK(before.trainable_params == 0);
  // 32*32 tok + 16*32 pos + layer (2*32 + 4*1024 + 2*32 + 32*32 + 32 + 32*32 + 32) + 2*32 + 32*32
  CHECK(before.total_params == 1024 + 512 + (64 + 4096 + 64 + 1024 + 32 + 1024 + 32) + 64 + 1024);
  inject_adapters(m, {"layers.0.attn.wq"}, LoraOptions{4});
  const auto after = count_params(m);
  CHECK(after.trainable_params == 256);
  CHECK(after.total_params == before.total_params + 256);

  CHECK(ParamBudget{1000000, 12345}.report_line() == "12,345 trainable parameters (1.23% of total)");
  CHECK(ParamBudget{3, 2}.report_line() == "2 trainable parameters (66.67% of total)");
  CHECK(ParamBudget{8, 1}.report_line(0) == "1 trainable parameters (13% of total)");
  CHECK(ParamBudget{8, 1}.report_line(1) == "1 trainable parameters (12.5% of total)");
  CHECK(ParamBudget{1234567000, 1234567}.report_line() ==
        "1,234,567 trainable parameters (0.10% of total)");
  CHECK(ParamBudget{3, 1}.trainable_percent() == doctest::Approx(33.333333333333));
}

// ---- NF4 ----------------------------------------------------------------------

TEST_CASE("nf4: table constants") {
  CHECK(nf4_table_checksum() == 0x38e10558c37c2c71ULL);
  CHECK(std::abs(nf4_max_half_gap() - 0.15190359950065613) < 1e-16);
  CHECK(kNf4Codes[kNf4ZeroCode] == 0.0f);
  for (std::size_t i = 0; i + 1 < kNf4Codes.size(); ++i) CHECK(kNf4Codes[i] < kNf4Codes[i + 1]);
}

TEST_CASE("nf4: every error is within absmax * max_half_gap (1000 blocks)") {
  Rng rng(2024);
  const double gap = nf4_max_half_gap();
  for (int b = 0; b < 1000; ++b) {
    const auto w = random_block(rng, kNf4BlockSize);
    const auto q = nf4_quantize(w);
    const auto back = nf4_dequantize(q);
    const double absmax = q.blocks[0].absmax;
    for (std::size_t i = 0; i < w.size(); ++i) REQUIRE(std::abs(w[i] - back[i]) <= absmax * gap);
  }
}

TEST_CASE("nf4: absmax and code multiples round-trip exactly, second pass is a fixpoint") {
  Rng rng(77);
  for (int b = 0; b < 200; ++b) {
    auto w = random_block(rng, kNf4BlockSize);
    double absmax = 0;
    for (double v : w) absmax = std::max(absmax, std::abs(v));
    for (std::size_t k = 0; k < 16; ++k) w[k * 3] = static_cast<double>(kNf4Codes[k]) * absmax;
    const auto once = nf4_round_trip(w);
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (std::abs(w[i]) == absmax) REQUIRE(once[i] == w[i]);
    }
    for (std::size_t k = 0; k < 16; ++k) REQUIRE(once[k * 3] == w[k * 3]);
    REQUIRE(nf4_round_trip(once) == once);
  }
}

TEST_CASE("nf4: zero block, padding, ties and errors") {
  const std::vector<double> zeros(64, 0.0);
  const auto qz = nf4_quantize(zeros);
  CHECK(qz.blocks[0].absmax == 0.0);
  for (auto c : qz.blocks[0].codes) CHECK(c == kNf4ZeroCode);
  CHECK(nf4_round_trip(zeros) == zeros);

  Rng rng(1);
  const auto w = random_block(rng, 70);
  const auto q = nf4_quantize(w);
  CHECK(q.blocks.size() == 2);
  CHECK(q.pad == 58);
  CHECK(nf4_dequantize(q).size() == 70);

  std::vector<double> tie(64, 0.0);
  tie[0] = 1.0;
  for (std::size_t i = 0; i < 15; ++i) tie[i + 1] = nf4_thresholds()[i];
  const auto qt = nf4_quantize(tie);
  for (std::size_t i = 0; i < 15; ++i) CHECK(qt.blocks[0].codes[i + 1] == i);

  std::vector<double> bad(64, 0.5);
  bad[9] = std::numeric_limits<double>::quiet_NaN();
  CHECK(code_of([&] { nf4_quantize(bad); }) == ErrorCode::kInvalidArgument);
  bad[9] = std::numeric_limits<double>::infinity();
  CHECK(code_of([&] { nf4_quantize(bad); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { nf4_quantize(zeros, 32); }) == ErrorCode::kInvalidArgument);
  auto broken = q;
  broken.length = 10;
  CHECK(code_of([&] { nf4_dequantize(broken); }) == ErrorCode::kInvalidArgument);
}
