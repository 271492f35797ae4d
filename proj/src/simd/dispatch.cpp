#include <atomic>
#include <cstdlib>
#include <string>

#include "rlab/simd/kernels.hpp"

namespace rlab::simd {

namespace {

struct KernelTable {
  double (*dot)(std::span<const double>, std::span<const double>);
  void (*axpy)(double, std::span<const double>, std::span<double>);
  double (*max_abs)(std::span<const double>);
  void (*bucketize)(std::span<const double>, double, std::span<const double>,
                    std::span<std::uint8_t>);
};

constexpr KernelTable kScalarTable{&scalar::dot, &scalar::axpy, &scalar::max_abs,
                                   &scalar::bucketize};
#if RLAB_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2Table{&avx2::dot, &avx2::axpy, &avx2::max_abs, &avx2::bucketize};
#endif

bool cpu_has_avx2() {
#if RLAB_HAVE_AVX2_KERNELS
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect_default() {
  if (const char* env = std::getenv("RLAB_ISA")) {
    if (std::string(env) == "scalar") return Isa::kScalar;
  }
  return cpu_has_avx2() ? Isa::kAvx2 : Isa::kScalar;
}

const KernelTable* table_for(Isa isa) {
#if RLAB_HAVE_AVX2_KERNELS
  if (isa == Isa::kAvx2) return &kAvx2Table;
#endif
  (void)isa;
  return &kScalarTable;
}

struct Dispatch {
  std::atomic<Isa> isa;
  std::atomic<const KernelTable*> table;
  Dispatch() : isa(detect_default()), table(table_for(isa.load())) {}
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) { return isa == Isa::kScalar || cpu_has_avx2(); }

Isa active_isa() { return dispatch().isa.load(); }

bool force_isa(Isa isa) {
  if (!isa_available(isa)) return false;
  dispatch().isa.store(isa);
  dispatch().table.store(table_for(isa));
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return dispatch().table.load(std::memory_order_relaxed)->dot(a, b);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  dispatch().table.load(std::memory_order_relaxed)->axpy(alpha, x, y);
}

double max_abs(std::span<const double> x) {
  return dispatch().table.load(std::memory_order_relaxed)->max_abs(x);
}

void bucketize(std::span<const double> x, double scale, std::span<const double> thresholds,
               std::span<std::uint8_t> codes) {
  dispatch().table.load(std::memory_order_relaxed)->bucketize(x, scale, thresholds, codes);
}

}  // namespace rlab::simd
