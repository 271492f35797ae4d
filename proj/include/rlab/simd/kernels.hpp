#pragma once

// Data-parallel inner loops used by the model and the NF4 codec.
//
// Each kernel has a scalar reference implementation and an AVX2+FMA variant.
// The active set is chosen once at startup from CPUID; RLAB_ISA=scalar in the
// environment (or force_isa) pins the scalar path, which is what golden
// tensors are recorded against.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace rlab::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);
Isa active_isa();
// Returns false (and leaves the dispatch unchanged) if isa is unavailable.
bool force_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double max_abs(std::span<const double> x);
// codes[i] = number of thresholds strictly below x[i] / scale.
// thresholds must be sorted ascending and hold at most 15 entries.
void bucketize(std::span<const double> x, double scale, std::span<const double> thresholds,
               std::span<std::uint8_t> codes);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double max_abs(std::span<const double> x);
void bucketize(std::span<const double> x, double scale, std::span<const double> thresholds,
               std::span<std::uint8_t> codes);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define RLAB_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double max_abs(std::span<const double> x);
void bucketize(std::span<const double> x, double scale, std::span<const double> thresholds,
               std::span<std::uint8_t> codes);
}  // namespace avx2
#else
#define RLAB_HAVE_AVX2_KERNELS 0
#endif

}  // namespace rlab::simd
