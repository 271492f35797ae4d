#include <cmath>
#include <vector>

#include "doctest.h"
#include "rlab/adapt/nf4.hpp"
#include "rlab/simd/kernels.hpp"
#include "rlab/util/rng.hpp"

using namespace rlab;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * (2.0 * uniform_unit(rng) - 1.0);
  return v;
}

}  // namespace

TEST_CASE("scalar kernels on hand values") {
  const std::vector<double> a{1, 2, 3}, b{4, -5, 6};
  CHECK(simd::scalar::dot(a, b) == 12.0);
  std::vector<double> y{1, 1, 1};
  simd::scalar::axpy(2.0, a, y);
  CHECK(y == std::vector<double>{3, 5, 7});
  CHECK(simd::scalar::max_abs(b) == 6.0);
  CHECK(simd::scalar::max_abs(std::vector<double>{}) == 0.0);
  const std::vector<double> thr{-0.5, 0.0, 0.5};
  const std::vector<double> x{-1.0, -0.5, -0.1, 0.0, 0.2, 0.5, 0.9};
  std::vector<std::uint8_t> codes(x.size());
  simd::scalar::bucketize(x, 1.0, thr, codes);
  // Ties (x == threshold) stay in the lower bucket.
  CHECK(codes == std::vector<std::uint8_t>{0, 0, 1, 1, 2, 2, 3});
}

#if RLAB_HAVE_AVX2_KERNELS
TEST_CASE("avx2 kernels agree with scalar references") {
  if (!simd::isa_available(simd::Isa::kAvx2)) {
    MESSAGE("AVX2 not available on this CPU; skipping equivalence");
    return;
  }
  Rng rng(99);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 63u, 64u, 65u, 257u}) {
    CAPTURE(n);
    const auto a = random_vec(rng, n, 3.0);
    const auto b = random_vec(rng, n, 3.0);
    const double ds = simd::scalar::dot(a, b);
    const double dv = simd::avx2::dot(a, b);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    CHECK(std::abs(ds - dv) <= 1e-14 * (mag + 1.0));

    auto ys = random_vec(rng, n);
    auto yv = ys;
    simd::scalar::axpy(0.37, a, ys);
    simd::avx2::axpy(0.37, a, yv);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ys[i] - yv[i]) <= 1e-15 * (std::abs(ys[i]) + 1.0));

    CHECK(simd::scalar::max_abs(a) == simd::avx2::max_abs(a));

    const auto& thr = adapt::nf4_thresholds();
    const double scale = n ? simd::scalar::max_abs(a) : 1.0;
    std::vector<std::uint8_t> cs(n), cv(n);
    simd::scalar::bucketize(a, scale == 0.0 ? 1.0 : scale, thr, cs);
    simd::avx2::bucketize(a, scale == 0.0 ? 1.0 : scale, thr, cv);
    CHECK(cs == cv);
  }
}

TEST_CASE("avx2 bucketize matches scalar exactly on threshold ties") {
  if (!simd::isa_available(simd::Isa::kAvx2)) return;
  const auto& thr = adapt::nf4_thresholds();
  std::vector<double> x(thr.begin(), thr.end());
  for (double t : thr) {
    x.push_back(std::nextafter(t, 2.0));
    x.push_back(std::nextafter(t, -2.0));
  }
  std::vector<std::uint8_t> cs(x.size()), cv(x.size());
  simd::scalar::bucketize(x, 1.0, thr, cs);
  simd::avx2::bucketize(x, 1.0, thr, cv);
  CHECK(cs == cv);
}
#endif

TEST_CASE("force_isa pins the dispatch") {
  const simd::Isa before = simd::active_isa();
  CHECK(simd::force_isa(simd::Isa::kScalar));
  CHECK(simd::active_isa() == simd::Isa::kScalar);
  CHECK(simd::isa_name(simd::Isa::kScalar) == "scalar");
  if (simd::isa_available(simd::Isa::kAvx2)) {
    CHECK(simd::force_isa(simd::Isa::kAvx2));
    CHECK(simd::active_isa() == simd::Isa::kAvx2);
  } else {
    CHECK_FALSE(simd::force_isa(simd::Isa::kAvx2));
  }
  simd::force_isa(before);
}
