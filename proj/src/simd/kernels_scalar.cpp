#include <cmath>

#include "rlab/simd/kernels.hpp"

namespace rlab::simd::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::fmax(m, std::fabs(v));
  return m;
}

void bucketize(std::span<const double> x, double scale, std::span<const double> thresholds,
               std::span<std::uint8_t> codes) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i] / scale;
    std::uint8_t code = 0;
    for (double t : thresholds) code += static_cast<std::uint8_t>(t < v);
    codes[i] = code;
  }
}

}  // namespace rlab::simd::scalar
