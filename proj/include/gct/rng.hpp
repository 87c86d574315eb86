#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "gct/linalg.hpp"

namespace gct {

/// Deterministic random deviates. Box-Muller over the raw mt19937_64 stream,
/// so sequences do not depend on the standard library's distribution
/// implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  double uniform() { return (eng_() >> 11) * (1.0 / 9007199254740992.0); }

  double normal() {
    double u1 = std::max(uniform(), 1e-300);
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  Complex cnormal() { return {normal(), normal()}; }

  CMatrix cmatrix(int rows, int cols) {
    CMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) m(i, j) = cnormal();
    return m;
  }

  CMatrix hermitian(int n) { return herm_part(cmatrix(n, n)); }

  CMatrix psd(int n) {
    CMatrix m = cmatrix(n, n);
    return m * m.adjoint() / n;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace gct
