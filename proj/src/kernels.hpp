#pragma once

#include <cstdint>

namespace vqssm::kern {

// C (m×n) = or += A (m×k) · B (k×n), all row-major.
template <bool Accumulate>
inline void mm_nn(const double* A, const double* B, double* C, int64_t m, int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    double* ci = C + i * n;
    if (!Accumulate)
      for (int64_t j = 0; j < n; ++j) ci[j] = 0.0;
    const double* ai = A + i * k;
    for (int64_t p = 0; p < k; ++p) {
      const double a = ai[p];
      const double* bp = B + p * n;
      for (int64_t j = 0; j < n; ++j) ci[j] += a * bp[j];
    }
  }
}

// C (m×n) += A (m×k) · Bᵀ where B is (n×k) row-major.
template <bool Accumulate>
inline void mm_nt(const double* A, const double* B, double* C, int64_t m, int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    const double* ai = A + i * k;
    double* ci = C + i * n;
    for (int64_t j = 0; j < n; ++j) {
      const double* bj = B + j * k;
      double s = 0.0;
      for (int64_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      if (Accumulate)
        ci[j] += s;
      else
        ci[j] = s;
    }
  }
}

// C (k×n) += Aᵀ · B where A is (m×k), B is (m×n), both row-major.
template <bool Accumulate>
inline void mm_tn(const double* A, const double* B, double* C, int64_t m, int64_t k, int64_t n) {
  if (!Accumulate)
    for (int64_t i = 0; i < k * n; ++i) C[i] = 0.0;
  for (int64_t p = 0; p < m; ++p) {
    const double* ap = A + p * k;
    const double* bp = B + p * n;
    for (int64_t i = 0; i < k; ++i) {
      const double a = ap[i];
      double* ci = C + i * n;
      for (int64_t j = 0; j < n; ++j) ci[j] += a * bp[j];
    }
  }
}

}  // namespace vqssm::kern
