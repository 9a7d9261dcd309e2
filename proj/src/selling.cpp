#include "eikgame/selling.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace eikgame {

namespace {

constexpr int kMaxSellingIterations = 100;

template <int N>
double scalar_product(const Matrix<N>& d, const MultiIndex& a, const MultiIndex& b) {
  double s = 0.0;
  for (int r = 0; r < N; ++r) {
    for (int c = 0; c < N; ++c) s += a[r] * d[r][c] * b[c];
  }
  return s;
}

template <int N>
double trace(const Matrix<N>& d) {
  double t = 0.0;
  for (int r = 0; r < N; ++r) t += d[r][r];
  return t;
}

template <int N>
void require_symmetric(const Matrix<N>& d) {
  const double scale = std::abs(trace<N>(d)) + 1e-300;
  for (int r = 0; r < N; ++r) {
    for (int c = r + 1; c < N; ++c) {
      if (!std::isfinite(d[r][c]) || std::abs(d[r][c] - d[c][r]) > 1e-12 * scale) {
        throw std::invalid_argument("selling: matrix is not symmetric");
      }
    }
  }
}

MultiIndex canonical_sign(MultiIndex e) {
  for (int a = 0; a < 3; ++a) {
    if (e[a] != 0) {
      if (e[a] < 0) e = {-e[0], -e[1], -e[2]};
      break;
    }
  }
  return e;
}

MultiIndex cross(const MultiIndex& a, const MultiIndex& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Makes the superbase obtuse by Selling's algorithm, returning false if the
// iteration budget is exhausted.
template <int N>
bool make_obtuse(const Matrix<N>& d, std::array<MultiIndex, N + 1>& base) {
  const double tol = 1e-14 * std::abs(trace<N>(d));
  for (int iter = 0; iter < kMaxSellingIterations; ++iter) {
    int bi = -1;
    int bj = -1;
    double worst = tol;
    for (int i = 0; i <= N; ++i) {
      for (int j = i + 1; j <= N; ++j) {
        const double s = scalar_product<N>(d, base[i], base[j]);
        if (s > worst) {
          worst = s;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0) return true;
    const MultiIndex ei = base[bi];
    for (int k = 0; k <= N; ++k) {
      if (k == bi || k == bj) continue;
      for (int a = 0; a < 3; ++a) base[k][a] += ei[a];
    }
    for (int a = 0; a < 3; ++a) base[bi][a] = -ei[a];
    if constexpr (N == 2) {
      // In 2D the update reads (-e_i, e_j, e_i - e_j); the loop above produced
      // e_k + e_i = -e_j, fix it up.
      for (int k = 0; k <= N; ++k) {
        if (k == bi || k == bj) continue;
        for (int a = 0; a < 3; ++a) base[k][a] = ei[a] - base[bj][a];
      }
    }
  }
  return false;
}

template <int N>
std::vector<LatticeTerm> selling_terms(const Matrix<N>& d, bool allow_semidefinite) {
  require_symmetric<N>(d);
  if (!allow_semidefinite && !is_positive_definite(d)) {
    throw std::invalid_argument("selling: matrix is not positive definite");
  }
  std::array<MultiIndex, N + 1> base{};
  for (int a = 0; a < N; ++a) {
    base[a] = {0, 0, 0};
    base[a][a] = 1;
  }
  base[N] = {0, 0, 0};
  for (int a = 0; a < N; ++a) base[N][a] = -1;

  if (!make_obtuse<N>(d, base)) {
    throw std::runtime_error("selling: no obtuse superbase within iteration budget");
  }

  std::vector<LatticeTerm> terms;
  for (int i = 0; i <= N; ++i) {
    for (int j = i + 1; j <= N; ++j) {
      const double w = -scalar_product<N>(d, base[i], base[j]);
      if (w <= 0.0) continue;
      MultiIndex e;
      if constexpr (N == 2) {
        const MultiIndex& bk = base[3 - i - j];
        e = {-bk[1], bk[0], 0};
      } else {
        int rest[2];
        int n = 0;
        for (int k = 0; k <= N; ++k) {
          if (k != i && k != j) rest[n++] = k;
        }
        e = cross(base[rest[0]], base[rest[1]]);
      }
      terms.push_back({canonical_sign(e), w, base[i], base[j]});
    }
  }
  return terms;
}

template <int N>
std::vector<OffsetWeight> strip(const std::vector<LatticeTerm>& terms) {
  std::vector<OffsetWeight> out;
  out.reserve(terms.size());
  for (const auto& t : terms) out.push_back({t.offset, t.weight});
  return out;
}

}  // namespace

bool is_positive_definite(const Matrix2& d) {
  const double t = std::abs(d[0][0]) + std::abs(d[1][1]);
  const double det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
  return d[0][0] > 0.0 && det > 1e-14 * t * t;
}

bool is_positive_definite(const Matrix3& d) {
  // Cholesky pivots, relative to the trace.
  const double t = std::abs(d[0][0]) + std::abs(d[1][1]) + std::abs(d[2][2]);
  const double tol = 1e-14 * t;
  const double p0 = d[0][0];
  if (!(p0 > tol)) return false;
  const double l10 = d[1][0] / p0;
  const double l20 = d[2][0] / p0;
  const double p1 = d[1][1] - l10 * d[0][1];
  if (!(p1 > tol)) return false;
  const double m21 = d[2][1] - l20 * d[0][1];
  const double p2 = d[2][2] - l20 * d[0][2] - m21 * m21 / p1;
  return p2 > tol;
}

std::vector<LatticeTerm> selling_terms_2d(const Matrix2& d, bool allow_semidefinite) {
  return selling_terms<2>(d, allow_semidefinite);
}

std::vector<LatticeTerm> selling_terms_3d(const Matrix3& d, bool allow_semidefinite) {
  return selling_terms<3>(d, allow_semidefinite);
}

std::vector<OffsetWeight> selling_decompose_2d(const Matrix2& d) {
  return strip<2>(selling_terms<2>(d, false));
}

std::vector<OffsetWeight> selling_decompose_3d(const Matrix3& d) {
  return strip<3>(selling_terms<3>(d, false));
}

}  // namespace eikgame
