#pragma once

#include <array>
#include <vector>

#include "eikgame/grid.hpp"

namespace eikgame {

template <int N>
using Matrix = std::array<std::array<double, N>, N>;

using Matrix2 = Matrix<2>;
using Matrix3 = Matrix<3>;

/// One rank-one term w * e e^T of a Selling decomposition.
///
/// The weight is the linear form w = -<b_i, D b_j> of the obtuse superbase
/// pair that produced it, which is what lets callers differentiate w with
/// respect to D while the superbase stays frozen.
struct LatticeTerm {
  MultiIndex offset{0, 0, 0};
  double weight = 0.0;
  MultiIndex basis_i{0, 0, 0};
  MultiIndex basis_j{0, 0, 0};
};

struct OffsetWeight {
  MultiIndex offset{0, 0, 0};
  double weight = 0.0;
};

/// Selling decomposition of a symmetric positive definite 2x2 matrix:
/// D = sum w e e^T with at most three coprime offsets and w >= 0.
/// Throws std::invalid_argument for non-SPD input and std::runtime_error when
/// no obtuse superbase is found within 100 iterations.
std::vector<OffsetWeight> selling_decompose_2d(const Matrix2& d);
std::vector<OffsetWeight> selling_decompose_3d(const Matrix3& d);

/// Same decompositions keeping superbase provenance. With
/// `allow_semidefinite` the SPD check is skipped, which is only meaningful for
/// rank-deficient tensors whose range is spanned by lattice vectors.
std::vector<LatticeTerm> selling_terms_2d(const Matrix2& d, bool allow_semidefinite = false);
std::vector<LatticeTerm> selling_terms_3d(const Matrix3& d, bool allow_semidefinite = false);

bool is_positive_definite(const Matrix2& d);
bool is_positive_definite(const Matrix3& d);

}  // namespace eikgame
