#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eikgame/grid.hpp"
#include "eikgame/selling.hpp"

namespace eikgame {

enum class MobilityModel { Isotropic, Riemannian, ReedsSheppForward, Dubins };

std::string to_string(MobilityModel model);
/// Accepts "isotropic", "riemannian", "reeds_shepp_forward", "dubins".
MobilityModel parse_mobility_model(const std::string& name);
bool is_curvature_model(MobilityModel model);

struct StencilEntry {
  MultiIndex offset{0, 0, 0};
  double weight = 0.0;
};

/// One control of the local equation: sum_e w (U(x) - U(x - e))_+^2.
struct Control {
  std::vector<StencilEntry> entries;
};

/// The local equation takes the max of the controls' quadratic forms, so the
/// solver keeps the min over controls of their roots.
struct Stencil {
  std::vector<Control> controls;
};

struct ModelParams {
  MobilityModel model = MobilityModel::Isotropic;
  double rho = 0.3;
  /// Relaxation of the degenerate curvature Hamiltonians. 0 is accepted only
  /// when the resulting rank-deficient tensor is spanned by lattice vectors.
  double epsilon = 0.1;
  /// Scalar cost C at the node (ignored by the Riemannian model).
  double cost = 1.0;
  /// Riemannian dual tensor D = M^{-1} in physical coordinates.
  Matrix2 dual_tensor{{{1.0, 0.0}, {0.0, 1.0}}};

  void validate() const;
};

/// Stencil in index coordinates for a node with angle `theta` (unused by the
/// planar models) on a lattice with the given per-axis steps.
Stencil build_stencil(const std::array<double, 3>& steps, double theta, const ModelParams& params);

/// Grid-aware overload: rejects masked nodes and reads theta off the grid.
Stencil build_stencil(const Grid& grid, const MultiIndex& node, const ModelParams& params);

/// Quadratic form realized by a control, sum w e e^T, with a +-e pair of
/// equal weights counted once since (a)_+^2 + (-a)_+^2 = a^2.
Matrix3 realized_tensor(const Control& control);

/// Dual tensor (index coordinates) a control is meant to reproduce.
Matrix3 intended_tensor(const std::array<double, 3>& steps, double theta,
                        const ModelParams& params, int control_index);

/// max over controls of sum w <e, g>_+^2 for an index-coordinate covector g.
double discrete_hamiltonian(const Stencil& stencil, const std::array<double, 3>& g);

/// Exact 2 H(x, p) of the (unrelaxed) model for a physical covector p.
double continuous_hamiltonian(const ModelParams& params, double theta,
                              const std::array<double, 3>& p);

struct StencilDump {
  MobilityModel model = MobilityModel::Isotropic;
  MultiIndex node{0, 0, 0};
  Point position{0.0, 0.0, 0.0};
  Stencil stencil;
  std::vector<Matrix3> realized;
  std::vector<Matrix3> intended;
  /// Max relative deviation between realized and intended tensors.
  double reconstruction_error = 0.0;
};

StencilDump stencil_dump(const Grid& grid, const ModelParams& params, const MultiIndex& node);

/// Per-node stencils for a whole grid, stored as a small set of shared
/// geometries times a per-node weight scale.
class StencilField {
 public:
  /// Planar or curvature-free isotropic model with per-node cost (grid.size()).
  static StencilField isotropic(const Grid& grid, std::span<const double> cost);

  /// Riemannian model from per-planar-node metric tensors M (dual D = M^{-1}).
  static StencilField riemannian(const Grid& grid, std::span<const Matrix2> metric);

  /// Reeds-Shepp forward or Dubins on a grid with angular axis; per-node cost.
  static StencilField curvature(const Grid& grid, MobilityModel model, double rho,
                                double epsilon, std::span<const double> cost);

  const Grid& grid() const { return *grid_; }
  MobilityModel model() const { return model_; }

  const Stencil& geometry_of(std::size_t node) const {
    return geometries_[geometry_index_[node]];
  }
  std::uint32_t geometry_index(std::size_t node) const { return geometry_index_[node]; }
  double scale(std::size_t node) const { return scale_[node]; }
  std::size_t geometry_count() const { return geometries_.size(); }

  /// Scaled stencil of a node, for diagnostics.
  Stencil stencil(std::size_t node) const;

  /// Riemannian only: Selling terms behind geometry `g`. Entry 2t and 2t+1 of
  /// the single control are the +e and -e copies of term t.
  const std::vector<LatticeTerm>& selling_terms(std::size_t g) const { return terms_[g]; }

  std::array<int, 3> max_offset() const;

 private:
  StencilField() = default;

  const Grid* grid_ = nullptr;
  MobilityModel model_ = MobilityModel::Isotropic;
  std::vector<Stencil> geometries_;
  std::vector<std::uint32_t> geometry_index_;
  std::vector<double> scale_;
  std::vector<std::vector<LatticeTerm>> terms_;
};

}  // namespace eikgame
