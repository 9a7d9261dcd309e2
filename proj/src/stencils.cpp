#include "eikgame/stencils.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eikgame {

namespace {

Matrix3 zero3() { return Matrix3{}; }

void add_rank_one(Matrix3& m, const MultiIndex& e, double w) {
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m[r][c] += w * e[r] * e[c];
  }
}

double index_dot(const MultiIndex& e, const std::array<double, 3>& v) {
  return e[0] * v[0] + e[1] * v[1] + e[2] * v[2];
}

double index_norm(const MultiIndex& e) {
  return std::sqrt(static_cast<double>(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]));
}

MultiIndex negated(const MultiIndex& e) { return {-e[0], -e[1], -e[2]}; }

// Appends the term oriented so that <e, direction> >= 0. Offsets orthogonal to
// the direction are kept with both signs at full weight.
void push_one_sided(Control& control, const MultiIndex& e, double w,
                    const std::array<double, 3>& direction) {
  const double s = index_dot(e, direction);
  const double dn = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] +
                              direction[2] * direction[2]);
  if (std::abs(s) <= 1e-12 * index_norm(e) * dn) {
    control.entries.push_back({e, w});
    control.entries.push_back({negated(e), w});
  } else {
    control.entries.push_back({s > 0.0 ? e : negated(e), w});
  }
}

Matrix2 spatial_index_tensor(const Matrix2& d, const std::array<double, 3>& steps) {
  Matrix2 out{};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) out[r][c] = d[r][c] / (steps[r] * steps[c]);
  }
  return out;
}

Matrix2 reeds_shepp_spatial(double theta, double epsilon) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double e2 = epsilon * epsilon;
  // n n^T + eps^2 n_perp n_perp^T with n_perp = (-s, c).
  return Matrix2{{{c * c + e2 * s * s, c * s - e2 * c * s}, {c * s - e2 * c * s, s * s + e2 * c * c}}};
}

std::array<double, 3> dubins_direction(const std::array<double, 3>& steps, double theta,
                                       double rho, double sigma) {
  return {std::cos(theta) / steps[0], std::sin(theta) / steps[1], sigma / (rho * steps[2])};
}

Matrix3 dubins_tensor(const std::array<double, 3>& v, double epsilon) {
  const double e2 = epsilon * epsilon;
  const double n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  Matrix3 t{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) t[r][c] = (1.0 - e2) * v[r] * v[c] + (r == c ? e2 * n2 : 0.0);
  }
  return t;
}

Matrix2 inverse(const Matrix2& m) {
  const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  if (!(det > 0.0) || !(m[0][0] > 0.0)) {
    throw std::invalid_argument("stencils: metric is not positive definite");
  }
  return Matrix2{{{m[1][1] / det, -m[0][1] / det}, {-m[1][0] / det, m[0][0] / det}}};
}

}  // namespace

std::string to_string(MobilityModel model) {
  switch (model) {
    case MobilityModel::Isotropic:
      return "isotropic";
    case MobilityModel::Riemannian:
      return "riemannian";
    case MobilityModel::ReedsSheppForward:
      return "reeds_shepp_forward";
    case MobilityModel::Dubins:
      return "dubins";
  }
  return "unknown";
}

MobilityModel parse_mobility_model(const std::string& name) {
  if (name == "isotropic") return MobilityModel::Isotropic;
  if (name == "riemannian") return MobilityModel::Riemannian;
  if (name == "reeds_shepp_forward" || name == "rsf") return MobilityModel::ReedsSheppForward;
  if (name == "dubins") return MobilityModel::Dubins;
  throw std::invalid_argument("unknown mobility model '" + name + "'");
}

bool is_curvature_model(MobilityModel model) {
  return model == MobilityModel::ReedsSheppForward || model == MobilityModel::Dubins;
}

void ModelParams::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("stencils: rho must be > 0");
  if (!(epsilon >= 0.0) || epsilon > 1.0) {
    throw std::invalid_argument("stencils: epsilon must lie in [0, 1]");
  }
  if (!(cost > 0.0) || !std::isfinite(cost)) {
    throw std::invalid_argument("stencils: cost must be positive and finite");
  }
  if (model == MobilityModel::Riemannian && !is_positive_definite(dual_tensor)) {
    throw std::invalid_argument("stencils: dual tensor is not positive definite");
  }
}

Stencil build_stencil(const std::array<double, 3>& steps, double theta, const ModelParams& params) {
  params.validate();
  const double c2 = 1.0 / (params.cost * params.cost);
  Stencil st;
  switch (params.model) {
    case MobilityModel::Isotropic: {
      Control ctl;
      const double wx = c2 / (steps[0] * steps[0]);
      const double wy = c2 / (steps[1] * steps[1]);
      ctl.entries = {{{1, 0, 0}, wx}, {{-1, 0, 0}, wx}, {{0, 1, 0}, wy}, {{0, -1, 0}, wy}};
      st.controls.push_back(std::move(ctl));
      break;
    }
    case MobilityModel::Riemannian: {
      Control ctl;
      for (const auto& t : selling_terms_2d(spatial_index_tensor(params.dual_tensor, steps))) {
        ctl.entries.push_back({t.offset, t.weight});
        ctl.entries.push_back({negated(t.offset), t.weight});
      }
      st.controls.push_back(std::move(ctl));
      break;
    }
    case MobilityModel::ReedsSheppForward: {
      Control ctl;
      const Matrix2 spatial =
          spatial_index_tensor(reeds_shepp_spatial(theta, params.epsilon), steps);
      const std::array<double, 3> forward{std::cos(theta) / steps[0], std::sin(theta) / steps[1],
                                          0.0};
      for (const auto& t : selling_terms_2d(spatial, params.epsilon == 0.0)) {
        push_one_sided(ctl, t.offset, c2 * t.weight, forward);
      }
      const double wa = c2 / std::pow(params.rho * steps[2], 2);
      ctl.entries.push_back({{0, 0, 1}, wa});
      ctl.entries.push_back({{0, 0, -1}, wa});
      st.controls.push_back(std::move(ctl));
      break;
    }
    case MobilityModel::Dubins: {
      for (const double sigma : {1.0, -1.0}) {
        Control ctl;
        const auto v = dubins_direction(steps, theta, params.rho, sigma);
        for (const auto& t : selling_terms_3d(dubins_tensor(v, params.epsilon),
                                              params.epsilon == 0.0)) {
          push_one_sided(ctl, t.offset, c2 * t.weight, v);
        }
        st.controls.push_back(std::move(ctl));
      }
      break;
    }
  }
  return st;
}

Stencil build_stencil(const Grid& grid, const MultiIndex& node, const ModelParams& params) {
  if (!grid.in_range(node)) throw std::out_of_range("stencils: node out of range");
  if (grid.masked(grid.flat(node))) throw std::invalid_argument("stencils: masked node");
  if (is_curvature_model(params.model) && !grid.has_angle()) {
    throw std::invalid_argument("stencils: curvature model needs an angular axis");
  }
  return build_stencil(grid.steps(), grid.point_of_index(node)[2], params);
}

Matrix3 realized_tensor(const Control& control) {
  Matrix3 m = zero3();
  const auto& es = control.entries;
  for (std::size_t i = 0; i < es.size(); ++i) {
    bool paired = false;
    for (std::size_t j = 0; j < es.size(); ++j) {
      if (j != i && es[j].offset == negated(es[i].offset) &&
          std::abs(es[j].weight - es[i].weight) <= 1e-12 * std::abs(es[i].weight)) {
        paired = true;
        break;
      }
    }
    add_rank_one(m, es[i].offset, paired ? 0.5 * es[i].weight : es[i].weight);
  }
  return m;
}

Matrix3 intended_tensor(const std::array<double, 3>& steps, double theta,
                        const ModelParams& params, int control_index) {
  const double c2 = 1.0 / (params.cost * params.cost);
  Matrix3 m = zero3();
  switch (params.model) {
    case MobilityModel::Isotropic:
      m[0][0] = c2 / (steps[0] * steps[0]);
      m[1][1] = c2 / (steps[1] * steps[1]);
      break;
    case MobilityModel::Riemannian: {
      const Matrix2 d = spatial_index_tensor(params.dual_tensor, steps);
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) m[r][c] = d[r][c];
      }
      break;
    }
    case MobilityModel::ReedsSheppForward: {
      const Matrix2 d = spatial_index_tensor(reeds_shepp_spatial(theta, params.epsilon), steps);
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) m[r][c] = c2 * d[r][c];
      }
      m[2][2] = c2 / std::pow(params.rho * steps[2], 2);
      break;
    }
    case MobilityModel::Dubins: {
      const double sigma = control_index == 0 ? 1.0 : -1.0;
      m = dubins_tensor(dubins_direction(steps, theta, params.rho, sigma), params.epsilon);
      for (auto& row : m) {
        for (auto& v : row) v *= c2;
      }
      break;
    }
  }
  return m;
}

double discrete_hamiltonian(const Stencil& stencil, const std::array<double, 3>& g) {
  double best = 0.0;
  for (const auto& ctl : stencil.controls) {
    double s = 0.0;
    for (const auto& e : ctl.entries) {
      const double d = std::max(0.0, index_dot(e.offset, g));
      s += e.weight * d * d;
    }
    best = std::max(best, s);
  }
  return best;
}

double continuous_hamiltonian(const ModelParams& params, double theta,
                              const std::array<double, 3>& p) {
  const double c2 = 1.0 / (params.cost * params.cost);
  const double pn = p[0] * std::cos(theta) + p[1] * std::sin(theta);
  switch (params.model) {
    case MobilityModel::Isotropic:
      return c2 * (p[0] * p[0] + p[1] * p[1]);
    case MobilityModel::Riemannian: {
      const auto& d = params.dual_tensor;
      return p[0] * (d[0][0] * p[0] + d[0][1] * p[1]) + p[1] * (d[1][0] * p[0] + d[1][1] * p[1]);
    }
    case MobilityModel::ReedsSheppForward: {
      const double a = std::max(0.0, pn);
      return c2 * (a * a + std::pow(p[2] / params.rho, 2));
    }
    case MobilityModel::Dubins: {
      const double a = std::max(0.0, pn + std::abs(p[2]) / params.rho);
      return c2 * a * a;
    }
  }
  return 0.0;
}

StencilDump stencil_dump(const Grid& grid, const ModelParams& params, const MultiIndex& node) {
  StencilDump dump;
  dump.model = params.model;
  dump.node = node;
  dump.stencil = build_stencil(grid, node, params);
  dump.position = grid.point_of_index(node);
  for (std::size_t c = 0; c < dump.stencil.controls.size(); ++c) {
    const Matrix3 realized = realized_tensor(dump.stencil.controls[c]);
    const Matrix3 intended =
        intended_tensor(grid.steps(), dump.position[2], params, static_cast<int>(c));
    double scale = 0.0;
    double err = 0.0;
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 3; ++k) {
        scale = std::max(scale, std::abs(intended[r][k]));
        err = std::max(err, std::abs(realized[r][k] - intended[r][k]));
      }
    }
    dump.reconstruction_error = std::max(dump.reconstruction_error, scale > 0 ? err / scale : err);
    dump.realized.push_back(realized);
    dump.intended.push_back(intended);
  }
  return dump;
}

StencilField StencilField::isotropic(const Grid& grid, std::span<const double> cost) {
  if (cost.size() != grid.size()) throw std::invalid_argument("stencils: cost size mismatch");
  StencilField f;
  f.grid_ = &grid;
  f.model_ = MobilityModel::Isotropic;
  ModelParams p;
  f.geometries_.push_back(build_stencil(grid.steps(), 0.0, p));
  f.geometry_index_.assign(grid.size(), 0);
  f.scale_.resize(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (!(cost[n] > 0.0) || !std::isfinite(cost[n])) {
      throw std::invalid_argument("stencils: cost must be positive and finite");
    }
    f.scale_[n] = 1.0 / (cost[n] * cost[n]);
  }
  return f;
}

StencilField StencilField::riemannian(const Grid& grid, std::span<const Matrix2> metric) {
  if (grid.has_angle()) throw std::invalid_argument("stencils: riemannian model is planar");
  if (metric.size() != grid.planar_size()) {
    throw std::invalid_argument("stencils: metric size mismatch");
  }
  StencilField f;
  f.grid_ = &grid;
  f.model_ = MobilityModel::Riemannian;
  f.geometries_.resize(grid.planar_size());
  f.terms_.resize(grid.planar_size());
  f.geometry_index_.resize(grid.size());
  f.scale_.assign(grid.size(), 1.0);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    f.geometry_index_[n] = static_cast<std::uint32_t>(n);
    if (grid.masked(n)) continue;
    const Matrix2 d = spatial_index_tensor(inverse(metric[n]), grid.steps());
    f.terms_[n] = selling_terms_2d(d);
    Control ctl;
    for (const auto& t : f.terms_[n]) {
      ctl.entries.push_back({t.offset, t.weight});
      ctl.entries.push_back({negated(t.offset), t.weight});
    }
    f.geometries_[n].controls.push_back(std::move(ctl));
  }
  return f;
}

StencilField StencilField::curvature(const Grid& grid, MobilityModel model, double rho,
                                     double epsilon, std::span<const double> cost) {
  if (!is_curvature_model(model)) throw std::invalid_argument("stencils: not a curvature model");
  if (!grid.has_angle()) throw std::invalid_argument("stencils: curvature model needs an angular axis");
  if (cost.size() != grid.size()) throw std::invalid_argument("stencils: cost size mismatch");
  StencilField f;
  f.grid_ = &grid;
  f.model_ = model;
  ModelParams p;
  p.model = model;
  p.rho = rho;
  p.epsilon = epsilon;
  const int nt = grid.dims()[2];
  for (int k = 0; k < nt; ++k) {
    f.geometries_.push_back(build_stencil(grid.steps(), (k + 0.5) * grid.steps()[2], p));
  }
  f.geometry_index_.resize(grid.size());
  f.scale_.resize(grid.size());
  const std::size_t np = grid.planar_size();
  for (std::size_t n = 0; n < grid.size(); ++n) {
    f.geometry_index_[n] = static_cast<std::uint32_t>(n / np);
    if (!(cost[n] > 0.0) || !std::isfinite(cost[n])) {
      throw std::invalid_argument("stencils: cost must be positive and finite");
    }
    f.scale_[n] = 1.0 / (cost[n] * cost[n]);
  }
  return f;
}

Stencil StencilField::stencil(std::size_t node) const {
  Stencil st = geometry_of(node);
  for (auto& ctl : st.controls) {
    for (auto& e : ctl.entries) e.weight *= scale_[node];
  }
  return st;
}

std::array<int, 3> StencilField::max_offset() const {
  std::array<int, 3> m{0, 0, 0};
  for (const auto& g : geometries_) {
    for (const auto& ctl : g.controls) {
      for (const auto& e : ctl.entries) {
        for (int a = 0; a < 3; ++a) m[a] = std::max(m[a], std::abs(e.offset[a]));
      }
    }
  }
  return m;
}

}  // namespace eikgame
