#include "eikgame/adjoint.hpp"

#include <cmath>
#include <stdexcept>

namespace eikgame {

namespace {

// Per-edge d ln c from a callback, c = sqrt(w).
template <typename EdgeLogRate>
std::vector<double> propagate_tangent(const SolveResult& res, EdgeLogRate&& dlnc) {
  std::vector<double> du(res.values.size(), 0.0);
  for (std::size_t pos = 0; pos < res.order.size(); ++pos) {
    const std::size_t x = res.order[pos];
    if (res.is_seed[x]) continue;
    double num = 0.0;
    double den = 0.0;
    const std::size_t base = res.edge_begin[pos];
    const auto edges = res.edges_at(pos);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const auto& e = edges[k];
      const double om = e.omega();
      num += om * (du[e.neighbor] - e.delta * dlnc(x, base + k));
      den += om;
    }
    du[x] = den > 0.0 ? num / den : 0.0;
  }
  return du;
}

}  // namespace

std::vector<double> forward_diff(const SolveResult& res, std::span<const double> dlog_cost) {
  if (dlog_cost.size() != res.values.size()) {
    throw std::invalid_argument("adjoint: perturbation size mismatch");
  }
  return propagate_tangent(res, [&](std::size_t x, std::size_t) { return -dlog_cost[x]; });
}

std::vector<double> forward_diff_weights(const SolveResult& res, std::span<const double> dweight) {
  if (dweight.size() != res.edges.size()) {
    throw std::invalid_argument("adjoint: perturbation size mismatch");
  }
  return propagate_tangent(res, [&](std::size_t, std::size_t k) {
    return 0.5 * dweight[k] / res.edges[k].weight;
  });
}

SensitivityField reverse_diff(const SolveResult& res, const TargetFunctional& target) {
  SensitivityField out;
  out.adjoint.assign(res.values.size(), 0.0);
  out.per_node.assign(res.values.size(), 0.0);
  out.per_edge.assign(res.edges.size(), 0.0);
  for (const auto& [node, coeff] : target.terms) {
    if (node >= res.values.size() || !res.accepted(node)) {
      throw std::invalid_argument("adjoint: target node was not accepted");
    }
    if (!std::isfinite(coeff)) throw std::invalid_argument("adjoint: non-finite coefficient");
    out.adjoint[node] += coeff;
  }
  auto& lambda = out.adjoint;
  for (std::size_t pos = res.order.size(); pos-- > 0;) {
    const std::size_t x = res.order[pos];
    const double lx = lambda[x];
    if (lx == 0.0 || res.is_seed[x]) continue;
    const auto edges = res.edges_at(pos);
    double sum_omega = 0.0;
    double sum_omega_delta = 0.0;
    for (const auto& e : edges) {
      sum_omega += e.omega();
      sum_omega_delta += e.omega() * e.delta;
    }
    if (!(sum_omega > 0.0)) continue;
    out.per_node[x] = lx * sum_omega_delta / sum_omega;
    const std::size_t base = res.edge_begin[pos];
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const auto& e = edges[k];
      out.per_edge[base + k] = -lx * e.delta * e.delta / (2.0 * sum_omega);
      lambda[e.neighbor] += lx * e.omega() / sum_omega;
    }
  }
  return out;
}

std::vector<Matrix2> metric_sensitivity(const SolveResult& res, const StencilField& field,
                                        const SensitivityField& sens,
                                        std::span<const Matrix2> metric) {
  if (field.model() != MobilityModel::Riemannian) {
    throw std::invalid_argument("adjoint: metric sensitivity needs a riemannian field");
  }
  const Grid& g = field.grid();
  if (metric.size() != g.planar_size()) throw std::invalid_argument("adjoint: metric size mismatch");
  const auto& h = g.steps();
  std::vector<Matrix2> out(g.planar_size(), Matrix2{});
  for (std::size_t pos = 0; pos < res.order.size(); ++pos) {
    const std::size_t x = res.order[pos];
    if (res.is_seed[x]) continue;
    const auto& terms = field.selling_terms(field.geometry_index(x));
    // dJ/dD in index coordinates.
    Matrix2 gidx{};
    bool any = false;
    const std::size_t base = res.edge_begin[pos];
    const auto edges = res.edges_at(pos);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const double t = sens.per_edge[base + k];
      if (t == 0.0) continue;
      const auto& o = edges[k].offset;
      const LatticeTerm* term = nullptr;
      for (const auto& cand : terms) {
        if ((cand.offset[0] == o[0] && cand.offset[1] == o[1]) ||
            (cand.offset[0] == -o[0] && cand.offset[1] == -o[1])) {
          term = &cand;
          break;
        }
      }
      if (!term) throw std::logic_error("adjoint: edge without selling term");
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
          gidx[r][c] -= 0.5 * t *
                        (term->basis_i[r] * term->basis_j[c] + term->basis_j[r] * term->basis_i[c]);
        }
      }
      any = true;
    }
    if (!any) continue;
    Matrix2 gphys{};
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) gphys[r][c] = gidx[r][c] / (h[r] * h[c]);
    }
    const Matrix2& m = metric[x];
    const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    const Matrix2 d{{{m[1][1] / det, -m[0][1] / det}, {-m[1][0] / det, m[0][0] / det}}};
    // dJ/dM = -D (dJ/dD) D.
    Matrix2 tmp{};
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) tmp[r][c] = gphys[r][0] * d[0][c] + gphys[r][1] * d[1][c];
    }
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) out[x][r][c] = -(d[r][0] * tmp[0][c] + d[r][1] * tmp[1][c]);
    }
  }
  return out;
}

}  // namespace eikgame
