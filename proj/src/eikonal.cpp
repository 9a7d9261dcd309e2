#include "eikgame/eikonal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <utility>

namespace eikgame {

namespace {

constexpr int kMaxTerms = 32;

struct Term {
  double weight;
  double value;
  std::uint32_t node;
  std::array<std::int8_t, 3> offset;
};

// Same root as solve_control, on the solver's richer term type.
double solve_terms(Term* terms, int n, int* included) {
  for (int i = 1; i < n; ++i) {
    Term t = terms[i];
    int j = i - 1;
    while (j >= 0 && terms[j].value > t.value) {
      terms[j + 1] = terms[j];
      --j;
    }
    terms[j + 1] = t;
  }
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double u = kUnreached;
  int k = 0;
  for (; k < n; ++k) {
    if (k > 0 && u <= terms[k].value) break;
    const double w = terms[k].weight;
    const double v = terms[k].value;
    a += w;
    b += w * v;
    c += w * v * v;
    const double disc = b * b - a * (c - 1.0);
    u = (b + std::sqrt(std::max(disc, 0.0))) / a;
  }
  if (included) *included = k;
  return u;
}

// Reverse adjacency: for each node y, the nodes whose stencil reads y.
struct ReverseGraph {
  std::vector<std::uint32_t> begin;
  std::vector<std::uint32_t> nodes;
};

template <typename Visit>
void for_each_upwind_candidate(const StencilField& field, std::size_t x, Visit&& visit) {
  const Grid& g = field.grid();
  const MultiIndex xi = g.unflat(x);
  MultiIndex yi;
  for (const auto& ctl : field.geometry_of(x).controls) {
    for (const auto& e : ctl.entries) {
      if (!g.shifted(xi, {-e.offset[0], -e.offset[1], -e.offset[2]}, yi)) continue;
      const std::size_t y = g.flat(yi);
      if (!g.masked(y)) visit(y);
    }
  }
}

ReverseGraph build_reverse(const StencilField& field) {
  const Grid& g = field.grid();
  const std::size_t n = g.size();
  ReverseGraph rg;
  rg.begin.assign(n + 1, 0);
  std::vector<std::uint32_t> scratch;
  auto collect = [&](std::size_t x) {
    scratch.clear();
    for_each_upwind_candidate(field, x, [&](std::size_t y) {
      scratch.push_back(static_cast<std::uint32_t>(y));
    });
    std::sort(scratch.begin(), scratch.end());
    scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
  };
  for (std::size_t x = 0; x < n; ++x) {
    if (g.masked(x)) continue;
    collect(x);
    for (auto y : scratch) ++rg.begin[y + 1];
  }
  for (std::size_t i = 0; i < n; ++i) rg.begin[i + 1] += rg.begin[i];
  rg.nodes.resize(rg.begin[n]);
  std::vector<std::uint32_t> fill(rg.begin.begin(), rg.begin.end() - 1);
  for (std::size_t x = 0; x < n; ++x) {
    if (g.masked(x)) continue;
    collect(x);
    for (auto y : scratch) rg.nodes[fill[y]++] = static_cast<std::uint32_t>(x);
  }
  return rg;
}

class Marcher {
 public:
  Marcher(const StencilField& field, SolveResult& res)
      : field_(field), grid_(field.grid()), res_(res) {}

  // Best root over controls against accepted neighbors. When `record` is set
  // the active control's upwind terms are appended to the result.
  double update(std::size_t x, bool record) {
    const MultiIndex xi = grid_.unflat(x);
    const double scale = field_.scale(x);
    const auto& controls = field_.geometry_of(x).controls;
    double best = kUnreached;
    int best_control = -1;
    int best_included = 0;
    Term best_terms[kMaxTerms];
    Term terms[kMaxTerms];
    MultiIndex yi;
    for (std::size_t c = 0; c < controls.size(); ++c) {
      int n = 0;
      for (const auto& e : controls[c].entries) {
        if (!grid_.shifted(xi, {-e.offset[0], -e.offset[1], -e.offset[2]}, yi)) continue;
        const std::size_t y = grid_.flat(yi);
        if (res_.position[y] == SolveResult::kNotAccepted) continue;
        if (n == kMaxTerms) throw std::logic_error("eikonal: stencil too large");
        terms[n++] = {e.weight * scale, res_.values[y], static_cast<std::uint32_t>(y),
                      {static_cast<std::int8_t>(e.offset[0]), static_cast<std::int8_t>(e.offset[1]),
                       static_cast<std::int8_t>(e.offset[2])}};
      }
      if (n == 0) continue;
      int included = 0;
      const double u = solve_terms(terms, n, &included);
      if (u < best) {
        best = u;
        best_control = static_cast<int>(c);
        best_included = included;
        if (record) std::copy(terms, terms + included, best_terms);
      }
    }
    if (record) {
      res_.active_control.push_back(static_cast<std::uint8_t>(std::max(best_control, 0)));
      for (int i = 0; i < best_included; ++i) {
        const double delta = best - best_terms[i].value;
        if (delta > 0.0) {
          res_.edges.push_back({best_terms[i].node, best_terms[i].offset, best_terms[i].weight, delta});
        }
      }
    }
    return best;
  }

  void run(const SeedSet& seeds) {
    using Entry = std::pair<double, std::uint32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    for (const auto& s : seeds) {
      if (s.value < res_.values[s.node]) {
        res_.values[s.node] = s.value;
        res_.is_seed[s.node] = 1;
        heap.push({s.value, static_cast<std::uint32_t>(s.node)});
      }
    }
    const ReverseGraph rg = build_reverse(field_);
    res_.edge_begin.push_back(0);
    while (!heap.empty()) {
      const auto [v, x] = heap.top();
      heap.pop();
      if (res_.position[x] != SolveResult::kNotAccepted || v > res_.values[x]) continue;
      if (res_.is_seed[x]) {
        res_.active_control.push_back(0);
      } else {
        const double u = update(x, true);
        res_.values[x] = std::min(res_.values[x], u);
      }
      res_.position[x] = static_cast<std::uint32_t>(res_.order.size());
      res_.order.push_back(x);
      res_.edge_begin.push_back(static_cast<std::uint32_t>(res_.edges.size()));

      for (std::uint32_t r = rg.begin[x]; r < rg.begin[x + 1]; ++r) {
        const std::uint32_t y = rg.nodes[r];
        if (res_.position[y] != SolveResult::kNotAccepted || res_.is_seed[y]) continue;
        const double u = update(y, false);
        if (u < res_.values[y]) {
          res_.values[y] = u;
          heap.push({u, y});
        }
      }
    }
  }

 private:
  const StencilField& field_;
  const Grid& grid_;
  SolveResult& res_;
};

}  // namespace

double solve_control(std::span<WeightedValue> terms, int* included) {
  std::vector<Term> tmp;
  tmp.reserve(terms.size());
  for (const auto& t : terms) {
    if (!(t.weight > 0.0)) throw std::invalid_argument("eikonal: weights must be positive");
    if (t.value < kUnreached) tmp.push_back({t.weight, t.value, 0, {0, 0, 0}});
  }
  int inc = 0;
  const double u = tmp.empty() ? kUnreached : solve_terms(tmp.data(), static_cast<int>(tmp.size()), &inc);
  std::sort(terms.begin(), terms.end(),
            [](const WeightedValue& a, const WeightedValue& b) { return a.value < b.value; });
  if (included) *included = inc;
  return u;
}

double local_update(const std::vector<std::vector<WeightedValue>>& controls) {
  double best = kUnreached;
  for (const auto& ctl : controls) {
    std::vector<WeightedValue> terms = ctl;
    best = std::min(best, solve_control(terms));
  }
  return best;
}

SolveResult fast_march(const StencilField& field, const SeedSet& seeds) {
  const Grid& g = field.grid();
  const auto mo = field.max_offset();
  if (std::max({mo[0], mo[1], mo[2]}) > 127) {
    throw std::invalid_argument("eikonal: stencil offsets exceed 127");
  }
  SolveResult res;
  res.dims = g.dims();
  res.steps = g.steps();
  res.values.assign(g.size(), kUnreached);
  res.position.assign(g.size(), SolveResult::kNotAccepted);
  res.is_seed.assign(g.size(), 0);
  res.seeds = seeds;
  for (const auto& s : seeds) {
    if (s.node >= g.size()) throw std::invalid_argument("eikonal: seed out of range");
    if (g.masked(s.node)) throw std::invalid_argument("eikonal: masked seed");
    if (!std::isfinite(s.value) || s.value < 0.0) {
      throw std::invalid_argument("eikonal: seed value must be finite and >= 0");
    }
  }
  res.order.reserve(g.free_count());
  Marcher(field, res).run(seeds);
  return res;
}

SeedSet seeds_at_point(const Grid& grid, Vec2 p, double value) {
  const MultiIndex idx = grid.snap({p[0], p[1], 0.0});
  SeedSet seeds;
  for (int k = 0; k < grid.dims()[2]; ++k) {
    seeds.push_back({grid.flat({idx[0], idx[1], k}), value});
  }
  return seeds;
}

}  // namespace eikgame
