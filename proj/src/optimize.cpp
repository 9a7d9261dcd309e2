#include "eikgame/optimize.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "eikgame/error.hpp"

namespace eikgame {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

struct Pair {
  std::vector<double> s;
  std::vector<double> y;
};

// Width of the band next to a bound inside which a variable counts as active.
constexpr double kActiveBand = 1e-3;

}  // namespace

std::string to_string(AscentStop stop) {
  switch (stop) {
    case AscentStop::IterationBudget:
      return "iteration_budget";
    case AscentStop::Converged:
      return "converged";
    case AscentStop::LineSearchFailure:
      return "line_search_failure";
  }
  return "unknown";
}

void AscentConfig::validate(std::size_t dimension) const {
  if (memory < 1) throw std::invalid_argument("optimize: memory must be >= 1");
  if (max_iterations < 0) throw std::invalid_argument("optimize: max_iterations must be >= 0");
  if (!(gradient_tolerance > 0.0)) throw std::invalid_argument("optimize: tolerance must be > 0");
  if (!(armijo > 0.0 && armijo < 1.0)) throw std::invalid_argument("optimize: armijo must lie in (0,1)");
  if (!(backtrack > 0.0 && backtrack < 1.0)) {
    throw std::invalid_argument("optimize: backtrack factor must lie in (0,1)");
  }
  if (lower.size() != dimension || upper.size() != dimension) {
    throw std::invalid_argument("optimize: bounds dimension mismatch");
  }
  for (std::size_t i = 0; i < dimension; ++i) {
    if (!(lower[i] <= upper[i])) throw std::invalid_argument("optimize: lower bound above upper bound");
  }
}

double projected_gradient_norm(std::span<const double> x, std::span<const double> g,
                               std::span<const double> lower, std::span<const double> upper) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = std::clamp(x[i] + g[i], lower[i], upper[i]) - x[i];
    s += d * d;
  }
  return std::sqrt(s);
}

AscentResult maximize(const Objective& f, std::vector<double> x0, const AscentConfig& cfg) {
  const std::size_t n = x0.size();
  cfg.validate(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (x0[i] < cfg.lower[i] || x0[i] > cfg.upper[i]) {
      throw std::invalid_argument("optimize: starting point violates the bounds");
    }
  }

  AscentResult res;
  res.x = std::move(x0);
  auto [value, grad] = f(res.x);
  ++res.evaluations;
  if (!std::isfinite(value)) throw NumericalError("optimize: objective is not finite at the start");
  res.value = value;
  res.history.push_back({0, value, 0.0, projected_gradient_norm(res.x, grad, cfg.lower, cfg.upper)});

  std::deque<Pair> memory;
  std::vector<double> dir(n);
  std::vector<double> trial(n);
  std::vector<std::uint8_t> fixed(n);
  res.stop = AscentStop::IterationBudget;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    if (res.history.back().gradient_norm < cfg.gradient_tolerance) {
      res.stop = AscentStop::Converged;
      break;
    }
    // Variables near a bound with an outward gradient take a scaled gradient
    // step; the quasi-Newton model only acts on the remaining free ones.
    const double eps = std::min(kActiveBand, res.history.back().gradient_norm);
    for (std::size_t i = 0; i < n; ++i) {
      fixed[i] = (res.x[i] <= cfg.lower[i] + eps && grad[i] < 0.0) ||
                 (res.x[i] >= cfg.upper[i] - eps && grad[i] > 0.0);
    }
    const auto fdot = [&](const std::vector<double>& a, const std::vector<double>& b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!fixed[i]) s += a[i] * b[i];
      }
      return s;
    };
    // Two-loop recursion on the minimization of -f, restricted to free variables.
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = fixed[i] ? 0.0 : -grad[i];
    std::vector<double> alpha(memory.size());
    std::vector<double> rho(memory.size());
    bool usable = true;
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const double sy = fdot(memory[k].s, memory[k].y);
      usable = usable && sy > 0.0;
      rho[k] = sy > 0.0 ? 1.0 / sy : 0.0;
    }
    if (!usable) memory.clear();
    for (std::size_t k = memory.size(); k-- > 0;) {
      alpha[k] = rho[k] * fdot(memory[k].s, q);
      for (std::size_t i = 0; i < n; ++i) {
        if (!fixed[i]) q[i] -= alpha[k] * memory[k].y[i];
      }
    }
    double gamma = 1.0;
    if (!memory.empty()) {
      const auto& last = memory.back();
      gamma = fdot(last.s, last.y) / fdot(last.y, last.y);
    }
    for (auto& v : q) v *= gamma;
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const double beta = rho[k] * fdot(memory[k].y, q);
      for (std::size_t i = 0; i < n; ++i) {
        if (!fixed[i]) q[i] += (alpha[k] - beta) * memory[k].s[i];
      }
    }
    for (std::size_t i = 0; i < n; ++i) dir[i] = fixed[i] ? gamma * grad[i] : -q[i];
    if (!(dot(dir, grad) > 0.0)) {
      memory.clear();
      dir = grad;
    }
    const double dn = norm(dir);
    if (!(dn > 0.0)) {
      res.stop = AscentStop::Converged;
      break;
    }
    double step = memory.empty() ? std::min(1.0, 1.0 / dn) : 1.0;

    bool accepted = false;
    double new_value = 0.0;
    std::vector<double> new_grad;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt, step *= cfg.backtrack) {
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = std::clamp(res.x[i] + step * dir[i], cfg.lower[i], cfg.upper[i]);
      }
      double moved = 0.0;
      double predicted = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        moved = std::max(moved, std::abs(trial[i] - res.x[i]));
        predicted += grad[i] * (trial[i] - res.x[i]);
      }
      if (moved == 0.0) break;
      auto [fv, gv] = f(trial);
      ++res.evaluations;
      if (std::isfinite(fv) && fv >= res.value &&
          fv >= res.value + cfg.armijo * std::max(predicted, 0.0)) {
        accepted = true;
        new_value = fv;
        new_grad = std::move(gv);
        break;
      }
    }
    if (!accepted) {
      res.stop = AscentStop::LineSearchFailure;
      break;
    }

    Pair p;
    p.s.resize(n);
    p.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = trial[i] - res.x[i];
      p.y[i] = -(new_grad[i] - grad[i]);
    }
    const double sy = dot(p.s, p.y);
    if (sy > 1e-12 * norm(p.s) * norm(p.y)) {
      memory.push_back(std::move(p));
      if (static_cast<int>(memory.size()) > cfg.memory) memory.pop_front();
    }
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) moved += std::pow(trial[i] - res.x[i], 2);
    res.x = trial;
    res.value = new_value;
    grad = std::move(new_grad);
    res.history.push_back(
        {it, res.value, std::sqrt(moved), projected_gradient_norm(res.x, grad, cfg.lower, cfg.upper)});
  }
  return res;
}

}  // namespace eikgame
