#pragma once

// Shared generators and brute-force oracles for the test binaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "reliquant/reliquant.hpp"

namespace testing_support {

using reliquant::BasicEvent;
using reliquant::FaultTree;
using reliquant::Gate;
using reliquant::GateKind;

inline std::string data_path(const std::string& name) { return std::string(RELIQUANT_DATA_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Probability with a mix of shapes: uniform, log-uniform small, and exact 0/1.
inline double random_probability(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> shape(0, 19);
  const int k = shape(rng);
  if (k == 0) return 0.0;
  if (k == 1) return 1.0;
  if (k < 8) return std::pow(10.0, std::uniform_real_distribution<double>(-9.0, -1.0)(rng));
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

struct TreeShape {
  std::size_t max_events = 12;
  int max_depth = 4;
  bool allow_repeats = true;  // events and gates may appear under several parents
};

/// Random coherent AND/OR tree built top-down. Only referenced events are
/// declared, so every node is reachable.
inline FaultTree random_tree(std::mt19937_64& rng, const TreeShape& shape = {},
                             const std::function<double(std::mt19937_64&)>& probability = random_probability) {
  const std::size_t pool = std::uniform_int_distribution<std::size_t>(2, shape.max_events)(rng);
  std::vector<bool> used(pool, false);
  std::vector<std::string> finished_gates;
  std::vector<Gate> gates;
  std::size_t next_fresh = 0;

  std::function<std::string(int)> node = [&](int depth) -> std::string {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const bool leaf = depth >= shape.max_depth || (depth > 0 && u(rng) < 0.4);
    if (leaf) {
      std::size_t e;
      if (shape.allow_repeats) {
        e = std::uniform_int_distribution<std::size_t>(0, pool - 1)(rng);
      } else {
        if (next_fresh >= pool) return {};
        e = next_fresh++;
      }
      used[e] = true;
      return "e" + std::to_string(e);
    }
    if (shape.allow_repeats && depth > 0 && !finished_gates.empty() && u(rng) < 0.15) {
      return finished_gates[std::uniform_int_distribution<std::size_t>(0, finished_gates.size() - 1)(rng)];
    }
    Gate g;
    g.kind = u(rng) < 0.5 ? GateKind::And : GateKind::Or;
    const int arity = std::uniform_int_distribution<int>(2, 3)(rng);
    for (int i = 0; i < arity; ++i) {
      auto c = node(depth + 1);
      if (!c.empty() && std::find(g.children.begin(), g.children.end(), c) == g.children.end()) {
        g.children.push_back(c);
      }
    }
    if (g.children.size() < 2) return g.children.empty() ? std::string{} : g.children[0];
    g.id = "g" + std::to_string(gates.size());
    gates.push_back(g);
    finished_gates.push_back(g.id);
    return g.id;
  };

  std::string top;
  do {
    gates.clear();
    finished_gates.clear();
    std::fill(used.begin(), used.end(), false);
    next_fresh = 0;
    top = node(0);
  } while (top.empty() || top[0] != 'g');

  std::vector<BasicEvent> events;
  for (std::size_t e = 0; e < pool; ++e) {
    if (used[e]) events.push_back({"e" + std::to_string(e), probability(rng), {}});
  }
  return FaultTree(std::move(events), std::move(gates), top);
}

/// Structure function of the tree for one assignment of event states.
inline bool structure(const FaultTree& tree, const std::map<std::string, bool>& state, const std::string& id) {
  auto e = state.find(id);
  if (e != state.end()) return e->second;
  for (const auto& g : tree.gates()) {
    if (g.id != id) continue;
    if (g.kind == GateKind::And) {
      for (const auto& c : g.children) {
        if (!structure(tree, state, c)) return false;
      }
      return true;
    }
    for (const auto& c : g.children) {
      if (structure(tree, state, c)) return true;
    }
    return false;
  }
  throw std::logic_error("unknown node " + id);
}

/// Top-event probability by summing over all 2^n event states.
inline long double truth_table_probability(const FaultTree& tree) {
  const auto& events = tree.events();
  const std::size_t n = events.size();
  long double total = 0.0L;
  long double compensation = 0.0L;
  std::map<std::string, bool> state;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    long double weight = 1.0L;
    for (std::size_t i = 0; i < n; ++i) {
      const bool failed = (mask >> i) & 1;
      state[events[i].id] = failed;
      weight *= failed ? static_cast<long double>(events[i].probability)
                       : 1.0L - static_cast<long double>(events[i].probability);
    }
    if (weight == 0.0L || !structure(tree, state, tree.top())) continue;
    const long double y = weight - compensation;
    const long double t = total + y;
    compensation = (t - total) - y;
    total = t;
  }
  return total;
}

/// Brute-force minimal cut sets: every minimal failing subset of events.
inline std::vector<std::vector<std::string>> brute_force_cut_sets(const FaultTree& tree) {
  const auto& events = tree.events();
  const std::size_t n = events.size();
  std::vector<std::uint64_t> failing;
  std::map<std::string, bool> state;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t i = 0; i < n; ++i) state[events[i].id] = (mask >> i) & 1;
    if (structure(tree, state, tree.top())) failing.push_back(mask);
  }
  std::vector<std::vector<std::string>> minimal;
  for (const auto m : failing) {
    bool is_minimal = true;
    for (const auto o : failing) {
      if (o != m && (o & m) == o) {
        is_minimal = false;
        break;
      }
    }
    if (!is_minimal) continue;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) {
      if ((m >> i) & 1) ids.push_back(events[i].id);
    }
    minimal.push_back(ids);
  }
  std::sort(minimal.begin(), minimal.end());
  return minimal;
}

inline double relative_error(long double actual, long double expected) {
  if (expected == 0.0L) return static_cast<double>(std::fabs(actual));
  return static_cast<double>(std::fabs(actual - expected) / std::fabs(expected));
}

}  // namespace testing_support
