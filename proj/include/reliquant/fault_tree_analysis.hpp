#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reliquant/error.hpp"
#include "reliquant/fault_tree.hpp"
#include "reliquant/numeric.hpp"

namespace reliquant {

/// Minimal cut set as event ids, sorted ascending.
struct CutSet {
  std::vector<std::string> events;

  auto operator<=>(const CutSet&) const = default;
  bool operator==(const CutSet&) const = default;
};

enum class Method { Exact, RareEvent };

struct AnalysisLimits {
  std::size_t max_cut_sets = 1'000'000;
  std::size_t max_inclusion_exclusion_terms = std::size_t{1} << 20;
};

struct ImportanceEntry {
  std::string event;
  double birnbaum = 0.0;
  double fussell_vesely = 0.0;
};

struct ImportanceReport {
  std::vector<ImportanceEntry> entries;  // in event id order
  std::vector<std::string> ranking;      // FV descending, ties by id ascending
};

namespace detail {

using IndexSet = std::vector<std::uint32_t>;

// Sorts, dedupes and removes every set that is a superset of another.
inline void absorb(std::vector<IndexSet>& sets) {
  std::sort(sets.begin(), sets.end(), [](const IndexSet& a, const IndexSet& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  std::vector<IndexSet> kept;
  kept.reserve(sets.size());
  for (auto& candidate : sets) {
    const bool subsumed = std::any_of(kept.begin(), kept.end(), [&](const IndexSet& k) {
      return k.size() < candidate.size() &&
             std::includes(candidate.begin(), candidate.end(), k.begin(), k.end());
    });
    if (!subsumed) kept.push_back(std::move(candidate));
  }
  std::sort(kept.begin(), kept.end());
  sets = std::move(kept);
}

class CutSetExpander {
 public:
  CutSetExpander(const FaultTree& tree, std::size_t cap)
      : tree_(tree), cap_(cap), memo_(tree.gates().size()), done_(tree.gates().size(), false) {}

  std::vector<IndexSet> expand(NodeRef node) {
    if (!node.is_gate) return {IndexSet{static_cast<std::uint32_t>(node.index)}};
    // Gates are stored children-first, so a single forward pass fills the memo.
    for (std::size_t g = 0; g <= node.index; ++g) {
      if (!done_[g]) expand_gate(g);
    }
    return memo_[node.index];
  }

 private:
  void check(std::size_t count) const {
    if (count > cap_) {
      throw CutSetLimitError("cut set expansion exceeded cap of " + std::to_string(cap_) +
                             " intermediate sets");
    }
  }

  const std::vector<IndexSet>& child_sets(NodeRef c, std::vector<IndexSet>& scratch) {
    if (c.is_gate) return memo_[c.index];
    scratch = {IndexSet{static_cast<std::uint32_t>(c.index)}};
    return scratch;
  }

  void expand_gate(std::size_t g) {
    const auto& gate = tree_.gates()[g];
    const auto& children = tree_.children(g);
    std::vector<IndexSet> scratch;
    std::vector<IndexSet> result;
    if (gate.kind == GateKind::Or) {
      for (const auto& c : children) {
        const auto& sets = child_sets(c, scratch);
        check(result.size() + sets.size());
        result.insert(result.end(), sets.begin(), sets.end());
      }
    } else {
      result = {IndexSet{}};
      for (const auto& c : children) {
        const auto& sets = child_sets(c, scratch);
        check(result.size() * sets.size());
        std::vector<IndexSet> product;
        product.reserve(result.size() * sets.size());
        for (const auto& left : result) {
          for (const auto& right : sets) {
            IndexSet merged;
            merged.reserve(left.size() + right.size());
            std::set_union(left.begin(), left.end(), right.begin(), right.end(),
                           std::back_inserter(merged));
            product.push_back(std::move(merged));
          }
        }
        absorb(product);
        result = std::move(product);
      }
    }
    absorb(result);
    memo_[g] = std::move(result);
    done_[g] = true;
  }

  const FaultTree& tree_;
  std::size_t cap_;
  std::vector<std::vector<IndexSet>> memo_;
  std::vector<bool> done_;
};

}  // namespace detail

/// Minimal cut sets of a tree, with probability evaluation over them.
///
/// The cut sets are computed once; probabilities are supplied per call so
/// sensitivity calculations do not redo the expansion. Basic events are
/// assumed statistically independent.
class CutSetModel {
 public:
  explicit CutSetModel(const FaultTree& tree, const AnalysisLimits& limits = {})
      : limits_(limits), event_count_(tree.events().size()) {
    cut_sets_ = detail::CutSetExpander(tree, limits.max_cut_sets).expand(tree.top_ref());
  }

  const std::vector<detail::IndexSet>& cut_sets() const noexcept { return cut_sets_; }
  std::size_t event_count() const noexcept { return event_count_; }

  /// Inclusion-exclusion over the minimal cut sets. Each term is the product
  /// of the distinct event probabilities in the union of its cut sets;
  /// terms are accumulated in extended precision with compensation.
  long double exact(std::span<const double> p) const {
    return std::clamp(inclusion_exclusion(p, kNoFocus), 0.0L, 1.0L);
  }

  /// Sum of cut-set probabilities, clamped to 1.
  long double rare_event(std::span<const double> p) const {
    CompensatedSum<long double> sum;
    for (const auto& cs : cut_sets_) sum.add(product(cs, p));
    return std::min(sum.value(), 1.0L);
  }

  long double probability(std::span<const double> p, Method method) const {
    return method == Method::Exact ? exact(p) : rare_event(p);
  }

  /// P(top | event failed) - P(top | event working). The exact top
  /// probability is multilinear in each event probability, so this equals
  /// the sum of inclusion-exclusion terms whose union contains the event,
  /// with its factor dropped. Summing those terms directly avoids the
  /// cancellation of subtracting two nearly equal probabilities.
  double birnbaum(std::size_t event, std::span<const double> p) const {
    std::vector<double> q(p.begin(), p.end());
    q.at(event) = 1.0;
    return static_cast<double>(std::clamp(inclusion_exclusion(q, event), 0.0L, 1.0L));
  }

  double fussell_vesely(std::size_t event, std::span<const double> p) const {
    CompensatedSum<long double> containing;
    CompensatedSum<long double> total;
    const auto e = static_cast<std::uint32_t>(event);
    for (const auto& cs : cut_sets_) {
      const long double pr = product(cs, p);
      total.add(pr);
      if (std::binary_search(cs.begin(), cs.end(), e)) containing.add(pr);
    }
    if (total.value() <= 0.0L) {
      throw UndefinedImportanceError("Fussell-Vesely importance undefined: top event probability is zero");
    }
    return static_cast<double>(std::clamp(containing.value() / total.value(), 0.0L, 1.0L));
  }

 private:
  static long double product(const detail::IndexSet& cs, std::span<const double> p) {
    long double pr = 1.0L;
    for (const auto e : cs) pr *= p[e];
    return pr;
  }

  static constexpr std::size_t kNoFocus = static_cast<std::size_t>(-1);

  // Sum of signed inclusion-exclusion terms; with a focus event, only the
  // terms whose union contains it.
  long double inclusion_exclusion(std::span<const double> p, std::size_t focus) const {
    const std::size_t m = cut_sets_.size();
    const std::size_t cap = limits_.max_inclusion_exclusion_terms;
    if (m >= 64 || ((std::uint64_t{1} << m) - 1) > cap) {
      throw TermLimitError("inclusion-exclusion over " + std::to_string(m) +
                           " cut sets exceeds the term cap of " + std::to_string(cap) +
                           "; use the rare-event approximation");
    }
    CompensatedSum<long double> sum;
    std::vector<std::uint32_t> in_union(event_count_, 0);
    include_terms(0, 1.0L, 1, p, in_union, sum, focus);
    return sum.value();
  }

  void include_terms(std::size_t start, long double prefix, int depth, std::span<const double> p,
                     std::vector<std::uint32_t>& in_union, CompensatedSum<long double>& sum,
                     std::size_t focus) const {
    for (std::size_t j = start; j < cut_sets_.size(); ++j) {
      long double term = prefix;
      for (const auto e : cut_sets_[j]) {
        if (in_union[e]++ == 0) term *= p[e];
      }
      if (focus == kNoFocus || in_union[focus] > 0) sum.add(depth % 2 == 1 ? term : -term);
      // A zero product stays zero for every superset term.
      if (term != 0.0L) include_terms(j + 1, term, depth + 1, p, in_union, sum, focus);
      for (const auto e : cut_sets_[j]) --in_union[e];
    }
  }

  AnalysisLimits limits_;
  std::size_t event_count_;
  std::vector<detail::IndexSet> cut_sets_;
};

inline std::vector<CutSet> minimal_cut_sets(const FaultTree& tree, const AnalysisLimits& limits = {}) {
  const CutSetModel model(tree, limits);
  std::vector<CutSet> out;
  out.reserve(model.cut_sets().size());
  for (const auto& cs : model.cut_sets()) {
    CutSet named;
    for (const auto e : cs) named.events.push_back(tree.events()[e].id);
    out.push_back(std::move(named));
  }
  return out;
}

inline double top_event_probability(const FaultTree& tree, Method method,
                                    const AnalysisLimits& limits = {}) {
  const auto p = tree.probabilities();
  return static_cast<double>(CutSetModel(tree, limits).probability(p, method));
}

/// P(top | event failed) - P(top | event working), exact method.
inline double birnbaum_importance(const FaultTree& tree, std::string_view event,
                                  const AnalysisLimits& limits = {}) {
  const auto i = tree.require_event(event);
  return CutSetModel(tree, limits).birnbaum(i, tree.probabilities());
}

/// Share of the rare-event top probability carried by cut sets containing `event`.
inline double fussell_vesely_importance(const FaultTree& tree, std::string_view event,
                                        const AnalysisLimits& limits = {}) {
  const auto i = tree.require_event(event);
  return CutSetModel(tree, limits).fussell_vesely(i, tree.probabilities());
}

inline ImportanceReport improvement_ranking(const FaultTree& tree, const AnalysisLimits& limits = {}) {
  const CutSetModel model(tree, limits);
  const auto p = tree.probabilities();
  ImportanceReport report;
  for (std::size_t i = 0; i < tree.events().size(); ++i) {
    report.entries.push_back({tree.events()[i].id, model.birnbaum(i, p), model.fussell_vesely(i, p)});
  }
  std::vector<const ImportanceEntry*> order;
  for (const auto& e : report.entries) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(), [](const ImportanceEntry* a, const ImportanceEntry* b) {
    if (a->fussell_vesely != b->fussell_vesely) return a->fussell_vesely > b->fussell_vesely;
    return a->event < b->event;
  });
  for (const auto* e : order) report.ranking.push_back(e->event);
  return report;
}

}  // namespace reliquant
