#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reliquant/error.hpp"
#include "reliquant/numeric.hpp"
#include "reliquant/text.hpp"

namespace reliquant {

/// A leaf of the tree: an independent component failure with a
/// per-demand probability.
struct BasicEvent {
  std::string id;
  double probability = 0.0;
  std::string label;

  bool operator==(const BasicEvent&) const = default;
};

enum class GateKind { And, Or };

inline std::string_view to_string(GateKind kind) { return kind == GateKind::And ? "and" : "or"; }

struct Gate {
  std::string id;
  GateKind kind = GateKind::Or;
  std::vector<std::string> children;

  bool operator==(const Gate&) const = default;
};

/// Raised by FaultTree validation for a problem attributable to one node.
class NodeValidationError : public ValidationError {
 public:
  NodeValidationError(const std::string& what, std::string node)
      : ValidationError(what), node_(std::move(node)) {}
  const std::string& node() const noexcept { return node_; }

 private:
  std::string node_;
};

/// Resolved reference to a node of a FaultTree.
struct NodeRef {
  bool is_gate = false;
  std::size_t index = 0;  // into events() or gates()

  bool operator==(const NodeRef&) const = default;
};

/// Validated, immutable coherent AND/OR fault tree.
///
/// Events are stored sorted by id; gates in topological order with every
/// gate after its gate children (ties by id). Two trees describing the same
/// structure therefore compare equal regardless of declaration order.
class FaultTree {
 public:
  FaultTree(std::vector<BasicEvent> events, std::vector<Gate> gates, std::string top)
      : events_(std::move(events)), gates_(std::move(gates)), top_(std::move(top)) {
    validate_and_index();
  }

  const std::vector<BasicEvent>& events() const noexcept { return events_; }
  const std::vector<Gate>& gates() const noexcept { return gates_; }
  const std::string& top() const noexcept { return top_; }
  NodeRef top_ref() const noexcept { return top_ref_; }

  /// Resolved children of gates()[gate].
  const std::vector<NodeRef>& children(std::size_t gate) const { return resolved_.at(gate); }

  std::optional<std::size_t> event_index(std::string_view id) const {
    auto it = std::lower_bound(events_.begin(), events_.end(), id,
                               [](const BasicEvent& e, std::string_view v) { return e.id < v; });
    if (it == events_.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - events_.begin());
  }

  std::size_t require_event(std::string_view id) const {
    if (auto i = event_index(id)) return *i;
    throw ValidationError("unknown event id '" + std::string(id) + "'");
  }

  std::vector<double> probabilities() const {
    std::vector<double> p;
    p.reserve(events_.size());
    for (const auto& e : events_) p.push_back(e.probability);
    return p;
  }

  FaultTree with_probability(std::string_view id, double probability) const {
    FaultTree copy = *this;
    auto& event = copy.events_[require_event(id)];
    check_probability(event.id, probability);
    event.probability = probability;
    return copy;
  }

  bool operator==(const FaultTree& other) const {
    return events_ == other.events_ && gates_ == other.gates_ && top_ == other.top_;
  }

 private:
  static void check_probability(const std::string& id, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw NodeValidationError(
          "probability out of [0,1] for event '" + id + "': " + to_shortest_string(p), id);
    }
  }

  void validate_and_index() {
    std::map<std::string, NodeRef> nodes;
    std::sort(events_.begin(), events_.end(),
              [](const BasicEvent& a, const BasicEvent& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < events_.size(); ++i) {
      const auto& e = events_[i];
      if (!text::is_identifier(e.id)) throw NodeValidationError("invalid event id '" + e.id + "'", e.id);
      check_probability(e.id, e.probability);
      if (e.label.find_first_of("\"\n\r") != std::string::npos) {
        throw NodeValidationError("label of event '" + e.id + "' contains a quote or newline", e.id);
      }
      if (!nodes.emplace(e.id, NodeRef{false, i}).second) {
        throw NodeValidationError("duplicate id '" + e.id + "'", e.id);
      }
    }
    for (std::size_t i = 0; i < gates_.size(); ++i) {
      const auto& g = gates_[i];
      if (!text::is_identifier(g.id)) throw NodeValidationError("invalid gate id '" + g.id + "'", g.id);
      if (g.children.size() < 2) {
        throw NodeValidationError("gate '" + g.id + "' needs at least 2 children", g.id);
      }
      if (!nodes.emplace(g.id, NodeRef{true, i}).second) {
        throw NodeValidationError("duplicate id '" + g.id + "'", g.id);
      }
    }
    for (const auto& g : gates_) {
      for (const auto& c : g.children) {
        if (!nodes.count(c)) {
          throw NodeValidationError("unknown child reference '" + c + "' in gate '" + g.id + "'", g.id);
        }
      }
    }
    auto top = nodes.find(top_);
    if (top == nodes.end()) {
      throw ValidationError(top_.empty() ? "missing top declaration"
                                         : "top references unknown node '" + top_ + "'");
    }

    order_gates_topologically(nodes);

    // Re-key after reordering.
    for (std::size_t i = 0; i < gates_.size(); ++i) nodes[gates_[i].id] = NodeRef{true, i};
    resolved_.assign(gates_.size(), {});
    for (std::size_t i = 0; i < gates_.size(); ++i) {
      for (const auto& c : gates_[i].children) resolved_[i].push_back(nodes.at(c));
    }
    top_ref_ = nodes.at(top_);
    check_reachability();
  }

  // Kahn's algorithm over gate->gate edges; smallest ready id first.
  void order_gates_topologically(const std::map<std::string, NodeRef>& nodes) {
    std::map<std::string, std::size_t> pending;  // gate id -> unresolved gate children
    std::map<std::string, std::vector<std::string>> parents;
    for (const auto& g : gates_) {
      std::size_t count = 0;
      for (const auto& c : g.children) {
        if (nodes.at(c).is_gate) {
          ++count;
          parents[c].push_back(g.id);
        }
      }
      pending[g.id] = count;
    }
    std::set<std::string> ready;
    for (const auto& [id, count] : pending) {
      if (count == 0) ready.insert(id);
    }
    std::vector<Gate> ordered;
    ordered.reserve(gates_.size());
    while (!ready.empty()) {
      const std::string id = *ready.begin();
      ready.erase(ready.begin());
      ordered.push_back(gates_[nodes.at(id).index]);
      for (const auto& parent : parents[id]) {
        if (--pending[parent] == 0) ready.insert(parent);
      }
    }
    if (ordered.size() != gates_.size()) {
      for (const auto& [id, count] : pending) {
        if (count > 0) throw NodeValidationError("cycle detected through gate '" + id + "'", id);
      }
    }
    gates_ = std::move(ordered);
  }

  void check_reachability() const {
    std::vector<bool> event_seen(events_.size(), false);
    std::vector<bool> gate_seen(gates_.size(), false);
    std::vector<NodeRef> stack{top_ref_};
    while (!stack.empty()) {
      const NodeRef n = stack.back();
      stack.pop_back();
      if (!n.is_gate) {
        event_seen[n.index] = true;
        continue;
      }
      if (gate_seen[n.index]) continue;
      gate_seen[n.index] = true;
      for (const auto& c : resolved_[n.index]) stack.push_back(c);
    }
    for (std::size_t i = 0; i < events_.size(); ++i) {
      if (!event_seen[i]) {
        throw NodeValidationError("event '" + events_[i].id + "' is not reachable from top", events_[i].id);
      }
    }
    for (std::size_t i = 0; i < gates_.size(); ++i) {
      if (!gate_seen[i]) {
        throw NodeValidationError("gate '" + gates_[i].id + "' is not reachable from top", gates_[i].id);
      }
    }
  }

  std::vector<BasicEvent> events_;
  std::vector<Gate> gates_;
  std::string top_;
  std::vector<std::vector<NodeRef>> resolved_;
  NodeRef top_ref_;
};

/// Parses the line-oriented tree format:
///
///     event <id> p=<probability> ["label"]
///     gate <id> <and|or> <child> <child> [...]
///     top <id>
///
/// Children may be declared after the gates that use them.
inline FaultTree parse_fault_tree(std::string_view document) {
  std::vector<BasicEvent> events;
  std::vector<Gate> gates;
  std::map<std::string, std::size_t> declared_at;  // id -> line
  std::string top;
  std::size_t top_line = 0;

  auto declare = [&](const text::Token& tok, std::size_t line) {
    if (!text::is_identifier(tok.text)) throw ParseError("invalid identifier '" + tok.text + "'", line, tok.column);
    if (!declared_at.emplace(tok.text, line).second) {
      throw ParseError("duplicate id '" + tok.text + "'", line, tok.column);
    }
  };

  const auto lines = text::tokenize(document);
  for (const auto& line : lines) {
    const auto& t = line.tokens;
    const auto n = line.number;
    const std::string& keyword = t[0].text;
    if (keyword == "event") {
      if (t.size() < 3 || t.size() > 4) throw ParseError("expected: event <id> p=<probability> [\"label\"]", n, t[0].column);
      declare(t[1], n);
      const auto& pt = t[2];
      if (pt.quoted || pt.text.rfind("p=", 0) != 0) throw ParseError("expected p=<probability>", n, pt.column);
      const auto p = parse_real(std::string_view(pt.text).substr(2));
      if (!p) throw ParseError("malformed probability '" + pt.text.substr(2) + "'", n, pt.column + 2);
      if (*p < 0.0 || *p > 1.0) throw ParseError("probability out of [0,1]: " + pt.text.substr(2), n, pt.column + 2);
      std::string label;
      if (t.size() == 4) {
        if (!t[3].quoted) throw ParseError("label must be quoted", n, t[3].column);
        label = t[3].text;
      }
      events.push_back({t[1].text, *p, std::move(label)});
    } else if (keyword == "gate") {
      if (t.size() < 3) throw ParseError("expected: gate <id> <and|or> <child> <child> [...]", n, t[0].column);
      declare(t[1], n);
      GateKind kind;
      if (t[2].text == "and" || t[2].text == "AND") {
        kind = GateKind::And;
      } else if (t[2].text == "or" || t[2].text == "OR") {
        kind = GateKind::Or;
      } else {
        throw ParseError("unknown gate kind '" + t[2].text + "' (expected and|or)", n, t[2].column);
      }
      if (t.size() < 5) throw ParseError("gate '" + t[1].text + "' needs at least 2 children", n, t[0].column);
      Gate g{t[1].text, kind, {}};
      for (std::size_t i = 3; i < t.size(); ++i) {
        if (t[i].quoted || !text::is_identifier(t[i].text)) {
          throw ParseError("invalid child reference '" + t[i].text + "'", n, t[i].column);
        }
        g.children.push_back(t[i].text);
      }
      gates.push_back(std::move(g));
    } else if (keyword == "top") {
      if (t.size() != 2) throw ParseError("expected: top <id>", n, t[0].column);
      if (top_line != 0) throw ParseError("duplicate top declaration", n, t[0].column);
      top = t[1].text;
      top_line = n;
    } else {
      throw ParseError("unknown keyword '" + keyword + "'", n, t[0].column);
    }
  }

  if (lines.empty()) throw ParseError("empty fault tree document", 1, 1);

  // Unknown children get a precise location before structural validation.
  for (const auto& g : gates) {
    for (const auto& c : g.children) {
      if (!declared_at.count(c)) {
        const auto line = declared_at.at(g.id);
        const auto& toks = std::find_if(lines.begin(), lines.end(),
                                        [&](const text::Line& l) { return l.number == line; })
                               ->tokens;
        const auto tok = std::find_if(toks.begin() + 3, toks.end(),
                                      [&](const text::Token& k) { return k.text == c; });
        throw ParseError("unknown child reference '" + c + "' in gate '" + g.id + "'", line, tok->column);
      }
    }
  }
  if (top_line == 0) throw ParseError("missing top declaration", lines.back().number, 1);
  if (!declared_at.count(top)) throw ParseError("top references unknown node '" + top + "'", top_line, 5);

  try {
    return FaultTree(std::move(events), std::move(gates), std::move(top));
  } catch (const NodeValidationError& e) {
    auto it = declared_at.find(e.node());
    throw ParseError(e.what(), it == declared_at.end() ? top_line : it->second, 1);
  }
}

/// Canonical text form: events sorted by id, gates in topological order, then top.
inline std::string serialize_fault_tree(const FaultTree& tree) {
  std::ostringstream out;
  for (const auto& e : tree.events()) {
    out << "event " << e.id << " p=" << to_shortest_string(e.probability);
    if (!e.label.empty()) out << " \"" << e.label << '"';
    out << '\n';
  }
  for (const auto& g : tree.gates()) {
    out << "gate " << g.id << ' ' << to_string(g.kind);
    for (const auto& c : g.children) out << ' ' << c;
    out << '\n';
  }
  out << "top " << tree.top() << '\n';
  return out.str();
}

}  // namespace reliquant
