#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reliquant/domain.hpp"
#include "reliquant/error.hpp"
#include "reliquant/numeric.hpp"
#include "reliquant/philox.hpp"
#include "reliquant/text.hpp"

namespace reliquant {

/// Textual restriction of one field inside a stratum: either an inclusive
/// `lo..hi` range or an explicit value list. Values are interpreted against
/// the field kind when the profile is bound to a domain.
struct Restriction {
  std::string field;
  std::optional<std::pair<std::string, std::string>> range;
  std::vector<std::string> values;

  bool operator==(const Restriction&) const = default;
};

struct Stratum {
  double weight = 1.0;
  std::vector<Restriction> restrictions;  // omitted fields are unrestricted

  bool operator==(const Stratum&) const = default;
};

struct OperationalProfile {
  std::string name;
  std::vector<Stratum> strata;

  std::vector<double> normalized_weights() const {
    CompensatedSum<double> total;
    for (const auto& s : strata) total.add(s.weight);
    std::vector<double> w;
    for (const auto& s : strata) w.push_back(s.weight / total.value());
    return w;
  }

  bool operator==(const OperationalProfile&) const = default;
};

struct StratumReport {
  BigIndex cardinality;
  double normalized_weight = 0.0;
};

struct ProfileReport {
  std::string name;
  std::vector<StratumReport> strata;
};

/// A profile bound to a domain: restrictions resolved to field positions,
/// ready for mass queries and sampling.
class CompiledProfile {
 public:
  /// Closed interval of field positions.
  struct Span {
    std::uint64_t first = 0;
    std::uint64_t last = 0;
  };

  struct FieldSet {
    std::vector<Span> spans;        // disjoint, ascending
    std::vector<std::uint64_t> ends;  // running counts, ends.back() == count()

    std::uint64_t count() const noexcept { return ends.empty() ? 0 : ends.back(); }

    bool contains(std::uint64_t position) const noexcept {
      auto it = std::upper_bound(spans.begin(), spans.end(), position,
                                 [](std::uint64_t v, const Span& s) { return v < s.first; });
      return it != spans.begin() && position <= std::prev(it)->last;
    }

    std::uint64_t position_at(std::uint64_t k) const noexcept {
      const auto i = static_cast<std::size_t>(std::upper_bound(ends.begin(), ends.end(), k) - ends.begin());
      const std::uint64_t before = i == 0 ? 0 : ends[i - 1];
      return spans[i].first + (k - before);
    }
  };

  struct Draw {
    std::size_t stratum = 0;
    std::uint64_t index = 0;  // global domain index
  };

  CompiledProfile(const OperationalProfile& profile, const InputDomain& domain)
      : name_(profile.name), domain_(&domain) {
    if (profile.strata.empty()) throw ValidationError("profile '" + profile.name + "' has no strata");
    for (std::size_t s = 0; s < profile.strata.size(); ++s) {
      const auto& stratum = profile.strata[s];
      if (!(stratum.weight > 0.0) || !std::isfinite(stratum.weight)) {
        throw ValidationError("profile '" + profile.name + "' stratum " + std::to_string(s + 1) +
                              ": weight must be positive");
      }
      strata_.push_back(compile(stratum, domain, s));
    }
    weights_ = profile.normalized_weights();
    double running = 0.0;
    for (const double w : weights_) cumulative_.push_back(running += w);
    for (auto& st : strata_) {
      BigIndex card = 1;
      for (const auto& f : st.fields) card *= f.count();
      st.cardinality = card;
      st.cardinality_real = card.convert_to<double>();
      if (card <= std::numeric_limits<std::uint64_t>::max()) st.cardinality_u64 = card.convert_to<std::uint64_t>();
    }
  }

  const std::string& name() const noexcept { return name_; }
  std::size_t stratum_count() const noexcept { return strata_.size(); }
  const std::vector<double>& normalized_weights() const noexcept { return weights_; }

  ProfileReport report() const {
    ProfileReport r{name_, {}};
    for (std::size_t s = 0; s < strata_.size(); ++s) r.strata.push_back({strata_[s].cardinality, weights_[s]});
    return r;
  }

  bool stratum_contains(std::size_t s, const InputPoint& p) const {
    const auto& fields = domain_->fields();
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (!strata_[s].fields[k].contains(fields[k].position_of(p.values[k]))) return false;
    }
    return true;
  }

  /// Sum over strata containing the point of weight / stratum cardinality.
  double mass(const InputPoint& p) const {
    domain_->check_point(p);
    CompensatedSum<double> m;
    for (std::size_t s = 0; s < strata_.size(); ++s) {
      if (stratum_contains(s, p)) m.add(weights_[s] / strata_[s].cardinality_real);
    }
    return m.value();
  }

  /// Draw number `draw` of the stream keyed by `seed`: stratum chosen by
  /// normalized weight from the first 64-bit word, then a uniform index
  /// into the stratum from the second (Lemire's multiply-shift with
  /// rejection; a rejected attempt re-reads the block with attempt+1).
  Draw draw(std::uint64_t seed, std::uint64_t draw) const {
    auto block = draw_block(seed, draw, 0);
    const double u = to_unit_interval(block.first);
    std::size_t s = static_cast<std::size_t>(
        std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin());
    if (s >= strata_.size()) s = strata_.size() - 1;
    const auto& st = strata_[s];
    if (!st.cardinality_u64) throw ValidationError("stratum too large to sample with 64-bit indices");
    const std::uint64_t range = *st.cardinality_u64;
    std::uint64_t bits = block.second;
    std::uint32_t attempt = 0;
    unsigned __int128 m = static_cast<unsigned __int128>(bits) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
      const std::uint64_t threshold = (0 - range) % range;
      while (low < threshold) {
        bits = draw_block(seed, draw, ++attempt).second;
        m = static_cast<unsigned __int128>(bits) * range;
        low = static_cast<std::uint64_t>(m);
      }
    }
    std::uint64_t k = static_cast<std::uint64_t>(m >> 64);

    // Mixed-radix decode inside the stratum, last field fastest.
    const auto& fields = domain_->fields();
    std::uint64_t index = 0;
    std::uint64_t stride = 1;
    for (std::size_t f = fields.size(); f-- > 0;) {
      const auto& set = st.fields[f];
      const std::uint64_t digit = k % set.count();
      k /= set.count();
      index += set.position_at(digit) * stride;
      stride *= fields[f].size();
    }
    return {s, index};
  }

 private:
  struct CompiledStratum {
    std::vector<FieldSet> fields;  // one per domain field
    BigIndex cardinality;
    double cardinality_real = 0.0;
    std::optional<std::uint64_t> cardinality_u64;
  };

  static CompiledStratum compile(const Stratum& stratum, const InputDomain& domain, std::size_t s) {
    const auto where = [&](const std::string& field) {
      return "stratum " + std::to_string(s + 1) + ", field '" + field + "': ";
    };
    CompiledStratum out;
    std::vector<bool> seen(domain.arity(), false);
    out.fields.resize(domain.arity());
    for (const auto& r : stratum.restrictions) {
      const auto k = domain.field_index(r.field);
      if (!k) throw ValidationError("stratum " + std::to_string(s + 1) + ": unknown field '" + r.field + "'");
      if (seen[*k]) throw ValidationError(where(r.field) + "restricted twice");
      seen[*k] = true;
      const auto& f = domain.fields()[*k];
      auto value_of = [&](const std::string& v) {
        auto parsed = f.parse_value(v);
        if (!parsed) throw ValidationError(where(r.field) + "value '" + v + "' outside the field");
        return f.position_of(*parsed);
      };
      std::vector<Span> spans;
      if (r.range) {
        const auto a = value_of(r.range->first);
        const auto b = value_of(r.range->second);
        if (a > b) throw ValidationError(where(r.field) + "empty restriction");
        spans.push_back({a, b});
      } else {
        if (r.values.empty()) throw ValidationError(where(r.field) + "empty restriction");
        for (const auto& v : r.values) {
          const auto pos = value_of(v);
          spans.push_back({pos, pos});
        }
      }
      out.fields[*k] = normalize(std::move(spans));
    }
    for (std::size_t k = 0; k < domain.arity(); ++k) {
      if (!seen[k]) out.fields[k] = normalize({{0, domain.fields()[k].size() - 1}});
    }
    return out;
  }

  static FieldSet normalize(std::vector<Span> spans) {
    std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.first < b.first; });
    FieldSet set;
    for (const auto& sp : spans) {
      if (!set.spans.empty() && sp.first <= set.spans.back().last + 1) {
        set.spans.back().last = std::max(set.spans.back().last, sp.last);
      } else {
        set.spans.push_back(sp);
      }
    }
    std::uint64_t running = 0;
    for (const auto& sp : set.spans) set.ends.push_back(running += sp.last - sp.first + 1);
    return set;
  }

  std::string name_;
  const InputDomain* domain_;
  std::vector<CompiledStratum> strata_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

/// Checks a profile against a domain and reports per-stratum cardinality
/// and normalized weight.
inline ProfileReport validate_profile(const OperationalProfile& profile, const InputDomain& domain) {
  return CompiledProfile(profile, domain).report();
}

/// `n` points drawn with replacement. Deterministic in (profile, domain, n, seed).
inline std::vector<InputPoint> sample(const OperationalProfile& profile, const InputDomain& domain, std::size_t n,
                                      std::uint64_t seed) {
  if (n == 0) throw ValidationError("sample size must be at least 1");
  domain.require_u64_cardinality();
  const CompiledProfile compiled(profile, domain);
  std::vector<InputPoint> points;
  points.reserve(n);
  for (std::size_t d = 0; d < n; ++d) points.push_back(domain.decode(compiled.draw(seed, d).index));
  return points;
}

inline double profile_mass(const OperationalProfile& profile, const InputDomain& domain, const InputPoint& p) {
  return CompiledProfile(profile, domain).mass(p);
}

/// Parses one or more profiles:
///
///     profile <name>
///     stratum w=<weight>
///       restrict <field> <lo>..<hi>
///       restrict <field> <value>[,<value>...]
inline std::vector<OperationalProfile> parse_profiles(std::string_view document) {
  std::vector<OperationalProfile> profiles;
  const auto lines = text::tokenize(document);
  for (const auto& line : lines) {
    const auto& t = line.tokens;
    const auto n = line.number;
    const auto& kw = t[0].text;
    if (kw == "profile") {
      if (t.size() != 2 || !text::is_identifier(t[1].text)) throw ParseError("expected: profile <name>", n, t[0].column);
      for (const auto& p : profiles) {
        if (p.name == t[1].text) throw ParseError("duplicate profile '" + t[1].text + "'", n, t[1].column);
      }
      profiles.push_back({t[1].text, {}});
    } else if (kw == "stratum") {
      if (profiles.empty()) throw ParseError("stratum before any profile header", n, t[0].column);
      if (t.size() != 2 || t[1].text.rfind("w=", 0) != 0) throw ParseError("expected: stratum w=<weight>", n, t[0].column);
      const auto w = parse_real(std::string_view(t[1].text).substr(2));
      if (!w) throw ParseError("malformed weight '" + t[1].text.substr(2) + "'", n, t[1].column + 2);
      if (*w <= 0.0) throw ParseError("weight must be positive", n, t[1].column + 2);
      profiles.back().strata.push_back({*w, {}});
    } else if (kw == "restrict") {
      if (profiles.empty() || profiles.back().strata.empty()) {
        throw ParseError("restrict outside a stratum", n, t[0].column);
      }
      if (t.size() != 3) throw ParseError("expected: restrict <field> <lo>..<hi> | <v>[,<v>...]", n, t[0].column);
      Restriction r;
      r.field = t[1].text;
      const auto& spec = t[2].text;
      const auto dots = spec.find("..");
      if (dots != std::string::npos) {
        r.range = std::make_pair(spec.substr(0, dots), spec.substr(dots + 2));
        if (r.range->first.empty() || r.range->second.empty()) throw ParseError("malformed range '" + spec + "'", n, t[2].column);
      } else {
        r.values = text::split(spec, ',');
        for (const auto& v : r.values) {
          if (v.empty()) throw ParseError("empty value in list '" + spec + "'", n, t[2].column);
        }
      }
      profiles.back().strata.back().restrictions.push_back(std::move(r));
    } else {
      throw ParseError("unknown keyword '" + kw + "'", n, t[0].column);
    }
  }
  if (profiles.empty()) throw ParseError("no profile declared", 1, 1);
  for (const auto& p : profiles) {
    if (p.strata.empty()) throw ValidationError("profile '" + p.name + "' has no strata");
  }
  return profiles;
}

}  // namespace reliquant
