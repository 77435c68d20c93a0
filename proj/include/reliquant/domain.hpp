#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iterator>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "reliquant/error.hpp"
#include "reliquant/text.hpp"

namespace reliquant {

/// Arbitrary-precision global index / cardinality.
using BigIndex = boost::multiprecision::cpp_int;

enum class FieldKind { IntRange, Flag, Enum };

/// One input dimension. Values are carried as int64: the integer itself for
/// ranges, 0/1 for flags, the label position for enums.
struct FieldSpec {
  std::string name;
  FieldKind kind = FieldKind::Flag;
  std::int64_t lo = 0;
  std::int64_t hi = 1;
  std::vector<std::string> labels;

  static FieldSpec int_range(std::string name, std::int64_t lo, std::int64_t hi) {
    return {std::move(name), FieldKind::IntRange, lo, hi, {}};
  }
  static FieldSpec flag(std::string name) { return {std::move(name), FieldKind::Flag, 0, 1, {}}; }
  static FieldSpec enumeration(std::string name, std::vector<std::string> labels) {
    const auto n = static_cast<std::int64_t>(labels.size());
    return {std::move(name), FieldKind::Enum, 0, n - 1, std::move(labels)};
  }

  /// Number of distinct values; 0 only for the unrepresentable full int64 range.
  std::uint64_t size() const noexcept {
    return static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  }
  bool contains(std::int64_t v) const noexcept { return v >= lo && v <= hi; }
  std::int64_t value_at(std::uint64_t position) const noexcept {
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + position);
  }
  std::uint64_t position_of(std::int64_t v) const noexcept {
    return static_cast<std::uint64_t>(v) - static_cast<std::uint64_t>(lo);
  }

  /// Protocol rendering: decimal integers, 0/1 flags, enum labels verbatim.
  std::string render(std::int64_t v) const {
    if (kind == FieldKind::Enum) return labels.at(static_cast<std::size_t>(v));
    return std::to_string(v);
  }

  /// Inverse of render(); nullopt when the text is not a value of this field.
  std::optional<std::int64_t> parse_value(std::string_view s) const {
    if (kind == FieldKind::Enum) {
      auto it = std::find(labels.begin(), labels.end(), s);
      if (it == labels.end()) return std::nullopt;
      return static_cast<std::int64_t>(it - labels.begin());
    }
    auto v = text::parse_int<std::int64_t>(s);
    if (!v || !contains(*v)) return std::nullopt;
    return v;
  }

  bool operator==(const FieldSpec&) const = default;
};

struct InputPoint {
  std::vector<std::int64_t> values;

  auto operator<=>(const InputPoint&) const = default;
  bool operator==(const InputPoint&) const = default;
};

/// Half-open range [start, end) of global indices.
struct IndexRange {
  BigIndex start;
  BigIndex end;

  BigIndex size() const { return end - start; }
  bool operator==(const IndexRange&) const = default;
};

/// Finite cartesian input space with a mixed-radix global index in which
/// the last declared field varies fastest.
class InputDomain {
 public:
  explicit InputDomain(std::vector<FieldSpec> fields) : fields_(std::move(fields)) {
    if (fields_.empty()) throw ValidationError("an input domain needs at least one field");
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      const auto& f = fields_[i];
      if (!text::is_identifier(f.name)) throw ValidationError("invalid field name '" + f.name + "'");
      for (std::size_t j = 0; j < i; ++j) {
        if (fields_[j].name == f.name) throw ValidationError("duplicate field name '" + f.name + "'");
      }
      switch (f.kind) {
        case FieldKind::IntRange:
          if (f.lo > f.hi) throw ValidationError("field '" + f.name + "': lo exceeds hi");
          if (f.size() == 0) throw ValidationError("field '" + f.name + "': range too wide");
          if (!f.labels.empty()) throw ValidationError("field '" + f.name + "': int field with labels");
          break;
        case FieldKind::Flag:
          if (f.lo != 0 || f.hi != 1) throw ValidationError("field '" + f.name + "': flags are {0,1}");
          break;
        case FieldKind::Enum: {
          if (f.labels.empty()) throw ValidationError("field '" + f.name + "': enum needs a label");
          if (f.lo != 0 || f.hi != static_cast<std::int64_t>(f.labels.size()) - 1) {
            throw ValidationError("field '" + f.name + "': enum bounds disagree with labels");
          }
          for (std::size_t a = 0; a < f.labels.size(); ++a) {
            if (!text::is_identifier(f.labels[a])) {
              throw ValidationError("field '" + f.name + "': invalid label '" + f.labels[a] + "'");
            }
            for (std::size_t b = 0; b < a; ++b) {
              if (f.labels[a] == f.labels[b]) {
                throw ValidationError("field '" + f.name + "': duplicate label '" + f.labels[a] + "'");
              }
            }
          }
          break;
        }
      }
    }
    cardinality_ = 1;
    for (const auto& f : fields_) cardinality_ *= f.size();
    if (cardinality_ <= std::numeric_limits<std::uint64_t>::max()) {
      small_cardinality_ = cardinality_.convert_to<std::uint64_t>();
    }
  }

  const std::vector<FieldSpec>& fields() const noexcept { return fields_; }
  std::size_t arity() const noexcept { return fields_.size(); }

  std::optional<std::size_t> field_index(std::string_view name) const {
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      if (fields_[i].name == name) return i;
    }
    return std::nullopt;
  }

  const BigIndex& cardinality() const noexcept { return cardinality_; }

  /// Cardinality when it fits in 64 bits.
  std::optional<std::uint64_t> cardinality_u64() const noexcept { return small_cardinality_; }

  /// Executable domains must be indexable with 64-bit integers.
  std::uint64_t require_u64_cardinality() const {
    if (!small_cardinality_) throw ValidationError("domain cardinality exceeds 2^64-1 and cannot be executed");
    return *small_cardinality_;
  }

  InputPoint index_to_point(const BigIndex& index) const {
    if (index < 0 || index >= cardinality_) {
      throw ValidationError("index " + index.str() + " out of range [0, " + cardinality_.str() + ")");
    }
    InputPoint p;
    p.values.resize(fields_.size());
    BigIndex rest = index;
    for (std::size_t k = fields_.size(); k-- > 0;) {
      const BigIndex radix = fields_[k].size();
      const BigIndex digit = rest % radix;
      rest /= radix;
      p.values[k] = fields_[k].value_at(digit.convert_to<std::uint64_t>());
    }
    return p;
  }

  BigIndex point_to_index(const InputPoint& p) const {
    check_point(p);
    BigIndex index = 0;
    for (std::size_t k = 0; k < fields_.size(); ++k) {
      index *= fields_[k].size();
      index += fields_[k].position_of(p.values[k]);
    }
    return index;
  }

  /// 64-bit decode into caller storage; `index` must be below cardinality.
  void decode(std::uint64_t index, std::span<std::int64_t> out) const noexcept {
    for (std::size_t k = fields_.size(); k-- > 0;) {
      const std::uint64_t radix = fields_[k].size();
      out[k] = fields_[k].value_at(index % radix);
      index /= radix;
    }
  }

  InputPoint decode(std::uint64_t index) const {
    InputPoint p;
    p.values.resize(fields_.size());
    decode(index, p.values);
    return p;
  }

  /// 64-bit encode; the point must be valid and the cardinality must fit.
  std::uint64_t encode(std::span<const std::int64_t> values) const noexcept {
    std::uint64_t index = 0;
    for (std::size_t k = 0; k < fields_.size(); ++k) {
      index = index * fields_[k].size() + fields_[k].position_of(values[k]);
    }
    return index;
  }

  void check_point(const InputPoint& p) const {
    if (p.values.size() != fields_.size()) {
      throw ValidationError("point arity " + std::to_string(p.values.size()) + " does not match domain arity " +
                            std::to_string(fields_.size()));
    }
    for (std::size_t k = 0; k < fields_.size(); ++k) {
      if (!fields_[k].contains(p.values[k])) {
        throw ValidationError("value " + std::to_string(p.values[k]) + " out of range for field '" +
                              fields_[k].name + "'");
      }
    }
  }

  /// Values rendered per field and joined with `sep`.
  std::string render(std::span<const std::int64_t> values, char sep = '\t') const {
    std::string out;
    for (std::size_t k = 0; k < fields_.size(); ++k) {
      if (k) out += sep;
      out += fields_[k].render(values[k]);
    }
    return out;
  }

  /// Canonical domain document; equal domains produce identical text.
  std::string canonical_text() const {
    std::ostringstream out;
    for (const auto& f : fields_) {
      out << "field " << f.name;
      switch (f.kind) {
        case FieldKind::IntRange: out << " int " << f.lo << ' ' << f.hi; break;
        case FieldKind::Flag: out << " flag"; break;
        case FieldKind::Enum:
          out << " enum";
          for (const auto& l : f.labels) out << ' ' << l;
          break;
      }
      out << '\n';
    }
    return out.str();
  }

  std::string digest() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(text::fnv1a64(canonical_text())));
    return buf;
  }

  bool operator==(const InputDomain& other) const { return fields_ == other.fields_; }

 private:
  std::vector<FieldSpec> fields_;
  BigIndex cardinality_;
  std::optional<std::uint64_t> small_cardinality_;
};

inline const BigIndex& cardinality(const InputDomain& domain) { return domain.cardinality(); }

inline InputPoint index_to_point(const InputDomain& domain, const BigIndex& index) {
  return domain.index_to_point(index);
}

inline BigIndex point_to_index(const InputDomain& domain, const InputPoint& point) {
  return domain.point_to_index(point);
}

/// Balanced contiguous split of [0, cardinality): the first (cardinality mod
/// parts) ranges hold one extra index. Surplus parts are empty ranges at the end.
inline std::vector<IndexRange> partition(const InputDomain& domain, std::size_t parts) {
  if (parts == 0) throw ValidationError("partition needs at least one part");
  const BigIndex& total = domain.cardinality();
  const BigIndex base = total / parts;
  const BigIndex extra = total % parts;
  std::vector<IndexRange> ranges;
  ranges.reserve(parts);
  BigIndex start = 0;
  for (std::size_t i = 0; i < parts; ++i) {
    BigIndex size = base + (BigIndex(i) < extra ? 1 : 0);
    ranges.push_back({start, start + size});
    start += size;
  }
  return ranges;
}

/// Parses `field <name> int <lo> <hi>` | `field <name> flag` |
/// `field <name> enum <label> [...]` lines.
inline InputDomain parse_domain(std::string_view document) {
  std::vector<FieldSpec> fields;
  const auto lines = text::tokenize(document);
  for (const auto& line : lines) {
    const auto& t = line.tokens;
    const auto n = line.number;
    if (t[0].text != "field") throw ParseError("unknown keyword '" + t[0].text + "'", n, t[0].column);
    if (t.size() < 3) throw ParseError("expected: field <name> <int|flag|enum> ...", n, t[0].column);
    if (!text::is_identifier(t[1].text)) throw ParseError("invalid field name '" + t[1].text + "'", n, t[1].column);
    for (const auto& f : fields) {
      if (f.name == t[1].text) throw ParseError("duplicate field name '" + t[1].text + "'", n, t[1].column);
    }
    const auto& kind = t[2].text;
    if (kind == "int") {
      if (t.size() != 5) throw ParseError("expected: field <name> int <lo> <hi>", n, t[2].column);
      auto lo = text::parse_int<std::int64_t>(t[3].text);
      if (!lo) throw ParseError("malformed integer '" + t[3].text + "'", n, t[3].column);
      auto hi = text::parse_int<std::int64_t>(t[4].text);
      if (!hi) throw ParseError("malformed integer '" + t[4].text + "'", n, t[4].column);
      if (*lo > *hi) throw ParseError("lo exceeds hi", n, t[3].column);
      fields.push_back(FieldSpec::int_range(t[1].text, *lo, *hi));
      if (fields.back().size() == 0) throw ParseError("range too wide", n, t[3].column);
    } else if (kind == "flag") {
      if (t.size() != 3) throw ParseError("expected: field <name> flag", n, t[2].column);
      fields.push_back(FieldSpec::flag(t[1].text));
    } else if (kind == "enum") {
      if (t.size() < 4) throw ParseError("enum field needs at least one label", n, t[2].column);
      std::vector<std::string> labels;
      for (std::size_t i = 3; i < t.size(); ++i) {
        if (!text::is_identifier(t[i].text)) throw ParseError("invalid label '" + t[i].text + "'", n, t[i].column);
        if (std::find(labels.begin(), labels.end(), t[i].text) != labels.end()) {
          throw ParseError("duplicate label '" + t[i].text + "'", n, t[i].column);
        }
        labels.push_back(t[i].text);
      }
      fields.push_back(FieldSpec::enumeration(t[1].text, std::move(labels)));
    } else {
      throw ParseError("unknown field kind '" + kind + "' (expected int|flag|enum)", n, t[2].column);
    }
  }
  if (fields.empty()) throw ParseError("domain declares no fields", 1, 1);
  return InputDomain(std::move(fields));
}

struct IndexedPoint {
  std::uint64_t index = 0;
  InputPoint point;
};

/// Lazy, constant-memory walk over the points of a 64-bit index range that
/// satisfy a predicate, in ascending index order. The current point is
/// advanced odometer-style rather than decoded per index.
class FilteredEnumeration {
 public:
  using Predicate = std::function<bool(const InputPoint&)>;

  FilteredEnumeration(const InputDomain& domain, Predicate predicate, std::uint64_t start, std::uint64_t end)
      : domain_(&domain), predicate_(std::move(predicate)), next_(start), end_(end) {
    domain.require_u64_cardinality();
    if (start > end || end > *domain.cardinality_u64()) throw ValidationError("enumeration range out of bounds");
    if (start < end) current_ = domain.decode(start);
  }

  FilteredEnumeration(const InputDomain& domain, Predicate predicate)
      : FilteredEnumeration(domain, std::move(predicate), 0, domain.require_u64_cardinality()) {}

  /// Next matching point, or nullopt when exhausted. Predicate exceptions
  /// surface as PredicateError.
  std::optional<IndexedPoint> next() {
    while (next_ < end_) {
      const std::uint64_t index = next_;
      bool keep = false;
      try {
        keep = predicate_(current_);
      } catch (const std::exception& e) {
        next_ = end_;
        throw PredicateError("predicate failed at index " + std::to_string(index) + ": " + e.what());
      }
      IndexedPoint hit;
      if (keep) hit = {index, current_};
      advance();
      if (keep) return hit;
    }
    return std::nullopt;
  }

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = IndexedPoint;
    using difference_type = std::ptrdiff_t;
    using pointer = const IndexedPoint*;
    using reference = const IndexedPoint&;

    iterator() = default;
    explicit iterator(FilteredEnumeration* owner) : owner_(owner) { ++*this; }

    reference operator*() const { return *item_; }
    pointer operator->() const { return &*item_; }
    iterator& operator++() {
      item_ = owner_->next();
      if (!item_) owner_ = nullptr;
      return *this;
    }
    void operator++(int) { ++*this; }
    bool operator==(const iterator& other) const { return owner_ == other.owner_; }

   private:
    FilteredEnumeration* owner_ = nullptr;
    std::optional<IndexedPoint> item_;
  };

  iterator begin() { return iterator(this); }
  iterator end() { return iterator(); }

 private:
  void advance() {
    ++next_;
    if (next_ >= end_) return;
    const auto& fields = domain_->fields();
    for (std::size_t k = fields.size(); k-- > 0;) {
      if (current_.values[k] < fields[k].hi) {
        ++current_.values[k];
        return;
      }
      current_.values[k] = fields[k].lo;
    }
  }

  const InputDomain* domain_;
  Predicate predicate_;
  std::uint64_t next_;
  std::uint64_t end_;
  InputPoint current_;
};

inline FilteredEnumeration enumerate_filtered(const InputDomain& domain, FilteredEnumeration::Predicate predicate) {
  return FilteredEnumeration(domain, std::move(predicate));
}

}  // namespace reliquant
