#pragma once
// Core domain types for 2x3 case-control genotype tables: margin arithmetic,
// CSV parsing, and enumeration/counting of all tables sharing fixed margins.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace genassoc {

// ============================================================================
// Domain types
// ============================================================================

/// One 2x3 case-control table.  Row one holds the case counts x0,x1,x2 and
/// row two the control counts y0,y1,y2; columns are the genotype classes
/// (aa, aA, AA).
struct ContingencyTable {
  std::int64_t x0 = 0, x1 = 0, x2 = 0;  // cases per genotype
  std::int64_t y0 = 0, y1 = 0, y2 = 0;  // controls per genotype

  std::int64_t n1() const { return x0 + x1 + x2; }  // case row total
  std::int64_t n2() const { return y0 + y1 + y2; }  // control row total
  std::int64_t total() const { return n1() + n2(); }

  friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

/// Column totals m0,m1,m2 plus row totals n1,n2 -- the sufficient statistic
/// the exact conditional test conditions on.
struct Margins {
  std::int64_t m0 = 0, m1 = 0, m2 = 0;  // column totals
  std::int64_t n1 = 0, n2 = 0;          // row totals

  std::int64_t total() const { return n1 + n2; }

  friend bool operator==(const Margins&, const Margins&) = default;
};

inline Margins margins_of(const ContingencyTable& t) {
  return Margins{t.x0 + t.y0, t.x1 + t.y1, t.x2 + t.y2, t.n1(), t.n2()};
}

/// Throws std::invalid_argument unless all six counts are non-negative and
/// both row totals are positive.
inline void check_valid(const ContingencyTable& t) {
  if (t.x0 < 0 || t.x1 < 0 || t.x2 < 0 || t.y0 < 0 || t.y1 < 0 || t.y2 < 0)
    throw std::invalid_argument("contingency table has a negative count");
  if (t.n1() < 1 || t.n2() < 1)
    throw std::invalid_argument("contingency table needs a positive total in each row");
}

// ============================================================================
// Parsing
// ============================================================================

/// Parses a CSV line "x0,x1,x2,y0,y1,y2" (ASCII digits, optional surrounding
/// whitespace per field).  Throws std::invalid_argument on malformed input or
/// on a table violating the row-positivity invariant.
inline ContingencyTable parse_table(const std::string& line) {
  std::int64_t v[6];
  std::size_t pos = 0;
  for (int field = 0; field < 6; ++field) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    std::size_t start = pos;
    while (pos < line.size() && line[pos] >= '0' && line[pos] <= '9') ++pos;
    if (pos == start) throw std::invalid_argument("expected a count in field " + std::to_string(field + 1));
    std::int64_t value = 0;
    for (std::size_t i = start; i < pos; ++i) {
      value = value * 10 + (line[i] - '0');
      if (value < 0) throw std::invalid_argument("count overflows in field " + std::to_string(field + 1));
    }
    v[field] = value;
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (field < 5) {
      if (pos >= line.size() || line[pos] != ',')
        throw std::invalid_argument("expected ',' after field " + std::to_string(field + 1));
      ++pos;
    }
  }
  if (pos < line.size() && line[pos] == '\r') ++pos;
  if (pos != line.size()) throw std::invalid_argument("trailing characters after the six counts");
  ContingencyTable t{v[0], v[1], v[2], v[3], v[4], v[5]};
  check_valid(t);
  return t;
}

// ============================================================================
// Enumeration of all tables with fixed margins
// ============================================================================
// The case row (x0,x1,x2) determines the table; it ranges over all integer
// points with 0 <= x_i <= m_i and x0+x1+x2 = n1.

inline std::int64_t min_x0(const Margins& m) { return std::max<std::int64_t>(0, m.n1 - m.m1 - m.m2); }
inline std::int64_t max_x0(const Margins& m) { return std::min(m.m0, m.n1); }

/// Calls f(table) for every table sharing the margins m, in lexicographic
/// order of (x0, x1).  Lazily streamed; nothing is materialized.  The exact
/// module re-implements this loop with the probability-ordered x0 sweep.
template <class F>
inline void for_each_table(const Margins& m, F&& f) {
  for (std::int64_t x0 = min_x0(m); x0 <= max_x0(m); ++x0) {
    const std::int64_t rest = m.n1 - x0;
    const std::int64_t lo = std::max<std::int64_t>(0, rest - m.m2);
    const std::int64_t hi = std::min(m.m1, rest);
    for (std::int64_t x1 = lo; x1 <= hi; ++x1) {
      const std::int64_t x2 = rest - x1;
      f(ContingencyTable{x0, x1, x2, m.m0 - x0, m.m1 - x1, m.m2 - x2});
    }
  }
}

namespace detail {
// Number of (x0,x1,x2) with x_i >= 0 and sum n, ignoring upper bounds.
inline std::int64_t unbounded_compositions(std::int64_t n) {
  return n >= 0 ? (n + 2) * (n + 1) / 2 : 0;
}
}  // namespace detail

/// Closed-form count of the tables for_each_table yields: inclusion-exclusion
/// over the upper bounds x_i <= m_i applied to the unbounded simplex count
/// C(n1+2, 2).
inline std::int64_t count_compositions(std::int64_t m0, std::int64_t m1, std::int64_t m2, std::int64_t n) {
  using detail::unbounded_compositions;
  return unbounded_compositions(n)
       - unbounded_compositions(n - m0 - 1)
       - unbounded_compositions(n - m1 - 1)
       - unbounded_compositions(n - m2 - 1)
       + unbounded_compositions(n - m0 - m1 - 2)
       + unbounded_compositions(n - m0 - m2 - 2)
       + unbounded_compositions(n - m1 - m2 - 2)
       - unbounded_compositions(n - m0 - m1 - m2 - 3);
}

inline std::int64_t count_tables(const Margins& m) {
  return count_compositions(m.m0, m.m1, m.m2, m.n1);
}

/// max_summands result: the worst-case table count over all margins with the
/// given row totals, plus one margin triple attaining it.
struct MaxSummands {
  std::int64_t count = 0;
  Margins at;
};

/// Maximum of count_tables over all column margins for row totals (n1, n2),
/// n1 <= n2.  For n2 >= 2n1 every x composition of n1 is feasible under the
/// margins (n1, n1, n2-n1), so the maximum is C(n1+2, 2) exactly; otherwise
/// the O(N^2) scan over ordered margin triples uses the closed-form count.
inline MaxSummands max_summands_detail(std::int64_t n1, std::int64_t n2) {
  if (n1 < 1 || n2 < n1) throw std::invalid_argument("max_summands requires 1 <= n1 <= n2");
  const std::int64_t N = n1 + n2;
  if (n2 >= 2 * n1) {
    return MaxSummands{(n1 + 2) * (n1 + 1) / 2, Margins{n1, n1, n2 - n1, n1, n2}};
  }
  // count_compositions is symmetric in (m0,m1,m2); scan m0 <= m1 <= m2 only.
  MaxSummands best;
  for (std::int64_t m0 = 0; 3 * m0 <= N; ++m0) {
    for (std::int64_t m1 = m0; 2 * m1 <= N - m0; ++m1) {
      const std::int64_t c = count_compositions(m0, m1, N - m0 - m1, n1);
      if (c > best.count) best = MaxSummands{c, Margins{m0, m1, N - m0 - m1, n1, n2}};
    }
  }
  return best;
}

/// Worst-case table count over all column margins for row totals (n1, n2).
/// Swapping rows bijects the table sets, so the count only depends on the
/// unordered pair; the detail scan wants the smaller total first.
inline std::int64_t max_summands(std::int64_t n1, std::int64_t n2) {
  return max_summands_detail(std::min(n1, n2), std::max(n1, n2)).count;
}

}  // namespace genassoc
