#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "selest/numeric.hpp"

namespace selest {

// One closed axis range. lo <= hi is enforced wherever intervals are built;
// emptiness lives on the enclosing Box, never as lo > hi.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }

    bool operator==(const Interval&) const = default;
};

// Axis-aligned hyperrectangle over d attributes. The one geometric primitive:
// domains B0, predicate ranges, and subpopulation supports are all boxes.
//
// Boundary semantics are measure-theoretic: a box touching another along a
// face intersects it with volume 0, and such degenerate boxes canonicalize to
// the empty box (all intervals (0,0), empty flag set, dimension preserved).
// Point membership is closed-left/open-right, which makes the integer
// encoding's equality intervals tile exactly.
class Box {
  public:
    Box() = default;

    static Box from_intervals(std::vector<Interval> dims) {
        if (dims.empty())
            throw std::invalid_argument("Box: need at least one dimension");
        for (const Interval& iv : dims) {
            if (!(iv.lo <= iv.hi))
                throw std::invalid_argument("Box: interval lo > hi");
            if (iv.lo >= iv.hi)
                return empty_box(dims.size());
        }
        Box b;
        b.dims_ = std::move(dims);
        return b;
    }

    static Box empty_box(std::size_t dim) {
        Box b;
        b.dims_.assign(dim, Interval{0.0, 0.0});
        b.empty_ = true;
        return b;
    }

    std::size_t dim() const { return dims_.size(); }
    bool empty() const { return empty_; }
    const Interval& operator[](std::size_t i) const { return dims_[i]; }
    const std::vector<Interval>& dims() const { return dims_; }

    double volume() const {
        if (empty_) return 0.0;
        double v = 1.0;
        for (const Interval& iv : dims_) v *= iv.length();
        return v;
    }

    // Closed-left/open-right membership.
    bool contains(std::span<const double> point) const {
        if (point.size() != dims_.size())
            throw std::invalid_argument("Box::contains: dimension mismatch");
        if (empty_) return false;
        for (std::size_t i = 0; i < dims_.size(); ++i)
            if (!(dims_[i].lo <= point[i] && point[i] < dims_[i].hi))
                return false;
        return true;
    }

    bool operator==(const Box&) const = default;

  private:
    std::vector<Interval> dims_;
    bool empty_ = false;
};

inline Box intersect(const Box& a, const Box& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("intersect: dimension mismatch");
    if (a.empty() || b.empty())
        return Box::empty_box(a.dim());
    std::vector<Interval> dims(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) {
        dims[i].lo = std::max(a[i].lo, b[i].lo);
        dims[i].hi = std::min(a[i].hi, b[i].hi);
        if (dims[i].lo >= dims[i].hi)
            return Box::empty_box(a.dim());
    }
    return Box::from_intervals(std::move(dims));
}

inline double volume(const Box& b) { return b.volume(); }

// Smallest box containing both arguments (empty inputs are ignored).
inline Box bounding_box(const Box& a, const Box& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    if (a.dim() != b.dim())
        throw std::invalid_argument("bounding_box: dimension mismatch");
    std::vector<Interval> dims(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        dims[i] = Interval{std::min(a[i].lo, b[i].lo), std::max(a[i].hi, b[i].hi)};
    return Box::from_intervals(std::move(dims));
}

// Union of boxes. Predicates with disjunction/negation arrive here as a
// disjunctive normal form.
struct Region {
    std::vector<Box> terms;

    Region() = default;
    explicit Region(Box b) { terms.push_back(std::move(b)); }
    explicit Region(std::vector<Box> ts) : terms(std::move(ts)) {}

    std::size_t dim() const { return terms.empty() ? 0 : terms.front().dim(); }

    bool contains(std::span<const double> point) const {
        for (const Box& t : terms)
            if (t.contains(point)) return true;
        return false;
    }
};

namespace detail {

// Exponent of the inclusion-exclusion sum; beyond this the 2^k subset walk
// stops being cheap.
inline constexpr std::size_t kMaxUnionTerms = 20;

inline void check_union_terms(const std::vector<const Box*>& terms) {
    if (terms.size() > kMaxUnionTerms)
        throw std::invalid_argument(
            "region volume: more than " + std::to_string(kMaxUnionTerms) +
            " union terms; split the predicate into smaller disjunctions");
    for (std::size_t i = 1; i < terms.size(); ++i)
        if (terms[i]->dim() != terms[0]->dim())
            throw std::invalid_argument("region volume: dimension mismatch among terms");
}

inline double include_exclude(const std::vector<const Box*>& terms,
                              std::size_t start, const Box& current, int depth) {
    double total = 0.0;
    for (std::size_t j = start; j < terms.size(); ++j) {
        Box inter = intersect(current, *terms[j]);
        if (inter.empty()) continue;
        total += (depth % 2 == 0 ? 1.0 : -1.0) * inter.volume();
        total += include_exclude(terms, j + 1, inter, depth + 1);
    }
    return total;
}

} // namespace detail

// Exact measure of a union of boxes via inclusion-exclusion over non-empty
// subsets. Branches with an empty running intersection are pruned, so the
// worst case 2^k is rarely reached.
inline double region_volume(const Region& r) {
    std::vector<const Box*> terms;
    for (const Box& t : r.terms)
        if (!t.empty()) terms.push_back(&t);
    if (terms.empty()) return 0.0;
    detail::check_union_terms(terms);

    double total = 0.0;
    for (std::size_t j = 0; j < terms.size(); ++j)
        total += terms[j]->volume() +
                 detail::include_exclude(terms, j + 1, *terms[j], 1);
    return total;
}

inline double region_intersect_volume(const Region& r, const Box& b) {
    if (b.empty()) return 0.0;
    Region clipped;
    clipped.terms.reserve(r.terms.size());
    for (const Box& t : r.terms) {
        Box inter = intersect(t, b);
        if (!inter.empty()) clipped.terms.push_back(std::move(inter));
    }
    return region_volume(clipped);
}

inline Region clip_region(const Region& r, const Box& b) {
    Region out;
    for (const Box& t : r.terms) {
        Box inter = intersect(t, b);
        if (!inter.empty()) out.terms.push_back(std::move(inter));
    }
    if (out.terms.empty()) out.terms.push_back(Box::empty_box(b.dim()));
    return out;
}

// --- textual form ----------------------------------------------------------
//
// Box:    [lo1,hi1]x[lo2,hi2]x...
// Region: boxes joined with 'U'

inline std::string format_box(const Box& b) {
    std::string out;
    for (std::size_t i = 0; i < b.dim(); ++i) {
        if (i) out += 'x';
        out += '[';
        out += fmt_double(b[i].lo);
        out += ',';
        out += fmt_double(b[i].hi);
        out += ']';
    }
    return out;
}

inline std::string format_region(const Region& r) {
    std::string out;
    for (std::size_t i = 0; i < r.terms.size(); ++i) {
        if (i) out += 'U';
        out += format_box(r.terms[i]);
    }
    return out;
}

namespace detail {

inline std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

} // namespace detail

inline Box parse_box(std::string_view text) {
    text = detail::strip(text);
    std::vector<Interval> dims;
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (text[pos] != '[')
            throw std::runtime_error("box parse: expected '[' in '" + std::string(text) + "'");
        std::size_t comma = text.find(',', pos);
        std::size_t close = text.find(']', pos);
        if (comma == std::string_view::npos || close == std::string_view::npos || comma > close)
            throw std::runtime_error("box parse: malformed interval in '" + std::string(text) + "'");
        Interval iv;
        iv.lo = parse_double(detail::strip(text.substr(pos + 1, comma - pos - 1)));
        iv.hi = parse_double(detail::strip(text.substr(comma + 1, close - comma - 1)));
        if (iv.lo > iv.hi)
            throw std::runtime_error("box parse: lo > hi in '" + std::string(text) + "'");
        dims.push_back(iv);
        pos = close + 1;
        if (pos < text.size()) {
            if (text[pos] != 'x')
                throw std::runtime_error("box parse: expected 'x' between intervals");
            ++pos;
        }
    }
    if (dims.empty())
        throw std::runtime_error("box parse: empty text");
    return Box::from_intervals(std::move(dims));
}

inline Region parse_region(std::string_view text) {
    Region r;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t sep = text.find('U', pos);
        std::string_view piece = sep == std::string_view::npos
                                     ? text.substr(pos)
                                     : text.substr(pos, sep - pos);
        r.terms.push_back(parse_box(piece));
        if (sep == std::string_view::npos) break;
        pos = sep + 1;
    }
    if (r.terms.empty())
        throw std::runtime_error("region parse: empty text");
    for (const Box& t : r.terms)
        if (t.dim() != r.terms.front().dim())
            throw std::runtime_error("region parse: mixed dimensions");
    return r;
}

} // namespace selest
