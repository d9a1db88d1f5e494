#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "selest/error.hpp"
#include "selest/geometry.hpp"
#include "selest/model.hpp"
#include "selest/random.hpp"
#include "selest/synth.hpp"

namespace selest {

// --- scan-based: equiwidth multidimensional histogram ------------------------

struct EquiwidthHistogram {
    Box domain;
    std::size_t bins_per_dim = 1;
    std::vector<double> frequencies; // dense, row-major over bins_per_dim^d cells

    std::size_t cells() const { return frequencies.size(); }

    Box cell_box(const std::vector<std::size_t>& idx) const {
        std::vector<Interval> dims(domain.dim());
        for (std::size_t d = 0; d < domain.dim(); ++d) {
            double w = domain[d].length() / static_cast<double>(bins_per_dim);
            dims[d] = Interval{domain[d].lo + static_cast<double>(idx[d]) * w,
                               domain[d].lo + static_cast<double>(idx[d] + 1) * w};
        }
        return Box::from_intervals(std::move(dims));
    }
};

inline EquiwidthHistogram build_equiwidth(const Dataset& data, std::size_t bins_per_dim,
                                          const Box& domain) {
    if (bins_per_dim < 1) throw std::invalid_argument("build_equiwidth: bins_per_dim must be >= 1");
    double cell_budget = std::pow(static_cast<double>(bins_per_dim),
                                  static_cast<double>(domain.dim()));
    if (cell_budget > 1e7)
        throw std::invalid_argument("build_equiwidth: cell budget exceeded (" +
                                    std::to_string(bins_per_dim) + "^" +
                                    std::to_string(domain.dim()) + " > 1e7)");
    if (data.rows() == 0) throw std::invalid_argument("build_equiwidth: empty dataset");

    EquiwidthHistogram h;
    h.domain = domain;
    h.bins_per_dim = bins_per_dim;
    h.frequencies.assign(static_cast<std::size_t>(cell_budget), 0.0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        auto row = data.row(i);
        std::size_t flat = 0;
        for (std::size_t d = 0; d < domain.dim(); ++d) {
            double w = domain[d].length() / static_cast<double>(bins_per_dim);
            auto k = static_cast<long>(std::floor((row[d] - domain[d].lo) / w));
            k = std::clamp<long>(k, 0, static_cast<long>(bins_per_dim) - 1);
            flat = flat * bins_per_dim + static_cast<std::size_t>(k);
        }
        h.frequencies[flat] += 1.0;
    }
    for (double& f : h.frequencies) f /= static_cast<double>(data.rows());
    return h;
}

inline double estimate_equiwidth(const EquiwidthHistogram& h, const Region& predicate) {
    if (predicate.dim() != h.domain.dim())
        throw std::invalid_argument("estimate_equiwidth: dimension mismatch");
    const std::size_t d = h.domain.dim();

    // Uniform-within-cell over the cells touching the predicate's hull.
    Box hull = Box::empty_box(d);
    for (const Box& t : predicate.terms) hull = bounding_box(hull, intersect(t, h.domain));
    if (hull.empty()) return 0.0;

    std::vector<std::size_t> lo(d), hi(d), idx(d);
    for (std::size_t k = 0; k < d; ++k) {
        double w = h.domain[k].length() / static_cast<double>(h.bins_per_dim);
        auto a = static_cast<long>(std::floor((hull[k].lo - h.domain[k].lo) / w));
        auto b = static_cast<long>(std::floor((hull[k].hi - h.domain[k].lo) / w));
        lo[k] = static_cast<std::size_t>(std::clamp<long>(a, 0, static_cast<long>(h.bins_per_dim) - 1));
        hi[k] = static_cast<std::size_t>(std::clamp<long>(b, 0, static_cast<long>(h.bins_per_dim) - 1));
    }
    idx = lo;
    double total = 0.0;
    while (true) {
        std::size_t flat = 0;
        for (std::size_t k = 0; k < d; ++k) flat = flat * h.bins_per_dim + idx[k];
        if (h.frequencies[flat] != 0.0) {
            Box cell = h.cell_box(idx);
            total += h.frequencies[flat] * region_intersect_volume(predicate, cell) / cell.volume();
        }
        std::size_t k = d;
        while (k > 0 && idx[k - 1] == hi[k - 1]) --k;
        if (k == 0) break;
        ++idx[k - 1];
        for (std::size_t r = k; r < d; ++r) idx[r] = lo[r];
    }
    return clamp01(total);
}

// --- scan-based: uniform random sample ---------------------------------------

struct SampleEstimator {
    std::vector<std::vector<double>> sample;

    std::size_t size() const { return sample.size(); }
};

inline SampleEstimator build_sample(const Dataset& data, std::size_t sample_size,
                                    std::uint64_t seed) {
    if (data.rows() == 0) throw std::invalid_argument("build_sample: empty dataset");
    sample_size = std::min(sample_size, data.rows());
    if (sample_size == 0) throw std::invalid_argument("build_sample: sample size must be >= 1");
    RandomStream rng = RandomStream(seed).substream("sample");
    std::vector<std::size_t> idx(data.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < sample_size; ++i)
        std::swap(idx[i], idx[i + rng.below(data.rows() - i)]);
    SampleEstimator est;
    est.sample.reserve(sample_size);
    for (std::size_t i = 0; i < sample_size; ++i) {
        auto row = data.row(idx[i]);
        est.sample.emplace_back(row.begin(), row.end());
    }
    return est;
}

inline double estimate_sample(const SampleEstimator& est, const Region& predicate) {
    if (est.sample.empty()) throw std::invalid_argument("estimate_sample: empty sample");
    std::size_t hits = 0;
    for (const auto& row : est.sample)
        if (predicate.contains(row)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(est.sample.size());
}

// --- query-driven: max-entropy histogram over split buckets ------------------

// Buckets partition the domain (pairwise volume-0 intersections, union = B0).
struct BucketHistogram {
    Box domain;
    std::vector<Box> buckets;
    std::vector<double> frequencies;

    static BucketHistogram whole_domain(Box domain) {
        BucketHistogram h;
        h.buckets.push_back(domain);
        h.frequencies.push_back(1.0);
        h.domain = std::move(domain);
        return h;
    }

    std::size_t size() const { return buckets.size(); }

    MixtureModel as_mixture() const {
        return MixtureModel(domain, buckets, frequencies);
    }
};

inline double estimate_bucket(const BucketHistogram& h, const Region& predicate) {
    double total = 0.0;
    for (std::size_t j = 0; j < h.buckets.size(); ++j)
        total += h.frequencies[j] *
                 region_intersect_volume(predicate, h.buckets[j]) / h.buckets[j].volume();
    return clamp01(total);
}

namespace detail {

// Axis-by-axis slab decomposition of bucket minus inner (inner must be the
// intersection of bucket with some box): at most 2d remainder pieces.
inline std::vector<Box> guillotine_remainder(const Box& bucket, const Box& inner) {
    std::vector<Box> pieces;
    std::vector<Interval> current = bucket.dims();
    for (std::size_t d = 0; d < bucket.dim(); ++d) {
        if (current[d].lo < inner[d].lo) {
            std::vector<Interval> slab = current;
            slab[d] = Interval{current[d].lo, inner[d].lo};
            pieces.push_back(Box::from_intervals(std::move(slab)));
            current[d].lo = inner[d].lo;
        }
        if (inner[d].hi < current[d].hi) {
            std::vector<Interval> slab = current;
            slab[d] = Interval{inner[d].hi, current[d].hi};
            pieces.push_back(Box::from_intervals(std::move(slab)));
            current[d].hi = inner[d].hi;
        }
    }
    return pieces;
}

} // namespace detail

// Split every bucket that partially overlaps the predicate into its
// intersection plus the guillotine remainder; frequency follows volume
// (uniform within the old bucket). Bucket growth is unbounded by design;
// the cap turns the exponential blowup into a reportable error.
inline BucketHistogram split_buckets(const BucketHistogram& hist, const Box& new_predicate,
                                     std::size_t bucket_cap = 50000) {
    Box pred = intersect(new_predicate, hist.domain);
    BucketHistogram out;
    out.domain = hist.domain;
    for (std::size_t j = 0; j < hist.buckets.size(); ++j) {
        const Box& bucket = hist.buckets[j];
        Box inner = intersect(bucket, pred);
        if (inner.empty() || inner == bucket) {
            out.buckets.push_back(bucket);
            out.frequencies.push_back(hist.frequencies[j]);
            continue;
        }
        std::vector<Box> pieces = detail::guillotine_remainder(bucket, inner);
        pieces.push_back(inner);
        double bucket_volume = bucket.volume();
        double assigned = 0.0;
        for (std::size_t p = 0; p < pieces.size(); ++p) {
            out.buckets.push_back(pieces[p]);
            if (p + 1 < pieces.size()) {
                double f = hist.frequencies[j] * pieces[p].volume() / bucket_volume;
                out.frequencies.push_back(f);
                assigned += f;
            } else {
                // remainder keeps the mass balance exact
                out.frequencies.push_back(hist.frequencies[j] - assigned);
            }
        }
        if (out.buckets.size() > bucket_cap)
            throw std::runtime_error("split_buckets: bucket count exceeded the cap of " +
                                     std::to_string(bucket_cap) +
                                     "; bucket growth is exponential in the query count");
    }
    return out;
}

// Max-entropy frequencies by iterative scaling. Requires the buckets to be
// fully inside or fully outside every predicate (guaranteed after splitting
// on all of them), i.e. every A_ij is 0 or 1. The full-domain assertion
// (B0, 1) is always part of the system. Assertions with s_i = 0 pin their
// buckets to zero up front so all multipliers stay positive.
inline BucketHistogram iterative_scaling(const BucketHistogram& hist,
                                         const std::vector<ObservedQuery>& queries,
                                         double tol = 1e-8, int max_sweeps = 10000) {
    const std::size_t m = hist.buckets.size();

    std::vector<const Region*> preds;
    std::vector<double> sel;
    bool have_domain_row = false;
    Region domain_region(hist.domain);
    for (const ObservedQuery& q : queries) {
        preds.push_back(&q.predicate);
        sel.push_back(q.selectivity);
        if (q.is_full_domain(hist.domain)) have_domain_row = true;
    }
    if (!have_domain_row) {
        preds.push_back(&domain_region);
        sel.push_back(1.0);
    }
    const std::size_t n = preds.size();

    // 0/1 membership: bucket j in predicate i
    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            double ratio =
                region_intersect_volume(*preds[i], hist.buckets[j]) / hist.buckets[j].volume();
            if (ratio >= 1.0 - 1e-9) {
                members[i].push_back(j);
            } else if (ratio > 1e-9) {
                throw std::invalid_argument(
                    "iterative_scaling: bucket " + std::to_string(j) +
                    " partially overlaps assertion " + std::to_string(i) +
                    "; split the buckets on every predicate first");
            }
        }
    }

    std::vector<bool> pinned_zero(m, false);
    for (std::size_t i = 0; i < n; ++i)
        if (sel[i] == 0.0)
            for (std::size_t j : members[i]) pinned_zero[j] = true;

    constexpr double inv_e = 0.36787944117144232; // 1/e
    std::vector<double> w(m, 0.0);
    for (std::size_t j = 0; j < m; ++j)
        if (!pinned_zero[j]) w[j] = hist.buckets[j].volume() * inv_e;
    std::vector<double> z(n, 1.0);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (sel[i] == 0.0) continue; // already pinned
            double base_sum = 0.0;
            for (std::size_t j : members[i])
                if (!pinned_zero[j]) base_sum += w[j];
            base_sum /= z[i];
            if (!(base_sum > 0.0))
                throw NumericError("iterative_scaling: assertion " + std::to_string(i) +
                                   " contradicts the others (no mass available)");
            double z_new = sel[i] / base_sum;
            if (!std::isfinite(z_new) || z_new > 1e100)
                throw NumericError("iterative_scaling: assertion " + std::to_string(i) +
                                   " diverged; the assertion set is contradictory");
            double factor = z_new / z[i];
            for (std::size_t j : members[i])
                if (!pinned_zero[j]) w[j] *= factor;
            max_change = std::max(max_change, std::abs(factor - 1.0));
            z[i] = z_new;
        }
        if (max_change <= tol) break;
    }

    for (double v : w)
        if (!std::isfinite(v))
            throw NumericError("iterative_scaling: frequencies diverged");

    BucketHistogram out = hist;
    out.frequencies = std::move(w);
    return out;
}

// The full query-driven histogram baseline: STHoles-style splitting on every
// predicate, then max-entropy frequencies. Predicates must be single boxes.
inline BucketHistogram train_maxent_histogram(const std::vector<ObservedQuery>& queries,
                                              const Box& domain,
                                              std::size_t bucket_cap = 50000) {
    BucketHistogram hist = BucketHistogram::whole_domain(domain);
    for (const ObservedQuery& q : queries) {
        if (q.predicate.terms.size() != 1)
            throw std::invalid_argument(
                "train_maxent_histogram: only single-box predicates are supported");
        hist = split_buckets(hist, q.predicate.terms.front(), bucket_cap);
    }
    return iterative_scaling(hist, queries);
}

} // namespace selest
