#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "selest/geometry.hpp"
#include "selest/model.hpp"
#include "selest/random.hpp"

namespace selest {

using Point = std::vector<double>;

enum class SubpopMethod { sampling, clustering };

struct SubpopConfig {
    int points_per_predicate = 10;
    std::optional<std::size_t> m_override;
    int neighbor_count = 10;
    std::uint64_t seed = 0;
    SubpopMethod method = SubpopMethod::sampling;
};

// Default number of subpopulations for n observed queries.
inline std::size_t default_subpop_count(std::size_t n) {
    return std::min<std::size_t>(4 * n, 4000);
}

// Random points representing the query workload: points_per_predicate draws
// from each predicate region, area-weighted across the region's terms. Each
// predicate gets its own substream derived from (seed, query index), so the
// pool is reproducible regardless of evaluation order.
inline std::vector<Point> scatter_points(const std::vector<ObservedQuery>& queries,
                                         const SubpopConfig& cfg) {
    std::vector<Point> pool;
    pool.reserve(queries.size() * static_cast<std::size_t>(cfg.points_per_predicate));
    RandomStream root(cfg.seed);
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const Region& pred = queries[qi].predicate;
        std::vector<double> term_volumes;
        double total = 0.0;
        for (const Box& t : pred.terms) {
            term_volumes.push_back(t.volume());
            total += term_volumes.back();
        }
        if (total <= 0.0)
            throw std::invalid_argument("scatter_points: query " + std::to_string(qi) +
                                        " has an empty predicate");
        RandomStream rng = root.substream(qi);
        for (int p = 0; p < cfg.points_per_predicate; ++p) {
            double pick = rng.uniform01() * total;
            std::size_t ti = 0;
            double cum = term_volumes[0];
            while (ti + 1 < term_volumes.size() && pick >= cum)
                cum += term_volumes[++ti];
            const Box& t = pred.terms[ti];
            Point x(t.dim());
            for (std::size_t d = 0; d < t.dim(); ++d)
                x[d] = rng.uniform(t[d].lo, t[d].hi);
            pool.push_back(std::move(x));
        }
    }
    return pool;
}

namespace detail {

inline double sq_dist(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

inline Box widen_and_clip(std::vector<Interval> dims, const Box& domain) {
    for (std::size_t d = 0; d < dims.size(); ++d) {
        double eps = 1e-9 * domain[d].length();
        if (dims[d].length() < eps) {
            double mid = 0.5 * (dims[d].lo + dims[d].hi);
            dims[d] = Interval{mid - 0.5 * eps, mid + 0.5 * eps};
        }
        dims[d].lo = std::max(dims[d].lo, domain[d].lo);
        dims[d].hi = std::min(dims[d].hi, domain[d].hi);
    }
    return Box::from_intervals(std::move(dims));
}

inline Box queries_bounding_box(const std::vector<ObservedQuery>& queries, const Box& domain) {
    Box bb = Box::empty_box(domain.dim());
    for (const ObservedQuery& q : queries)
        for (const Box& t : q.predicate.terms)
            bb = bounding_box(bb, t);
    if (bb.empty()) bb = domain;
    std::vector<Interval> dims = bb.dims();
    return widen_and_clip(std::move(dims), domain);
}

// Uniform sample of k indices without replacement (partial Fisher-Yates).
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, RandomStream& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i)
        std::swap(idx[i], idx[i + rng.below(n - i)]);
    idx.resize(k);
    return idx;
}

// K-means++ seeding. Ties and zero total weight resolve to the lowest index;
// when every remaining point coincides with a chosen center, seeding stops
// early and the effective k shrinks.
inline std::vector<Point> kmeans_pp_seed(const std::vector<Point>& points, std::size_t k,
                                         RandomStream& rng) {
    std::vector<Point> centers;
    centers.reserve(k);
    centers.push_back(points[rng.below(points.size())]);
    std::vector<double> dist2(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        dist2[i] = sq_dist(points[i], centers.back());
    while (centers.size() < k) {
        double total = std::accumulate(dist2.begin(), dist2.end(), 0.0);
        if (total <= 0.0) break;
        double pick = rng.uniform01() * total;
        std::size_t chosen = 0;
        double cum = dist2[0];
        while (chosen + 1 < points.size() && pick >= cum)
            cum += dist2[++chosen];
        centers.push_back(points[chosen]);
        for (std::size_t i = 0; i < points.size(); ++i)
            dist2[i] = std::min(dist2[i], sq_dist(points[i], centers.back()));
    }
    return centers;
}

// Lloyd iterations to an assignment fixpoint (or 50 rounds). Assignment ties
// go to the lowest center index.
inline std::vector<std::size_t> lloyd(const std::vector<Point>& points,
                                      std::vector<Point>& centers, int max_iters = 50) {
    const std::size_t dim = points.front().size();
    std::vector<std::size_t> assign(points.size(), 0);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < points.size(); ++i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < centers.size(); ++c) {
                double d = sq_dist(points[i], centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        std::vector<Point> sums(centers.size(), Point(dim, 0.0));
        std::vector<std::size_t> counts(centers.size(), 0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            for (std::size_t d = 0; d < dim; ++d) sums[assign[i]][d] += points[i][d];
            ++counts[assign[i]];
        }
        for (std::size_t c = 0; c < centers.size(); ++c)
            if (counts[c] > 0)
                for (std::size_t d = 0; d < dim; ++d)
                    centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
        if (!changed) break;
    }
    return assign;
}

} // namespace detail

// Sampling-based supports: sampled scatter points act as centers; each box
// side is twice the average per-dimension gap to the neighbor_count nearest
// centers (nearest by full Euclidean distance).
inline std::vector<Box> generate_sampling(const std::vector<ObservedQuery>& queries,
                                          const Box& domain, const SubpopConfig& cfg) {
    std::vector<Point> pool = scatter_points(queries, cfg);
    if (pool.empty())
        throw std::invalid_argument("generate_sampling: empty scatter pool");
    std::size_t m = cfg.m_override.value_or(default_subpop_count(queries.size()));
    m = std::min(m, pool.size());

    RandomStream rng = RandomStream(cfg.seed).substream("centers");
    std::vector<Point> centers;
    if (pool.size() <= m) {
        centers = pool;
    } else {
        for (std::size_t i : detail::sample_indices(pool.size(), m, rng))
            centers.push_back(pool[i]);
    }
    if (centers.size() < 2)
        return {detail::queries_bounding_box(queries, domain)};

    const std::size_t dim = domain.dim();
    const std::size_t k = std::min<std::size_t>(cfg.neighbor_count, centers.size() - 1);
    std::vector<Box> boxes;
    boxes.reserve(centers.size());
    std::vector<std::pair<double, std::size_t>> order(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
        for (std::size_t j = 0; j < centers.size(); ++j)
            order[j] = {detail::sq_dist(centers[i], centers[j]), j};
        order[i].first = std::numeric_limits<double>::infinity(); // exclude self
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1),
                         order.end());
        std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
        std::vector<Interval> dims(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            double avg = 0.0;
            for (std::size_t t = 0; t < k; ++t)
                avg += std::abs(centers[i][d] - centers[order[t].second][d]);
            avg /= static_cast<double>(k);
            dims[d] = Interval{centers[i][d] - avg, centers[i][d] + avg};
        }
        boxes.push_back(detail::widen_and_clip(std::move(dims), domain));
    }
    return boxes;
}

// Clustering-based supports: K-means++ groups the scatter points and each
// non-empty cluster contributes the tight bounding box of its members, so the
// union of the boxes covers every scattered point.
inline std::vector<Box> generate_clustering(const std::vector<ObservedQuery>& queries,
                                            const Box& domain, const SubpopConfig& cfg) {
    std::vector<Point> pool = scatter_points(queries, cfg);
    if (pool.empty())
        throw std::invalid_argument("generate_clustering: empty scatter pool");
    std::size_t m = cfg.m_override.value_or(default_subpop_count(queries.size()));
    m = std::min(m, pool.size());
    if (m < 2)
        return {detail::queries_bounding_box(queries, domain)};

    RandomStream rng = RandomStream(cfg.seed).substream("kmeans");
    std::vector<Point> centers = detail::kmeans_pp_seed(pool, m, rng);
    std::vector<std::size_t> assign = detail::lloyd(pool, centers);

    const std::size_t dim = domain.dim();
    std::vector<Box> boxes;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        std::vector<Interval> dims(dim, Interval{std::numeric_limits<double>::infinity(),
                                                 -std::numeric_limits<double>::infinity()});
        bool any = false;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (assign[i] != c) continue;
            any = true;
            for (std::size_t d = 0; d < dim; ++d) {
                dims[d].lo = std::min(dims[d].lo, pool[i][d]);
                dims[d].hi = std::max(dims[d].hi, pool[i][d]);
            }
        }
        if (!any) continue; // empty cluster
        boxes.push_back(detail::widen_and_clip(std::move(dims), domain));
    }
    return boxes;
}

inline std::vector<Box> generate_subpopulations(const std::vector<ObservedQuery>& queries,
                                                const Box& domain, const SubpopConfig& cfg) {
    return cfg.method == SubpopMethod::sampling ? generate_sampling(queries, domain, cfg)
                                                : generate_clustering(queries, domain, cfg);
}

} // namespace selest
