// Test-only brute-force oracles. Everything here is deliberately independent
// of the library's volume/assembly code paths: interval containment, unit-cell
// counting, and piecewise integration over explicit endpoint partitions.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "selest/geometry.hpp"

namespace oracles {

// ∫ f(x)^2 dx for a 1-d mixture f = sum w_z / len_z over [lo_z, hi_z],
// integrated piecewise over the endpoint partition.
inline double piecewise_f2_integral(const std::vector<selest::Interval>& supports,
                                    const std::vector<double>& weights) {
    std::vector<double> cuts;
    for (const auto& iv : supports) {
        cuts.push_back(iv.lo);
        cuts.push_back(iv.hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        double mid = 0.5 * (cuts[c] + cuts[c + 1]);
        double density = 0.0;
        for (std::size_t z = 0; z < supports.size(); ++z)
            if (supports[z].lo <= mid && mid < supports[z].hi)
                density += weights[z] / (supports[z].hi - supports[z].lo);
        total += (cuts[c + 1] - cuts[c]) * density * density;
    }
    return total;
}

// ∫_{B} f(x) dx for the same 1-d mixture, with B = [blo, bhi].
inline double piecewise_box_integral(const std::vector<selest::Interval>& supports,
                                     const std::vector<double>& weights, double blo, double bhi) {
    std::vector<double> cuts{blo, bhi};
    for (const auto& iv : supports) {
        if (iv.lo > blo && iv.lo < bhi) cuts.push_back(iv.lo);
        if (iv.hi > blo && iv.hi < bhi) cuts.push_back(iv.hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        double mid = 0.5 * (cuts[c] + cuts[c + 1]);
        double density = 0.0;
        for (std::size_t z = 0; z < supports.size(); ++z)
            if (supports[z].lo <= mid && mid < supports[z].hi)
                density += weights[z] / (supports[z].hi - supports[z].lo);
        total += (cuts[c + 1] - cuts[c]) * density;
    }
    return total;
}

// Union volume of integer-coordinate boxes inside [0, extent]^d by counting
// covered unit cells (d <= 3 keeps this cheap).
inline double unit_cell_union_volume(const std::vector<selest::Box>& boxes, std::size_t dim,
                                     int extent) {
    std::vector<int> idx(dim, 0);
    double covered = 0.0;
    while (true) {
        std::vector<double> center(dim);
        for (std::size_t k = 0; k < dim; ++k) center[k] = idx[k] + 0.5;
        for (const selest::Box& b : boxes) {
            if (b.empty()) continue;
            bool inside = true;
            for (std::size_t k = 0; k < dim; ++k)
                if (!(b[k].lo <= center[k] && center[k] < b[k].hi)) {
                    inside = false;
                    break;
                }
            if (inside) {
                covered += 1.0;
                break;
            }
        }
        std::size_t k = dim;
        while (k > 0 && idx[k - 1] == extent - 1) --k;
        if (k == 0) break;
        ++idx[k - 1];
        for (std::size_t r = k; r < dim; ++r) idx[r] = 0;
    }
    return covered;
}

// Entropy of a bucket histogram: -sum w_j log(w_j / v_j), with 0 log 0 = 0.
inline double bucket_entropy(const std::vector<double>& w, const std::vector<double>& volumes) {
    double h = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j)
        if (w[j] > 0.0) h -= w[j] * std::log(w[j] / volumes[j]);
    return h;
}

} // namespace oracles
