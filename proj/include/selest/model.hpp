#pragma once

#include <cmath>
#include <fstream>
#include <iostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "selest/geometry.hpp"
#include "selest/numeric.hpp"

namespace selest {

// A predicate region paired with its actual selectivity; the sole training
// signal. Terms are clipped into the domain at construction.
struct ObservedQuery {
    Region predicate;
    double selectivity = 0.0;

    static ObservedQuery make(Region predicate, double selectivity, const Box& domain) {
        if (selectivity < 0.0 || selectivity > 1.0)
            throw std::invalid_argument("observed query: selectivity outside [0,1]");
        ObservedQuery q;
        q.predicate = clip_region(predicate, domain);
        q.selectivity = selectivity;
        return q;
    }

    // The predicate covers the whole domain, i.e. carries no information
    // beyond the default query.
    bool is_full_domain(const Box& domain) const {
        double dv = domain.volume();
        return region_intersect_volume(predicate, domain) >= dv * (1.0 - 1e-12);
    }
};

// Weighted sum of uniform densities over possibly overlapping support boxes.
// Immutable once built; training produces a new value. Weights may be
// negative (positivity is relaxed in the penalized training problem), so
// reported estimates are clamped to [0,1] at this API edge while the raw
// linear value stays available for diagnostics.
class MixtureModel {
  public:
    MixtureModel(Box domain, std::vector<Box> supports, std::vector<double> weights)
        : domain_(std::move(domain)),
          supports_(std::move(supports)),
          weights_(std::move(weights)) {
        if (domain_.empty() || domain_.volume() <= 0.0)
            throw std::invalid_argument("mixture model: empty domain");
        if (supports_.empty())
            throw std::invalid_argument("mixture model: need at least one support");
        if (supports_.size() != weights_.size())
            throw std::invalid_argument("mixture model: supports/weights length mismatch");
        for (std::size_t z = 0; z < supports_.size(); ++z) {
            const Box& g = supports_[z];
            if (g.dim() != domain_.dim())
                throw std::invalid_argument("mixture model: support " + std::to_string(z) +
                                            " has wrong dimension");
            if (g.volume() <= 0.0)
                throw std::invalid_argument("mixture model: support " + std::to_string(z) +
                                            " has zero volume");
            for (std::size_t i = 0; i < g.dim(); ++i)
                if (g[i].lo < domain_[i].lo || g[i].hi > domain_[i].hi)
                    throw std::invalid_argument("mixture model: support " + std::to_string(z) +
                                                " escapes the domain");
        }
    }

    // The uniform prior over the domain; what an estimator answers before any
    // informative query has been observed.
    static MixtureModel uniform_prior(Box domain) {
        Box support = domain;
        return MixtureModel(std::move(domain), {std::move(support)}, {1.0});
    }

    const Box& domain() const { return domain_; }
    const std::vector<Box>& supports() const { return supports_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return supports_.size(); }

    double weight_sum() const {
        double s = 0.0;
        for (double w : weights_) s += w;
        return s;
    }

    // Sum_z w_z |G_z ∩ B| / |G_z|, unclamped.
    double estimate_raw(const Region& predicate) const {
        if (predicate.dim() != domain_.dim())
            throw std::invalid_argument("estimate: predicate dimension mismatch");
        double total = 0.0;
        for (std::size_t z = 0; z < supports_.size(); ++z)
            total += weights_[z] *
                     region_intersect_volume(predicate, supports_[z]) / supports_[z].volume();
        return total;
    }

    double estimate(const Region& predicate) const {
        return clamp01(estimate_raw(predicate));
    }

    double estimate(const Box& predicate) const {
        return estimate(Region(predicate));
    }

    // Raw model density; negative values possible and deliberately not hidden.
    double density_at(std::span<const double> point) const {
        double total = 0.0;
        for (std::size_t z = 0; z < supports_.size(); ++z)
            if (supports_[z].contains(point))
                total += weights_[z] / supports_[z].volume();
        return total;
    }

    void save(const std::string& path) const {
        nlohmann::json j;
        j["domain"] = format_box(domain_);
        nlohmann::json sup = nlohmann::json::array();
        for (const Box& g : supports_) sup.push_back(format_box(g));
        j["supports"] = std::move(sup);
        j["weights"] = weights_;
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write model file: " + path);
        out << j.dump(2) << '\n';
    }

    static MixtureModel load(const std::string& path, std::ostream& warnings = std::cerr) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open model file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("model parse error in " + path + ": " + e.what());
        }
        Box domain = parse_box(j.at("domain").get<std::string>());
        std::vector<Box> supports;
        for (const auto& s : j.at("supports"))
            supports.push_back(parse_box(s.get<std::string>()));
        std::vector<double> weights = j.at("weights").get<std::vector<double>>();
        MixtureModel model(std::move(domain), std::move(supports), std::move(weights));
        double sum = model.weight_sum();
        if (std::abs(sum - 1.0) > 1e-3)
            warnings << "warning: model weights sum to " << fmt_double(sum)
                     << " (expected 1 within 1e-3)\n";
        return model;
    }

  private:
    Box domain_;
    std::vector<Box> supports_;
    std::vector<double> weights_;
};

} // namespace selest
