#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "selest/encode.hpp"
#include "selest/error.hpp"
#include "selest/geometry.hpp"
#include "selest/model.hpp"
#include "selest/random.hpp"

namespace selest {

// N tuples in encoded coordinates, row-major. Every cell satisfies
// lo <= x < hi of its column's encoded interval, so the half-open membership
// test counts the full-domain predicate at exactly 1.
class Dataset {
  public:
    Dataset(SchemaSpec schema, std::vector<double> cells)
        : schema_(std::move(schema)), cells_(std::move(cells)) {
        if (schema_.dim() == 0)
            throw std::invalid_argument("dataset: empty schema");
        if (cells_.size() % schema_.dim() != 0)
            throw std::invalid_argument("dataset: cell count not a multiple of the dimension");
    }

    const SchemaSpec& schema() const { return schema_; }
    std::size_t dim() const { return schema_.dim(); }
    std::size_t rows() const { return cells_.empty() ? 0 : cells_.size() / dim(); }
    std::span<const double> row(std::size_t i) const {
        return {cells_.data() + i * dim(), dim()};
    }
    const std::vector<double>& cells() const { return cells_; }

  private:
    SchemaSpec schema_;
    std::vector<double> cells_;
};

namespace detail {

// Largest representable value strictly below hi; keeps clamped tuples inside
// the half-open domain.
inline double below(double hi) { return std::nextafter(hi, -1e308); }

inline double clamp_into(double x, const Interval& iv) {
    if (x < iv.lo) return iv.lo;
    double top = below(iv.hi);
    if (x > top) return top;
    return x;
}

} // namespace detail

// Multivariate normal with unit variances and constant pairwise correlation
// rho (covariance (1-rho)I + rho 11'), mapped to mean 0.5 / std 0.15 and
// clamped into [0,1]^dim.
inline Dataset gen_gaussian(std::size_t n_tuples, std::size_t dim, double correlation,
                            std::uint64_t seed) {
    if (dim < 1) throw std::invalid_argument("gen_gaussian: dim must be >= 1");
    if (correlation >= 1.0)
        throw std::invalid_argument("gen_gaussian: correlation must be < 1");

    Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(dim),
                                                    static_cast<Eigen::Index>(dim), correlation);
    cov.diagonal().setOnes();
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw NumericError("gen_gaussian: covariance not positive definite");
    Eigen::MatrixXd chol = llt.matrixL();

    SchemaSpec schema = SchemaSpec::unit(dim);
    const Interval unit{0.0, 1.0};
    RandomStream rng = RandomStream(seed).substream("data");
    std::vector<double> cells;
    cells.reserve(n_tuples * dim);
    Eigen::VectorXd z(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < n_tuples; ++i) {
        for (Eigen::Index d = 0; d < z.size(); ++d) z(d) = rng.gaussian();
        Eigen::VectorXd x = chol * z;
        for (Eigen::Index d = 0; d < x.size(); ++d)
            cells.push_back(detail::clamp_into(0.5 + 0.15 * x(d), unit));
    }
    return Dataset(std::move(schema), std::move(cells));
}

enum class WorkloadKind { random, sliding_shift, no_shift, jump };

struct WorkloadSpec {
    WorkloadKind kind = WorkloadKind::random;
    std::size_t count = 1;
    // Drives the sliding-shift window size: per-dimension width is
    // range * target^(1/d), so a uniform table would answer ~target.
    double selectivity_target = 0.2;
    // When positive, each random predicate constrains only this many
    // randomly chosen dimensions and spans the full domain elsewhere.
    std::size_t constrained_dims = 0;
    std::uint64_t seed = 0;
    std::vector<Box> jump_regions;
};

namespace detail {

inline Box random_box_in(const Box& bounds, std::size_t constrained, RandomStream& rng) {
    const std::size_t d = bounds.dim();
    std::vector<bool> active(d, true);
    if (constrained > 0 && constrained < d) {
        active.assign(d, false);
        std::vector<std::size_t> idx(d);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < constrained; ++i)
            std::swap(idx[i], idx[i + rng.below(d - i)]);
        for (std::size_t i = 0; i < constrained; ++i) active[idx[i]] = true;
    }
    std::vector<Interval> dims(d);
    for (std::size_t k = 0; k < d; ++k) {
        if (!active[k]) {
            dims[k] = bounds[k];
            continue;
        }
        double a = rng.uniform(bounds[k].lo, bounds[k].hi);
        double b = rng.uniform(bounds[k].lo, bounds[k].hi);
        dims[k] = a <= b ? Interval{a, b} : Interval{b, a};
    }
    return Box::from_intervals(std::move(dims));
}

} // namespace detail

inline std::vector<Box> gen_workload(const WorkloadSpec& spec, const Box& domain) {
    if (spec.count < 1) throw std::invalid_argument("gen_workload: count must be >= 1");
    RandomStream rng = RandomStream(spec.seed).substream("workload");
    const std::size_t d = domain.dim();
    std::vector<Box> out;
    out.reserve(spec.count);

    switch (spec.kind) {
        case WorkloadKind::random: {
            for (std::size_t i = 0; i < spec.count; ++i)
                out.push_back(detail::random_box_in(domain, spec.constrained_dims, rng));
            break;
        }
        case WorkloadKind::sliding_shift: {
            double frac = std::pow(spec.selectivity_target, 1.0 / static_cast<double>(d));
            for (std::size_t i = 0; i < spec.count; ++i) {
                double t = spec.count == 1
                               ? 0.0
                               : static_cast<double>(i) / static_cast<double>(spec.count - 1);
                std::vector<Interval> dims(d);
                for (std::size_t k = 0; k < d; ++k) {
                    double width = frac * domain[k].length();
                    double start = domain[k].lo + t * (domain[k].length() - width);
                    dims[k] = Interval{start, std::min(start + width, domain[k].hi)};
                }
                out.push_back(Box::from_intervals(std::move(dims)));
            }
            break;
        }
        case WorkloadKind::no_shift: {
            Box b = detail::random_box_in(domain, spec.constrained_dims, rng);
            out.assign(spec.count, b);
            break;
        }
        case WorkloadKind::jump: {
            if (spec.jump_regions.empty())
                throw std::invalid_argument("gen_workload: jump workload needs jump regions");
            std::vector<Box> regions;
            for (const Box& r : spec.jump_regions) {
                Box clipped = intersect(r, domain);
                if (clipped.empty())
                    throw std::invalid_argument("gen_workload: jump region outside the domain");
                regions.push_back(std::move(clipped));
            }
            for (std::size_t i = 0; i < spec.count; ++i) {
                std::size_t ri = i * regions.size() / spec.count;
                out.push_back(detail::random_box_in(regions[ri], 0, rng));
            }
            break;
        }
    }
    return out;
}

// Exact selectivity by a full scan: s = (1/N) sum_k I(x_k in B).
inline double true_selectivity(const Dataset& data, const Region& predicate) {
    if (data.rows() == 0)
        throw std::invalid_argument("true_selectivity: empty dataset");
    if (predicate.dim() != data.dim())
        throw std::invalid_argument("true_selectivity: dimension mismatch");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.rows(); ++i)
        if (predicate.contains(data.row(i))) ++hits;
    return static_cast<double>(hits) / static_cast<double>(data.rows());
}

inline double true_selectivity(const Dataset& data, const Box& predicate) {
    return true_selectivity(data, Region(predicate));
}

inline std::vector<ObservedQuery> label_workload(const Dataset& data,
                                                 const std::vector<Box>& predicates) {
    const Box domain = data.schema().encoded_domain();
    std::vector<ObservedQuery> out;
    out.reserve(predicates.size());
    for (const Box& b : predicates) {
        Region r(b);
        out.push_back(ObservedQuery::make(r, true_selectivity(data, r), domain));
    }
    return out;
}

inline std::vector<ObservedQuery> label_workload(const Dataset& data,
                                                 const std::vector<Region>& predicates) {
    const Box domain = data.schema().encoded_domain();
    std::vector<ObservedQuery> out;
    out.reserve(predicates.size());
    for (const Region& r : predicates)
        out.push_back(ObservedQuery::make(r, true_selectivity(data, r), domain));
    return out;
}

// --- CSV and workload files -------------------------------------------------

struct CsvLoadResult {
    Dataset data;
    std::size_t rejected = 0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

} // namespace detail

// Header-matched ingestion. Rows whose cells fail to encode (unknown
// categorical value, malformed or out-of-range number, wrong cell count) are
// rejected and counted, not fatal.
inline CsvLoadResult load_csv(const std::string& path, const SchemaSpec& schema) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("dataset file is empty: " + path);
    std::vector<std::string> header = detail::split_csv_line(line);
    if (header.size() != schema.dim())
        throw std::runtime_error("dataset header has " + std::to_string(header.size()) +
                                 " columns, schema has " + std::to_string(schema.dim()));
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] != schema.columns[i].name)
            throw std::runtime_error("dataset column '" + header[i] + "' does not match schema '" +
                                     schema.columns[i].name + "'");

    std::vector<double> cells;
    std::size_t rejected = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> raw = detail::split_csv_line(line);
        if (raw.size() != schema.dim()) {
            ++rejected;
            continue;
        }
        std::vector<double> encoded(schema.dim());
        bool ok = true;
        for (std::size_t c = 0; c < schema.dim(); ++c) {
            try {
                encoded[c] = encode_cell(schema.columns[c], raw[c]);
                if (schema.columns[c].kind == ColumnKind::real)
                    encoded[c] = detail::clamp_into(encoded[c], schema.columns[c].real_domain);
            } catch (const std::exception&) {
                ok = false;
                break;
            }
        }
        if (!ok) {
            ++rejected;
            continue;
        }
        cells.insert(cells.end(), encoded.begin(), encoded.end());
    }
    return CsvLoadResult{Dataset(schema, std::move(cells)), rejected};
}

inline void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    const SchemaSpec& schema = data.schema();
    for (std::size_t c = 0; c < schema.dim(); ++c) {
        if (c) out << ',';
        out << schema.columns[c].name;
    }
    out << '\n';
    for (std::size_t i = 0; i < data.rows(); ++i) {
        std::span<const double> row = data.row(i);
        for (std::size_t c = 0; c < schema.dim(); ++c) {
            if (c) out << ',';
            out << decode_cell(schema.columns[c], row[c]);
        }
        out << '\n';
    }
}

// Workload file: one predicate per line in the region textual form, with an
// optional trailing ",selectivity" once labeled.
struct WorkloadEntry {
    Region predicate;
    std::optional<double> selectivity;
};

inline std::vector<WorkloadEntry> load_workload(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open workload file: " + path);
    std::vector<WorkloadEntry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        std::size_t close = line.rfind(']');
        if (close == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": no predicate");
        WorkloadEntry entry;
        try {
            entry.predicate = parse_region(std::string_view(line).substr(0, close + 1));
            std::size_t comma = line.find(',', close + 1);
            if (comma != std::string::npos)
                entry.selectivity =
                    parse_double(detail::strip(std::string_view(line).substr(comma + 1)));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (entry.selectivity && (*entry.selectivity < 0.0 || *entry.selectivity > 1.0))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": selectivity outside [0,1]");
        out.push_back(std::move(entry));
    }
    if (out.empty()) throw std::runtime_error("workload file has no predicates: " + path);
    return out;
}

inline void save_workload(const std::vector<WorkloadEntry>& entries, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write workload file: " + path);
    for (const WorkloadEntry& e : entries) {
        out << format_region(e.predicate);
        if (e.selectivity) out << ',' << fmt_double(*e.selectivity);
        out << '\n';
    }
}

} // namespace selest
