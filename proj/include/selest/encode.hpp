#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "selest/geometry.hpp"

namespace selest {

enum class ColumnKind { real, integer, categorical };

// One column of the table schema. Integer columns hold {1..b} and are mapped
// onto the real interval [1, b+1]; an equality C=k becomes the range
// [k, k+1). Categorical values get 1-based integer codes in declaration
// order, frozen at ingestion, then follow the integer rule.
struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::real;
    Interval real_domain{0.0, 1.0};       // kind == real
    long upper = 1;                       // kind == integer: values in {1..upper}
    std::vector<std::string> categories;  // kind == categorical

    Interval encoded_interval() const {
        switch (kind) {
            case ColumnKind::real: return real_domain;
            case ColumnKind::integer: return Interval{1.0, static_cast<double>(upper) + 1.0};
            case ColumnKind::categorical:
                return Interval{1.0, static_cast<double>(categories.size()) + 1.0};
        }
        throw std::logic_error("unreachable");
    }

    long code_of(const std::string& value) const {
        for (std::size_t i = 0; i < categories.size(); ++i)
            if (categories[i] == value) return static_cast<long>(i) + 1;
        throw std::runtime_error("column '" + name + "': unknown categorical value '" + value + "'");
    }
};

inline Interval encode_equality(const ColumnSpec& col, long k) {
    if (col.kind == ColumnKind::real)
        throw std::runtime_error("column '" + col.name + "': equality encoding needs a discrete column");
    long upper = col.kind == ColumnKind::integer ? col.upper
                                                 : static_cast<long>(col.categories.size());
    if (k < 1 || k > upper)
        throw std::runtime_error("column '" + col.name + "': value " + std::to_string(k) +
                                 " outside {1.." + std::to_string(upper) + "}");
    return Interval{static_cast<double>(k), static_cast<double>(k) + 1.0};
}

inline Interval encode_equality(const ColumnSpec& col, const std::string& value) {
    if (col.kind != ColumnKind::categorical)
        throw std::runtime_error("column '" + col.name + "': string equality needs a categorical column");
    return encode_equality(col, col.code_of(value));
}

struct SchemaSpec {
    std::vector<ColumnSpec> columns;

    std::size_t dim() const { return columns.size(); }

    Box encoded_domain() const {
        std::vector<Interval> dims;
        dims.reserve(columns.size());
        for (const ColumnSpec& c : columns) dims.push_back(c.encoded_interval());
        return Box::from_intervals(std::move(dims));
    }

    // All real columns spanning [0,1]; the synthetic-data convention.
    static SchemaSpec unit(std::size_t dim) {
        SchemaSpec s;
        for (std::size_t i = 0; i < dim; ++i) {
            ColumnSpec c;
            c.name = "c" + std::to_string(i + 1);
            c.kind = ColumnKind::real;
            c.real_domain = Interval{0.0, 1.0};
            s.columns.push_back(std::move(c));
        }
        return s;
    }
};

// Tuple cells are encoded at ingestion (integer k -> k + 0.5) so ground-truth
// scans and model estimates share one coordinate system.
inline double encode_cell(const ColumnSpec& col, const std::string& cell) {
    switch (col.kind) {
        case ColumnKind::real:
            return parse_double(cell);
        case ColumnKind::integer: {
            long k = 0;
            try {
                std::size_t used = 0;
                k = std::stol(cell, &used);
                if (used != cell.size()) throw std::runtime_error("trailing text");
            } catch (const std::exception&) {
                throw std::runtime_error("column '" + col.name + "': bad integer '" + cell + "'");
            }
            if (k < 1 || k > col.upper)
                throw std::runtime_error("column '" + col.name + "': integer " + cell + " out of range");
            return static_cast<double>(k) + 0.5;
        }
        case ColumnKind::categorical:
            return static_cast<double>(col.code_of(cell)) + 0.5;
    }
    throw std::logic_error("unreachable");
}

inline std::string decode_cell(const ColumnSpec& col, double encoded) {
    switch (col.kind) {
        case ColumnKind::real:
            return fmt_double(encoded);
        case ColumnKind::integer:
            return std::to_string(static_cast<long>(std::floor(encoded)));
        case ColumnKind::categorical: {
            long k = static_cast<long>(std::floor(encoded));
            if (k < 1 || k > static_cast<long>(col.categories.size()))
                throw std::runtime_error("column '" + col.name + "': encoded value out of range");
            return col.categories[static_cast<std::size_t>(k - 1)];
        }
    }
    throw std::logic_error("unreachable");
}

// Schema file:
//   {"columns":[{"name":..., "kind":..., "domain":...}]}
// domain is [lo,hi] for real, [1,b] for integer, ["v1","v2",...] for categorical.
inline SchemaSpec schema_from_json(const nlohmann::json& j) {
    SchemaSpec schema;
    if (!j.contains("columns") || !j["columns"].is_array())
        throw std::runtime_error("schema: missing 'columns' array");
    for (const auto& jc : j["columns"]) {
        ColumnSpec c;
        c.name = jc.at("name").get<std::string>();
        std::string kind = jc.at("kind").get<std::string>();
        const auto& dom = jc.at("domain");
        if (kind == "real") {
            c.kind = ColumnKind::real;
            c.real_domain = Interval{dom.at(0).get<double>(), dom.at(1).get<double>()};
            if (!(c.real_domain.lo < c.real_domain.hi))
                throw std::runtime_error("schema: column '" + c.name + "' has an empty real domain");
        } else if (kind == "integer") {
            c.kind = ColumnKind::integer;
            if (dom.at(0).get<long>() != 1)
                throw std::runtime_error("schema: integer domains start at 1");
            c.upper = dom.at(1).get<long>();
            if (c.upper < 1)
                throw std::runtime_error("schema: column '" + c.name + "' needs at least one integer value");
        } else if (kind == "categorical") {
            c.kind = ColumnKind::categorical;
            for (const auto& v : dom) c.categories.push_back(v.get<std::string>());
            if (c.categories.empty())
                throw std::runtime_error("schema: column '" + c.name + "' has no categories");
            for (std::size_t i = 0; i < c.categories.size(); ++i)
                for (std::size_t k = i + 1; k < c.categories.size(); ++k)
                    if (c.categories[i] == c.categories[k])
                        throw std::runtime_error("schema: column '" + c.name +
                                                 "' repeats category '" + c.categories[i] + "'");
        } else {
            throw std::runtime_error("schema: unknown kind '" + kind + "'");
        }
        schema.columns.push_back(std::move(c));
    }
    if (schema.columns.empty())
        throw std::runtime_error("schema: no columns");
    return schema;
}

inline nlohmann::json schema_to_json(const SchemaSpec& schema) {
    nlohmann::json cols = nlohmann::json::array();
    for (const ColumnSpec& c : schema.columns) {
        nlohmann::json jc;
        jc["name"] = c.name;
        switch (c.kind) {
            case ColumnKind::real:
                jc["kind"] = "real";
                jc["domain"] = {c.real_domain.lo, c.real_domain.hi};
                break;
            case ColumnKind::integer:
                jc["kind"] = "integer";
                jc["domain"] = {1, c.upper};
                break;
            case ColumnKind::categorical:
                jc["kind"] = "categorical";
                jc["domain"] = c.categories;
                break;
        }
        cols.push_back(std::move(jc));
    }
    return nlohmann::json{{"columns", std::move(cols)}};
}

inline SchemaSpec load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open schema file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("schema parse error in " + path + ": " + e.what());
    }
    return schema_from_json(j);
}

inline void save_schema(const SchemaSpec& schema, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write schema file: " + path);
    out << schema_to_json(schema).dump(2) << '\n';
}

} // namespace selest
