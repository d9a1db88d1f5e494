// selest: query-driven selectivity estimation over uniform mixture models.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "selest/bench.hpp"
#include "selest/encode.hpp"
#include "selest/error.hpp"
#include "selest/model.hpp"
#include "selest/subpop.hpp"
#include "selest/synth.hpp"
#include "selest/trainer.hpp"

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SELEST_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::runtime_error("SELEST_SEED is not an integer");
        }
    }
    return 1;
}

// Domain resolution for commands that read raw workloads: an explicit box,
// a schema file, or the unit cube matching the first predicate's dimension.
selest::Box resolve_domain(const std::string& domain_text, const std::string& schema_path,
                           const std::vector<selest::WorkloadEntry>& entries) {
    if (!domain_text.empty()) return selest::parse_box(domain_text);
    if (!schema_path.empty()) return selest::load_schema(schema_path).encoded_domain();
    return selest::SchemaSpec::unit(entries.front().predicate.dim()).encoded_domain();
}

std::vector<selest::ObservedQuery> labeled_queries(const std::vector<selest::WorkloadEntry>& entries,
                                                   const selest::Box& domain) {
    std::vector<selest::ObservedQuery> out;
    out.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!entries[i].selectivity)
            throw std::runtime_error("workload line " + std::to_string(i + 1) +
                                     " has no selectivity; run `selest label` first");
        out.push_back(
            selest::ObservedQuery::make(entries[i].predicate, *entries[i].selectivity, domain));
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"selest: learn table selectivities from observed (predicate, selectivity) pairs"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    try {
        seed = default_seed();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }

    // --- gen-data ---
    auto* gen_data = app.add_subcommand("gen-data", "generate a correlated Gaussian dataset CSV");
    std::size_t gd_dim = 2, gd_rows = 10000;
    double gd_corr = 0.0;
    std::uint64_t gd_seed = seed;
    std::string gd_out, gd_schema_out;
    gen_data->add_option("--dim", gd_dim, "number of columns")->capture_default_str();
    gen_data->add_option("--rows", gd_rows, "number of tuples")->capture_default_str();
    gen_data->add_option("--correlation", gd_corr, "pairwise correlation in [0,1)")
        ->capture_default_str();
    gen_data->add_option("--seed", gd_seed, "random seed")->capture_default_str();
    gen_data->add_option("--out", gd_out, "output CSV path")->required();
    gen_data->add_option("--schema-out", gd_schema_out,
                         "also write the matching schema JSON (default <out>.schema.json)");

    // --- gen-workload ---
    auto* gen_wl = app.add_subcommand("gen-workload", "generate predicate boxes");
    std::string gw_kind = "random", gw_out, gw_regions, gw_domain;
    std::size_t gw_count = 100, gw_dim = 2, gw_constrained = 0;
    double gw_target = 0.2;
    std::uint64_t gw_seed = seed;
    gen_wl->add_option("--kind", gw_kind, "random|sliding_shift|no_shift|jump")
        ->capture_default_str();
    gen_wl->add_option("--count", gw_count, "number of predicates")->capture_default_str();
    gen_wl->add_option("--dim", gw_dim, "dimension (unit-cube domain)")->capture_default_str();
    gen_wl->add_option("--domain", gw_domain, "explicit domain box (overrides --dim)");
    gen_wl->add_option("--seed", gw_seed, "random seed")->capture_default_str();
    gen_wl->add_option("--target", gw_target, "sliding window selectivity target")
        ->capture_default_str();
    gen_wl->add_option("--constrained-dims", gw_constrained,
                       "constrain only this many random dimensions per predicate (0 = all)")
        ->capture_default_str();
    gen_wl->add_option("--regions", gw_regions, "U-joined region boxes for the jump workload");
    gen_wl->add_option("--out", gw_out, "output workload path")->required();

    // --- label ---
    auto* label = app.add_subcommand("label", "attach true selectivities to a workload");
    std::string lb_data, lb_workload, lb_out, lb_schema;
    label->add_option("--data", lb_data, "dataset CSV")->required();
    label->add_option("--workload", lb_workload, "workload file")->required();
    label->add_option("--schema", lb_schema, "schema JSON (default: all-real unit columns)");
    label->add_option("--out", lb_out, "output labeled workload")->required();

    // --- train ---
    auto* train_cmd = app.add_subcommand("train", "train an estimator from a labeled workload");
    std::string tr_workload, tr_out, tr_method = "mixture", tr_subpop = "sampling",
                tr_solver = "analytic", tr_schema, tr_domain;
    double tr_lambda = 1e6, tr_ridge = 1e-8, tr_pg_tol = 1e-8;
    int tr_points = 10, tr_neighbors = 10, tr_pg_iters = 10000;
    std::size_t tr_m = 0, tr_bucket_cap = 50000;
    std::uint64_t tr_seed = seed;
    bool tr_no_domain_row = false;
    train_cmd->add_option("--workload", tr_workload, "labeled workload file")->required();
    train_cmd->add_option("--method", tr_method, "mixture|maxent-hist")->capture_default_str();
    train_cmd->add_option("--subpop", tr_subpop, "sampling|clustering")->capture_default_str();
    train_cmd->add_option("--solver", tr_solver, "analytic|pg")->capture_default_str();
    train_cmd->add_option("--lambda", tr_lambda, "consistency penalty")->capture_default_str();
    train_cmd->add_option("--ridge", tr_ridge, "diagonal regularization scale")
        ->capture_default_str();
    train_cmd->add_option("--m", tr_m, "subpopulation count (0 = min(4n,4000))")
        ->capture_default_str();
    train_cmd->add_option("--points-per-predicate", tr_points, "scatter points per predicate")
        ->capture_default_str();
    train_cmd->add_option("--neighbor-count", tr_neighbors, "nearest centers for box sizing")
        ->capture_default_str();
    train_cmd->add_option("--pg-max-iters", tr_pg_iters, "projected-gradient iteration cap")
        ->capture_default_str();
    train_cmd->add_option("--pg-tol", tr_pg_tol, "projected-gradient relative tolerance")
        ->capture_default_str();
    train_cmd->add_flag("--no-domain-assertion", tr_no_domain_row,
                        "drop the implicit (B0, 1) training row");
    train_cmd->add_option("--bucket-cap", tr_bucket_cap, "bucket cap for maxent-hist")
        ->capture_default_str();
    train_cmd->add_option("--schema", tr_schema, "schema JSON for the domain");
    train_cmd->add_option("--domain", tr_domain, "explicit domain box");
    train_cmd->add_option("--seed", tr_seed, "random seed")->capture_default_str();
    train_cmd->add_option("--out", tr_out, "output model file")->required();

    // --- estimate ---
    auto* est_cmd = app.add_subcommand("estimate", "estimate selectivity of a predicate");
    std::string es_model, es_predicate;
    est_cmd->add_option("--model", es_model, "model file")->required();
    est_cmd->add_option("--predicate", es_predicate, "region text, e.g. [0,0.5]x[0,1]")
        ->required();

    // --- bench ---
    auto* bench_cmd = app.add_subcommand("bench", "run an experiment config");
    std::string bn_config;
    bench_cmd->add_option("--config", bn_config, "bench config JSON")->required();

    // --- dump-system ---
    auto* dump_cmd = app.add_subcommand("dump-system", "write the Q/A/s training system as text");
    std::string dp_workload, dp_out, dp_schema, dp_domain, dp_subpop = "sampling";
    std::size_t dp_m = 0;
    double dp_lambda = 1e6;
    std::uint64_t dp_seed = seed;
    dump_cmd->add_option("--workload", dp_workload, "labeled workload file")->required();
    dump_cmd->add_option("--seed", dp_seed, "random seed")->capture_default_str();
    dump_cmd->add_option("--subpop", dp_subpop, "sampling|clustering")->capture_default_str();
    dump_cmd->add_option("--m", dp_m, "subpopulation count (0 = min(4n,4000))")
        ->capture_default_str();
    dump_cmd->add_option("--lambda", dp_lambda, "consistency penalty")->capture_default_str();
    dump_cmd->add_option("--schema", dp_schema, "schema JSON for the domain");
    dump_cmd->add_option("--domain", dp_domain, "explicit domain box");
    dump_cmd->add_option("--out", dp_out, "output path prefix (.Q.txt/.A.txt/.s.txt)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen_data->parsed()) {
            selest::Dataset data = selest::gen_gaussian(gd_rows, gd_dim, gd_corr, gd_seed);
            selest::save_csv(data, gd_out);
            if (gd_schema_out.empty()) gd_schema_out = gd_out + ".schema.json";
            selest::save_schema(data.schema(), gd_schema_out);
            std::cout << "wrote " << data.rows() << " rows to " << gd_out << '\n';
        } else if (gen_wl->parsed()) {
            selest::WorkloadSpec spec;
            if (gw_kind == "random") spec.kind = selest::WorkloadKind::random;
            else if (gw_kind == "sliding_shift") spec.kind = selest::WorkloadKind::sliding_shift;
            else if (gw_kind == "no_shift") spec.kind = selest::WorkloadKind::no_shift;
            else if (gw_kind == "jump") spec.kind = selest::WorkloadKind::jump;
            else throw std::runtime_error("unknown workload kind '" + gw_kind + "'");
            spec.count = gw_count;
            spec.seed = gw_seed;
            spec.selectivity_target = gw_target;
            spec.constrained_dims = gw_constrained;
            if (!gw_regions.empty())
                for (const selest::Box& b : selest::parse_region(gw_regions).terms)
                    spec.jump_regions.push_back(b);
            selest::Box domain = gw_domain.empty()
                                     ? selest::SchemaSpec::unit(gw_dim).encoded_domain()
                                     : selest::parse_box(gw_domain);
            std::vector<selest::WorkloadEntry> entries;
            for (selest::Box& b : selest::gen_workload(spec, domain))
                entries.push_back({selest::Region(std::move(b)), std::nullopt});
            selest::save_workload(entries, gw_out);
            std::cout << "wrote " << entries.size() << " predicates to " << gw_out << '\n';
        } else if (label->parsed()) {
            selest::SchemaSpec schema;
            std::vector<selest::WorkloadEntry> entries = selest::load_workload(lb_workload);
            if (!lb_schema.empty()) {
                schema = selest::load_schema(lb_schema);
            } else {
                schema = selest::SchemaSpec::unit(entries.front().predicate.dim());
            }
            selest::CsvLoadResult loaded = selest::load_csv(lb_data, schema);
            if (loaded.rejected > 0)
                std::cerr << "rejected " << loaded.rejected << " malformed rows\n";
            for (selest::WorkloadEntry& e : entries)
                e.selectivity = selest::true_selectivity(loaded.data, e.predicate);
            selest::save_workload(entries, lb_out);
            std::cout << "labeled " << entries.size() << " predicates into " << lb_out << '\n';
        } else if (train_cmd->parsed()) {
            std::vector<selest::WorkloadEntry> entries = selest::load_workload(tr_workload);
            selest::Box domain = resolve_domain(tr_domain, tr_schema, entries);
            std::vector<selest::ObservedQuery> queries = labeled_queries(entries, domain);

            if (tr_method == "mixture") {
                selest::TrainConfig tcfg;
                tcfg.lambda = tr_lambda;
                tcfg.ridge = tr_ridge;
                tcfg.pg_max_iters = tr_pg_iters;
                tcfg.pg_tol = tr_pg_tol;
                tcfg.include_domain_assertion = !tr_no_domain_row;
                if (tr_solver == "analytic") tcfg.solver = selest::SolverKind::analytic;
                else if (tr_solver == "pg") tcfg.solver = selest::SolverKind::projected_gradient;
                else throw std::runtime_error("unknown solver '" + tr_solver + "'");

                selest::SubpopConfig scfg;
                scfg.points_per_predicate = tr_points;
                scfg.neighbor_count = tr_neighbors;
                scfg.seed = tr_seed;
                if (tr_m > 0) scfg.m_override = tr_m;
                if (tr_subpop == "sampling") scfg.method = selest::SubpopMethod::sampling;
                else if (tr_subpop == "clustering") scfg.method = selest::SubpopMethod::clustering;
                else throw std::runtime_error("unknown subpop method '" + tr_subpop + "'");

                selest::TrainOutcome outcome = selest::train(queries, domain, tcfg, scfg);
                outcome.model.save(tr_out);
                std::cout << "m=" << outcome.model.size()
                          << " sum_w=" << selest::fmt_double(outcome.model.weight_sum())
                          << " residual_inf=" << selest::fmt_double(outcome.solve.residual_inf)
                          << '\n';
            } else if (tr_method == "maxent-hist") {
                selest::BucketHistogram hist =
                    selest::train_maxent_histogram(queries, domain, tr_bucket_cap);
                selest::MixtureModel model = hist.as_mixture();
                model.save(tr_out);
                double residual = 0.0;
                for (const selest::ObservedQuery& q : queries)
                    residual = std::max(residual,
                                        std::abs(selest::estimate_bucket(hist, q.predicate) -
                                                 q.selectivity));
                std::cout << "m=" << model.size()
                          << " sum_w=" << selest::fmt_double(model.weight_sum())
                          << " residual_inf=" << selest::fmt_double(residual) << '\n';
            } else {
                throw std::runtime_error("unknown method '" + tr_method + "'");
            }
        } else if (est_cmd->parsed()) {
            selest::MixtureModel model = selest::MixtureModel::load(es_model);
            selest::Region predicate = selest::parse_region(es_predicate);
            double est = model.estimate(selest::clip_region(predicate, model.domain()));
            std::cout << selest::fmt_double(est) << " (" << selest::fmt_double(100.0 * est)
                      << "%)\n";
        } else if (bench_cmd->parsed()) {
            selest::BenchConfig cfg = selest::load_bench_config(bn_config);
            std::vector<selest::ExperimentResult> results = selest::run_bench(cfg);
            selest::write_results_csv(results, cfg.out);
            std::cout << "wrote " << results.size() << " result rows to " << cfg.out << '\n';
        } else if (dump_cmd->parsed()) {
            std::vector<selest::WorkloadEntry> entries = selest::load_workload(dp_workload);
            selest::Box domain = resolve_domain(dp_domain, dp_schema, entries);
            std::vector<selest::ObservedQuery> queries = labeled_queries(entries, domain);
            selest::SubpopConfig scfg;
            scfg.seed = dp_seed;
            if (dp_m > 0) scfg.m_override = dp_m;
            if (dp_subpop == "sampling") scfg.method = selest::SubpopMethod::sampling;
            else if (dp_subpop == "clustering") scfg.method = selest::SubpopMethod::clustering;
            else throw std::runtime_error("unknown subpop method '" + dp_subpop + "'");
            std::vector<selest::Box> supports =
                selest::generate_subpopulations(queries, domain, scfg);
            selest::TrainConfig tcfg;
            tcfg.lambda = dp_lambda;
            selest::TrainingSystem sys = selest::assemble(queries, supports, domain, tcfg);
            selest::write_system(sys, dp_out);
            std::cout << "wrote " << sys.Q.rows() << "x" << sys.Q.cols() << " Q, "
                      << sys.A.rows() << "x" << sys.A.cols() << " A to " << dp_out
                      << ".{Q,A,s}.txt\n";
        }
    } catch (const selest::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
