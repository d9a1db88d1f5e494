#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "selest/baselines.hpp"
#include "selest/model.hpp"
#include "selest/subpop.hpp"
#include "selest/synth.hpp"
#include "selest/trainer.hpp"

namespace selest {

struct ExperimentResult {
    std::string method;
    std::size_t n_observed = 0;
    std::size_t params = 0; // m, bucket count, or sample size
    double rms_error_pct = 0.0;
    double train_ms = 0.0;
    double estimate_us_mean = 0.0;
    std::uint64_t seed = 0;
};

// RMS of (100·true - 100·est): percentage-point units.
inline double rms_error(const std::vector<double>& truth, const std::vector<double>& est) {
    if (truth.size() != est.size())
        throw std::invalid_argument("rms_error: length mismatch");
    if (truth.empty())
        throw std::invalid_argument("rms_error: need at least one pair");
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        double diff = 100.0 * (truth[i] - est[i]);
        sum += diff * diff;
    }
    return std::sqrt(sum / static_cast<double>(truth.size()));
}

inline void write_results_csv(const std::vector<ExperimentResult>& results,
                              const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write results file: " + path);
    out << "method,n_observed,params,rms_error_pct,train_ms,estimate_us_mean,seed\n";
    for (const ExperimentResult& r : results)
        out << r.method << ',' << r.n_observed << ',' << r.params << ','
            << fmt_double(r.rms_error_pct) << ',' << fmt_double(r.train_ms) << ','
            << fmt_double(r.estimate_us_mean) << ',' << r.seed << '\n';
}

enum class ExperimentKind { learning_curve, workload_shift, solver_comparison };

struct BenchConfig {
    ExperimentKind experiment = ExperimentKind::learning_curve;
    std::vector<std::uint64_t> seeds{1};
    std::string out = "results.csv";
    bool timing = true;

    std::size_t rows = 10000;
    std::size_t dim = 2;
    double correlation = 0.5;

    WorkloadSpec workload;

    std::vector<std::string> methods{"mixture"};
    std::vector<std::size_t> schedule{10, 100};
    std::size_t test_count = 100;

    std::optional<std::size_t> m_override;
    std::size_t bins_per_dim = 10;
    std::size_t sample_size = 100;
    std::size_t bucket_cap = 50000;

    TrainConfig trainer;
    SubpopConfig subpop;

    std::size_t shift_window = 10;
    std::size_t retrain_every = 100;

    std::vector<std::pair<std::size_t, std::size_t>> solver_sizes{{100, 400}, {500, 2000}};
};

inline BenchConfig bench_config_from_json(const nlohmann::json& j) {
    BenchConfig cfg;
    std::string kind = j.value("experiment", "learning_curve");
    if (kind == "learning_curve") cfg.experiment = ExperimentKind::learning_curve;
    else if (kind == "workload_shift") cfg.experiment = ExperimentKind::workload_shift;
    else if (kind == "solver_comparison") cfg.experiment = ExperimentKind::solver_comparison;
    else throw std::runtime_error("bench config: unknown experiment '" + kind + "'");

    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    else if (j.contains("seed")) cfg.seeds = {j["seed"].get<std::uint64_t>()};
    if (cfg.seeds.empty()) throw std::runtime_error("bench config: need at least one seed");
    cfg.out = j.value("out", cfg.out);
    cfg.timing = j.value("timing", cfg.timing);

    if (j.contains("dataset")) {
        const auto& jd = j["dataset"];
        cfg.rows = jd.value("rows", cfg.rows);
        cfg.dim = jd.value("dim", cfg.dim);
        cfg.correlation = jd.value("correlation", cfg.correlation);
    }
    if (j.contains("workload")) {
        const auto& jw = j["workload"];
        std::string wkind = jw.value("kind", "random");
        if (wkind == "random") cfg.workload.kind = WorkloadKind::random;
        else if (wkind == "sliding_shift") cfg.workload.kind = WorkloadKind::sliding_shift;
        else if (wkind == "no_shift") cfg.workload.kind = WorkloadKind::no_shift;
        else if (wkind == "jump") cfg.workload.kind = WorkloadKind::jump;
        else throw std::runtime_error("bench config: unknown workload kind '" + wkind + "'");
        cfg.workload.count = jw.value("count", cfg.workload.count);
        cfg.workload.selectivity_target = jw.value("target", cfg.workload.selectivity_target);
        cfg.workload.constrained_dims = jw.value("constrained_dims", cfg.workload.constrained_dims);
        if (jw.contains("regions"))
            for (const auto& r : jw["regions"])
                cfg.workload.jump_regions.push_back(parse_box(r.get<std::string>()));
    }
    if (j.contains("methods")) cfg.methods = j["methods"].get<std::vector<std::string>>();
    if (j.contains("schedule")) cfg.schedule = j["schedule"].get<std::vector<std::size_t>>();
    cfg.test_count = j.value("test_count", cfg.test_count);

    if (j.contains("budget")) {
        const auto& jb = j["budget"];
        if (jb.contains("m_override") && jb["m_override"].get<std::size_t>() > 0)
            cfg.m_override = jb["m_override"].get<std::size_t>();
        cfg.bins_per_dim = jb.value("bins_per_dim", cfg.bins_per_dim);
        cfg.sample_size = jb.value("sample_size", cfg.sample_size);
        cfg.bucket_cap = jb.value("bucket_cap", cfg.bucket_cap);
    }
    if (j.contains("trainer")) {
        const auto& jt = j["trainer"];
        cfg.trainer.lambda = jt.value("lambda", cfg.trainer.lambda);
        cfg.trainer.ridge = jt.value("ridge", cfg.trainer.ridge);
        std::string solver = jt.value("solver", "analytic");
        if (solver == "analytic") cfg.trainer.solver = SolverKind::analytic;
        else if (solver == "pg") cfg.trainer.solver = SolverKind::projected_gradient;
        else throw std::runtime_error("bench config: unknown solver '" + solver + "'");
        cfg.trainer.pg_max_iters = jt.value("pg_max_iters", cfg.trainer.pg_max_iters);
        cfg.trainer.pg_tol = jt.value("pg_tol", cfg.trainer.pg_tol);
    }
    if (j.contains("subpop")) {
        const auto& js = j["subpop"];
        cfg.subpop.points_per_predicate =
            js.value("points_per_predicate", cfg.subpop.points_per_predicate);
        cfg.subpop.neighbor_count = js.value("neighbor_count", cfg.subpop.neighbor_count);
    }
    if (j.contains("shift")) {
        cfg.shift_window = j["shift"].value("window", cfg.shift_window);
        cfg.retrain_every = j["shift"].value("retrain_every", cfg.retrain_every);
    }
    if (j.contains("solver_sizes")) {
        cfg.solver_sizes.clear();
        for (const auto& pair : j["solver_sizes"])
            cfg.solver_sizes.emplace_back(pair.at(0).get<std::size_t>(),
                                          pair.at(1).get<std::size_t>());
    }
    return cfg;
}

inline BenchConfig load_bench_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open bench config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bench config parse error in " + path + ": " + e.what());
    }
    return bench_config_from_json(j);
}

namespace detail {

struct BuiltEstimator {
    std::function<double(const Region&)> estimate;
    std::size_t params = 0;
    double train_ms = 0.0;
};

// Evaluates an estimator over the test set; returns (rms_pct, mean_us).
inline std::pair<double, double> evaluate(const BuiltEstimator& est,
                                          const std::vector<ObservedQuery>& test, bool timing) {
    std::vector<double> truth, predicted;
    truth.reserve(test.size());
    predicted.reserve(test.size());
    double total_us = 0.0;
    for (const ObservedQuery& q : test) {
        auto t0 = std::chrono::steady_clock::now();
        double v = est.estimate(q.predicate);
        if (timing)
            total_us += std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() -
                                                                  t0)
                            .count();
        truth.push_back(q.selectivity);
        predicted.push_back(v);
    }
    return {rms_error(truth, predicted),
            timing ? total_us / static_cast<double>(test.size()) : 0.0};
}

inline BuiltEstimator build_method(const std::string& method, const BenchConfig& cfg,
                                   const Dataset& data, const Box& domain,
                                   const std::vector<ObservedQuery>& observed,
                                   std::uint64_t seed) {
    BuiltEstimator out;
    if (method == "mixture" || method == "mixture-clustering") {
        SubpopConfig scfg = cfg.subpop;
        scfg.method = method == "mixture" ? SubpopMethod::sampling : SubpopMethod::clustering;
        scfg.seed = RandomStream(seed).substream("subpop").seed();
        scfg.m_override = cfg.m_override;
        TrainOutcome trained = train(observed, domain, cfg.trainer, scfg);
        out.params = trained.model.size();
        out.train_ms = cfg.timing ? trained.total_ms() : 0.0;
        auto model = std::make_shared<MixtureModel>(std::move(trained.model));
        out.estimate = [model](const Region& r) { return model->estimate(r); };
    } else if (method == "maxent-hist") {
        auto t0 = std::chrono::steady_clock::now();
        auto hist = std::make_shared<BucketHistogram>(
            train_maxent_histogram(observed, domain, cfg.bucket_cap));
        out.train_ms = cfg.timing ? elapsed_ms(t0) : 0.0;
        out.params = hist->size();
        out.estimate = [hist](const Region& r) { return estimate_bucket(*hist, r); };
    } else if (method == "equiwidth") {
        auto t0 = std::chrono::steady_clock::now();
        auto hist = std::make_shared<EquiwidthHistogram>(
            build_equiwidth(data, cfg.bins_per_dim, domain));
        out.train_ms = cfg.timing ? elapsed_ms(t0) : 0.0;
        out.params = hist->cells();
        out.estimate = [hist](const Region& r) { return estimate_equiwidth(*hist, r); };
    } else if (method == "sample") {
        auto t0 = std::chrono::steady_clock::now();
        auto est = std::make_shared<SampleEstimator>(build_sample(data, cfg.sample_size, seed));
        out.train_ms = cfg.timing ? elapsed_ms(t0) : 0.0;
        out.params = est->size();
        out.estimate = [est](const Region& r) { return estimate_sample(*est, r); };
    } else {
        throw std::runtime_error("bench: unknown method '" + method + "'");
    }
    return out;
}

} // namespace detail

// Accuracy and training time as the number of observed queries grows. The
// test predicates are the tail of the generated workload, never used for
// training.
inline std::vector<ExperimentResult> run_learning_curve(const BenchConfig& cfg) {
    if (cfg.schedule.empty())
        throw std::runtime_error("learning curve: empty schedule");
    std::size_t max_n = *std::max_element(cfg.schedule.begin(), cfg.schedule.end());

    std::vector<ExperimentResult> results;
    for (std::uint64_t seed : cfg.seeds) {
        Dataset data = gen_gaussian(cfg.rows, cfg.dim, cfg.correlation, seed);
        Box domain = data.schema().encoded_domain();
        WorkloadSpec wspec = cfg.workload;
        wspec.count = max_n + cfg.test_count;
        wspec.seed = seed;
        std::vector<Box> predicates = gen_workload(wspec, domain);
        std::vector<ObservedQuery> labeled = label_workload(data, predicates);
        std::vector<ObservedQuery> test(labeled.end() - static_cast<std::ptrdiff_t>(cfg.test_count),
                                        labeled.end());

        for (std::size_t n : cfg.schedule) {
            if (n > max_n || n == 0)
                throw std::runtime_error("learning curve: bad schedule entry");
            std::vector<ObservedQuery> observed(labeled.begin(),
                                                labeled.begin() + static_cast<std::ptrdiff_t>(n));
            for (const std::string& method : cfg.methods) {
                detail::BuiltEstimator est =
                    detail::build_method(method, cfg, data, domain, observed, seed);
                auto [rms, us] = detail::evaluate(est, test, cfg.timing);
                results.push_back(
                    {method, n, est.params, rms, est.train_ms, us, seed});
            }
        }
    }
    return results;
}

// Prequential evaluation under a shifting workload: each incoming query is
// estimated before being observed, errors aggregate over fixed windows, and
// the model retrains on the full history every retrain_every queries.
inline std::vector<ExperimentResult> run_workload_shift(const BenchConfig& cfg) {
    std::string method = cfg.methods.empty() ? "mixture" : cfg.methods.front();
    std::vector<ExperimentResult> results;
    for (std::uint64_t seed : cfg.seeds) {
        Dataset data = gen_gaussian(cfg.rows, cfg.dim, cfg.correlation, seed);
        Box domain = data.schema().encoded_domain();
        WorkloadSpec wspec = cfg.workload;
        wspec.seed = seed;
        std::vector<Box> predicates = gen_workload(wspec, domain);
        std::vector<ObservedQuery> stream = label_workload(data, predicates);

        MixtureModel model = MixtureModel::uniform_prior(domain);
        std::vector<ObservedQuery> observed;
        std::vector<double> win_truth, win_est;
        double window_train_ms = 0.0;
        double window_est_us = 0.0;

        for (std::size_t i = 0; i < stream.size(); ++i) {
            auto t0 = std::chrono::steady_clock::now();
            double est = model.estimate(stream[i].predicate);
            if (cfg.timing)
                window_est_us += std::chrono::duration<double, std::micro>(
                                     std::chrono::steady_clock::now() - t0)
                                     .count();
            win_truth.push_back(stream[i].selectivity);
            win_est.push_back(est);
            observed.push_back(stream[i]);

            if (observed.size() % cfg.retrain_every == 0) {
                SubpopConfig scfg = cfg.subpop;
                scfg.method = method == "mixture-clustering" ? SubpopMethod::clustering
                                                             : SubpopMethod::sampling;
                scfg.seed = RandomStream(seed).substream("subpop").seed();
                scfg.m_override = cfg.m_override;
                TrainOutcome trained = train(observed, domain, cfg.trainer, scfg);
                model = std::move(trained.model);
                if (cfg.timing) window_train_ms += trained.total_ms();
            }

            if (win_truth.size() == cfg.shift_window) {
                results.push_back({method, i + 1, model.size(), rms_error(win_truth, win_est),
                                   window_train_ms,
                                   cfg.timing ? window_est_us / static_cast<double>(cfg.shift_window)
                                              : 0.0,
                                   seed});
                win_truth.clear();
                win_est.clear();
                window_train_ms = 0.0;
                window_est_us = 0.0;
            }
        }
    }
    return results;
}

// Identical Theorem-1 systems timed through both solvers over growing sizes.
inline std::vector<ExperimentResult> run_solver_comparison(const BenchConfig& cfg) {
    std::vector<ExperimentResult> results;
    std::size_t max_n = 0;
    for (const auto& [n, m] : cfg.solver_sizes) max_n = std::max(max_n, n);

    for (std::uint64_t seed : cfg.seeds) {
        Dataset data = gen_gaussian(cfg.rows, cfg.dim, cfg.correlation, seed);
        Box domain = data.schema().encoded_domain();
        WorkloadSpec wspec = cfg.workload;
        wspec.count = max_n + cfg.test_count;
        wspec.seed = seed;
        std::vector<Box> predicates = gen_workload(wspec, domain);
        std::vector<ObservedQuery> labeled = label_workload(data, predicates);
        std::vector<ObservedQuery> test(labeled.end() - static_cast<std::ptrdiff_t>(cfg.test_count),
                                        labeled.end());

        for (const auto& [n, m] : cfg.solver_sizes) {
            std::vector<ObservedQuery> observed(labeled.begin(),
                                                labeled.begin() + static_cast<std::ptrdiff_t>(n));
            SubpopConfig scfg = cfg.subpop;
            scfg.seed = RandomStream(seed).substream("subpop").seed();
            scfg.m_override = m;
            std::vector<Box> supports = generate_subpopulations(observed, domain, scfg);
            TrainingSystem sys = assemble(observed, supports, domain, cfg.trainer);

            for (SolverKind kind : {SolverKind::analytic, SolverKind::projected_gradient}) {
                TrainConfig tcfg = cfg.trainer;
                tcfg.solver = kind;
                SolveResult sol = solve(sys, tcfg);
                std::vector<double> weights(sol.w.data(), sol.w.data() + sol.w.size());
                MixtureModel model(domain, supports, weights);
                detail::BuiltEstimator est;
                est.estimate = [&model](const Region& r) { return model.estimate(r); };
                auto [rms, us] = detail::evaluate(est, test, cfg.timing);
                results.push_back({kind == SolverKind::analytic ? "analytic" : "projected-gradient",
                                   n, supports.size(), rms,
                                   cfg.timing ? sol.wall_ms : 0.0, us, seed});
            }
        }
    }
    return results;
}

inline std::vector<ExperimentResult> run_bench(const BenchConfig& cfg) {
    switch (cfg.experiment) {
        case ExperimentKind::learning_curve: return run_learning_curve(cfg);
        case ExperimentKind::workload_shift: return run_workload_shift(cfg);
        case ExperimentKind::solver_comparison: return run_solver_comparison(cfg);
    }
    throw std::logic_error("unreachable");
}

} // namespace selest
