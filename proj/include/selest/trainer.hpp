#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "selest/error.hpp"
#include "selest/geometry.hpp"
#include "selest/model.hpp"
#include "selest/subpop.hpp"

namespace selest {

// The quadratic system behind training:
//   Q_ij = |G_i ∩ G_j| / (|G_i| |G_j|)   (m x m, so w'Qw = ∫ f²)
//   A_ij = |B_i ∩ G_j| / |G_j|           (n x m, so (Aw)_i = ∫_{B_i} f)
// with s the observed selectivities and lambda the penalty that replaces the
// hard consistency constraints A w = s.
struct TrainingSystem {
    Eigen::MatrixXd Q;
    Eigen::MatrixXd A;
    Eigen::VectorXd s;
    double lambda = 1e6;
};

enum class SolverKind { analytic, projected_gradient };

struct TrainConfig {
    double lambda = 1e6;
    double ridge = 1e-8;
    SolverKind solver = SolverKind::analytic;
    int pg_max_iters = 10000;
    double pg_tol = 1e-8;
    bool include_domain_assertion = true;
};

struct SolveResult {
    Eigen::VectorXd w;
    double residual_inf = 0.0; // max_i |(Aw)_i - s_i|
    int iterations = 0;
    double wall_ms = 0.0;
    bool converged = true;
};

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

} // namespace detail

inline TrainingSystem assemble(const std::vector<ObservedQuery>& queries,
                               const std::vector<Box>& supports, const Box& domain,
                               const TrainConfig& cfg) {
    const auto m = static_cast<Eigen::Index>(supports.size());
    std::vector<double> vol(supports.size());
    for (std::size_t j = 0; j < supports.size(); ++j) {
        vol[j] = supports[j].volume();
        if (vol[j] <= 0.0)
            throw std::invalid_argument("assemble: support " + std::to_string(j) +
                                        " has zero volume");
    }

    TrainingSystem sys;
    sys.lambda = cfg.lambda;
    sys.Q.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        sys.Q(i, i) = 1.0 / vol[static_cast<std::size_t>(i)]; // |G∩G| = |G| exactly
        for (Eigen::Index j = i + 1; j < m; ++j) {
            double inter = intersect(supports[static_cast<std::size_t>(i)],
                                     supports[static_cast<std::size_t>(j)])
                               .volume();
            double q = inter / (vol[static_cast<std::size_t>(i)] * vol[static_cast<std::size_t>(j)]);
            sys.Q(i, j) = q;
            sys.Q(j, i) = q;
        }
    }

    const auto n = static_cast<Eigen::Index>(queries.size());
    const Eigen::Index rows = n + (cfg.include_domain_assertion ? 1 : 0);
    sys.A.resize(rows, m);
    sys.s.resize(rows);
    for (Eigen::Index i = 0; i < n; ++i) {
        const ObservedQuery& q = queries[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m; ++j)
            sys.A(i, j) = region_intersect_volume(q.predicate, supports[static_cast<std::size_t>(j)]) /
                          vol[static_cast<std::size_t>(j)];
        sys.s(i) = q.selectivity;
    }
    if (cfg.include_domain_assertion) {
        // (B0, 1): softly anchors total mass, since w'1 = 1 iff ∫ f = 1.
        for (Eigen::Index j = 0; j < m; ++j)
            sys.A(n, j) = region_intersect_volume(Region(domain),
                                                  supports[static_cast<std::size_t>(j)]) /
                          vol[static_cast<std::size_t>(j)];
        sys.s(n) = 1.0;
    }
    return sys;
}

// Closed-form solution of the penalized problem: the stationarity condition
// 2 Q w + 2 lambda A'(A w - s) = 0 gives (Q + lambda A'A) w = lambda A' s. A
// small ridge scaled to the mean diagonal keeps the factorization robust when
// Q + lambda A'A is only positive semidefinite (duplicate supports).
inline SolveResult solve_analytic(const TrainingSystem& sys, const TrainConfig& cfg) {
    auto start = std::chrono::steady_clock::now();
    const Eigen::Index m = sys.Q.rows();

    Eigen::MatrixXd M = sys.lambda * (sys.A.transpose() * sys.A);
    M += sys.Q;
    double ridge_eff = cfg.ridge * M.trace() / static_cast<double>(m);
    M.diagonal().array() += ridge_eff;
    Eigen::VectorXd rhs = sys.lambda * (sys.A.transpose() * sys.s);

    Eigen::VectorXd w;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() == Eigen::Success) {
        w = llt.solve(rhs);
    } else {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
        if (ldlt.info() == Eigen::Success) {
            w = ldlt.solve(rhs);
        } else {
            w = M.fullPivLu().solve(rhs);
        }
    }

    double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
    if (!w.allFinite() || (M * w - rhs).lpNorm<Eigen::Infinity>() > 1e-6 * scale)
        throw NumericError("analytic solve: system numerically singular; increase the ridge");

    SolveResult out;
    out.w = std::move(w);
    out.residual_inf = (sys.A * out.w - sys.s).lpNorm<Eigen::Infinity>();
    out.iterations = 1;
    out.wall_ms = detail::elapsed_ms(start);
    return out;
}

// Iterative comparison path: minimize w'Qw + lambda ||Aw - s||² subject to
// w >= 0 by projected gradient descent with step 1/L, L estimated by power
// iteration on the Hessian 2Q + 2 lambda A'A. Stands in for handing the
// original constrained QP to an off-the-shelf solver.
inline SolveResult solve_projected_gradient(const TrainingSystem& sys, const TrainConfig& cfg) {
    auto start = std::chrono::steady_clock::now();
    const Eigen::Index m = sys.Q.rows();

    auto hessian_apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return 2.0 * (sys.Q * v) + 2.0 * sys.lambda * (sys.A.transpose() * (sys.A * v));
    };

    Eigen::VectorXd v = Eigen::VectorXd::Ones(m) / std::sqrt(static_cast<double>(m));
    double lip = 1.0;
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd hv = hessian_apply(v);
        double norm = hv.norm();
        if (norm <= 0.0) break;
        lip = norm;
        v = hv / norm;
    }
    double step = 1.0 / (1.02 * std::max(lip, 1e-300));

    auto objective = [&](const Eigen::VectorXd& w) {
        return w.dot(sys.Q * w) + sys.lambda * (sys.A * w - sys.s).squaredNorm();
    };

    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    double obj = objective(w);
    SolveResult out;
    out.converged = false;
    int it = 0;
    for (; it < cfg.pg_max_iters; ++it) {
        Eigen::VectorXd grad =
            2.0 * (sys.Q * w) + 2.0 * sys.lambda * (sys.A.transpose() * (sys.A * w - sys.s));
        w = (w - step * grad).cwiseMax(0.0);
        double next = objective(w);
        if (std::abs(obj - next) <= cfg.pg_tol * std::max(1.0, std::abs(next))) {
            obj = next;
            out.converged = true;
            ++it;
            break;
        }
        obj = next;
    }
    out.w = std::move(w);
    out.residual_inf = (sys.A * out.w - sys.s).lpNorm<Eigen::Infinity>();
    out.iterations = it;
    out.wall_ms = detail::elapsed_ms(start);
    return out;
}

inline SolveResult solve(const TrainingSystem& sys, const TrainConfig& cfg) {
    return cfg.solver == SolverKind::analytic ? solve_analytic(sys, cfg)
                                              : solve_projected_gradient(sys, cfg);
}

struct TrainOutcome {
    MixtureModel model;
    SolveResult solve;
    double assemble_ms = 0.0;
    double subpop_ms = 0.0;

    double total_ms() const { return subpop_ms + assemble_ms + solve.wall_ms; }
};

// Full training pipeline: supports from the observed queries, Theorem 1
// system, penalized solve. A workload consisting solely of full-domain
// assertions is informationally the default query (P0, 1), for which the
// uniform prior is the exact optimum; sampled supports cannot represent it,
// so that case short-circuits.
inline TrainOutcome train(const std::vector<ObservedQuery>& queries, const Box& domain,
                          const TrainConfig& cfg, const SubpopConfig& subpop_cfg) {
    if (queries.empty())
        throw std::invalid_argument("train: need at least one observed query");

    bool informative = false;
    for (const ObservedQuery& q : queries)
        if (!q.is_full_domain(domain)) {
            informative = true;
            break;
        }
    if (!informative)
        return TrainOutcome{MixtureModel::uniform_prior(domain),
                            SolveResult{Eigen::VectorXd::Ones(1), 0.0, 0, 0.0, true}};

    auto t0 = std::chrono::steady_clock::now();
    std::vector<Box> supports = generate_subpopulations(queries, domain, subpop_cfg);
    double subpop_ms = detail::elapsed_ms(t0);

    auto t1 = std::chrono::steady_clock::now();
    TrainingSystem sys = assemble(queries, supports, domain, cfg);
    double assemble_ms = detail::elapsed_ms(t1);

    SolveResult result = solve(sys, cfg);
    std::vector<double> weights(result.w.data(), result.w.data() + result.w.size());
    TrainOutcome out{MixtureModel(domain, std::move(supports), std::move(weights)),
                     std::move(result), assemble_ms, subpop_ms};
    return out;
}

// Row-major text dump ("rows cols" header) for external verification.
inline void write_matrix(const Eigen::MatrixXd& mat, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write matrix file: " + path);
    out << mat.rows() << ' ' << mat.cols() << '\n';
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
            if (j) out << ' ';
            out << fmt_double(mat(i, j));
        }
        out << '\n';
    }
}

inline void write_system(const TrainingSystem& sys, const std::string& path_prefix) {
    write_matrix(sys.Q, path_prefix + ".Q.txt");
    write_matrix(sys.A, path_prefix + ".A.txt");
    write_matrix(sys.s, path_prefix + ".s.txt");
}

} // namespace selest
