#include "ailfem/selfcheck.hpp"

#include "ailfem/adaptive.hpp"
#include "ailfem/algsolver.hpp"
#include "ailfem/estimator.hpp"
#include "ailfem/oversolve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <tuple>

namespace ailfem {

namespace {

void check(std::vector<CheckResult>& out, const std::string& name,
           const std::function<void()>& body) {
    CheckResult r{name, true, ""};
    try {
        body();
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = e.what();
    }
    out.push_back(std::move(r));
}

void require(bool cond, const std::string& message) {
    if (!cond) throw std::runtime_error(message);
}

}  // namespace

std::vector<CheckResult> run_self_checks() {
    std::vector<CheckResult> results;

    check(results, "domains conform and have the expected areas", [] {
        for (const char* name : {"square", "lshape", "zshape"}) {
            Mesh mesh = make_domain(name);
            check_mesh(mesh);
        }
        require(std::abs(make_domain("square").total_area() - 1.0) < 1e-14,
                "square area");
        require(std::abs(make_domain("lshape").total_area() - 3.0) < 1e-14,
                "lshape area");
        require(std::abs(make_domain("zshape").total_area() - 3.5) < 1e-14,
                "zshape area");
    });

    check(results, "refinement keeps meshes conforming", [] {
        Mesh mesh = make_domain("lshape");
        std::mt19937 rng(7);
        for (int round = 0; round < 6; ++round) {
            std::vector<int> marks;
            std::uniform_int_distribution<int> pick(0, mesh.num_triangles() - 1);
            for (int i = 0; i < 1 + mesh.num_triangles() / 4; ++i)
                marks.push_back(pick(rng));
            const Mesh next = refine(mesh, MarkedSet::of(marks, mesh));
            check_mesh(next);
            require(next.num_triangles() > mesh.num_triangles(),
                    "refinement must add triangles");
            mesh = next;
        }
    });

    check(results, "built-in nonlinearities validate", [] {
        builtin_nonlinearity("lshape");
        builtin_nonlinearity("zshape");
    });

    check(results, "energy differences are antisymmetric and additive", [] {
        auto mesh = std::make_shared<const Mesh>(
            uniform_refine(uniform_refine(make_domain("lshape"))));
        auto dofs = make_dof_map(mesh);
        const Problem prob = make_problem("lshape");
        std::mt19937 rng(3);
        std::normal_distribution<double> dist;
        auto random_fn = [&] {
            FeFunction u = zero_function(dofs);
            for (int i = 0; i < u.coeffs.size(); ++i) u.coeffs[i] = dist(rng);
            return u;
        };
        for (int trial = 0; trial < 20; ++trial) {
            const FeFunction v = random_fn(), w = random_fn(), z = random_fn();
            const double vw =
                energy_difference(prob.data, prob.nonlinearity, v, w);
            const double wv =
                energy_difference(prob.data, prob.nonlinearity, w, v);
            require(vw == -wv, "antisymmetry must be exact");
            const double vz =
                energy_difference(prob.data, prob.nonlinearity, v, z);
            const double zw =
                energy_difference(prob.data, prob.nonlinearity, z, w);
            const double scale =
                std::max({1.0, std::abs(vw), std::abs(vz), std::abs(zw)});
            require(std::abs(vw - (vz + zw)) <= 1e-12 * scale,
                    "additivity beyond tolerance");
        }
    });

    check(results, "estimator reduction under uniform refinement", [] {
        const ScalarNonlinearity n = builtin_nonlinearity("lshape");
        ProblemData zero_data;
        auto coarse = std::make_shared<const Mesh>(
            uniform_refine(make_domain("lshape")));
        auto cd = make_dof_map(coarse);
        auto fine = std::make_shared<const Mesh>(uniform_refine(*coarse));
        auto fd = make_dof_map(fine);
        std::mt19937 rng(11);
        std::normal_distribution<double> dist;
        for (int trial = 0; trial < 20; ++trial) {
            FeFunction v = zero_function(cd);
            for (int i = 0; i < v.coeffs.size(); ++i) v.coeffs[i] = dist(rng);
            const double coarse_eta = total(indicators(zero_data, n, v));
            const double fine_eta =
                total(indicators(zero_data, n, prolongate(v, fd)));
            require(fine_eta <=
                        std::pow(2.0, -0.25) * coarse_eta * (1.0 + 1e-12),
                    "reduction factor violated");
        }
    });

    check(results, "marking selects minimal sets", [] {
        Mesh mesh = make_domain("lshape");
        auto mp = std::make_shared<const Mesh>(mesh);
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            IndicatorField ind;
            ind.mesh = mp;
            ind.eta_sq = Eigen::VectorXd::Zero(mp->num_triangles());
            for (int i = 0; i < ind.eta_sq.size(); ++i)
                ind.eta_sq[i] = dist(rng);
            const double theta = 0.05 + 0.9 * dist(rng);
            const MarkedSet marked = doerfler_mark(ind, theta);
            const double target = theta * ind.eta_sq.sum();
            const double got = restricted(ind, marked);
            require(got * got >= target, "marking property violated");
            // brute force: smallest cardinality reaching the target
            const int nt = static_cast<int>(ind.eta_sq.size());
            int best = nt;
            for (int mask = 0; mask < (1 << nt); ++mask) {
                double sum = 0.0;
                int card = 0;
                for (int t = 0; t < nt; ++t)
                    if (mask & (1 << t)) {
                        sum += ind.eta_sq[t];
                        ++card;
                    }
                if (sum >= target) best = std::min(best, card);
            }
            require(static_cast<int>(marked.size()) == best,
                    "marked set not of minimal cardinality");
        }
    });

    check(results, "multigrid step contracts on a Poisson system", [] {
        const ScalarNonlinearity one = make_nonlinearity(
            [](double) { return 1.0; }, [](double) { return 0.0; },
            [](double s) { return s; }, 1.0, 1.0, 1.0);
        ProblemData data;
        data.f = [](const Vec2&) { return 1.0; };
        std::vector<std::shared_ptr<const Mesh>> meshes;
        meshes.push_back(
            std::make_shared<const Mesh>(uniform_refine(make_domain("square"))));
        for (int i = 0; i < 4; ++i)
            meshes.push_back(
                std::make_shared<const Mesh>(uniform_refine(*meshes.back())));
        const auto hier = MultilevelHierarchy::from_meshes(meshes);
        const auto& dofs = hier.levels.back().dofs;
        const LinearizationMethod kacanov{LinearizationMethod::Kind::kacanov,
                                          0.0};
        const LinearizedSystem sys =
            build_system(kacanov, data, one, zero_function(dofs));
        const FeFunction exact = direct_solve(sys);
        auto a_norm = [&sys](const Eigen::VectorXd& v) {
            return std::sqrt(v.dot(sys.matrix * v));
        };
        FeFunction it = zero_function(dofs);
        MultigridWorkspace ws = prepare_multigrid(hier, sys);
        SolverStats stats;
        for (int step = 0; step < 10; ++step) {
            const FeFunction next = one_step(hier, ws, sys, it);
            stats.record(a_norm(exact.coeffs - it.coeffs),
                         a_norm(exact.coeffs - next.coeffs));
            it = next;
        }
        require(estimate_contraction(stats) < 0.9,
                "contraction too weak on Poisson test");
    });

    check(results, "small adaptive run behaves", [] {
        const Problem prob = make_problem("lshape");
        AdaptiveParams params;
        params.eta_stop = 0.6;
        params.record_exact_error = false;
        const RunHistory hist = run_adaptive(prob, params);
        require(hist.termination == Termination::tolerance_met,
                "run did not reach the estimator stop");
        require(!hist.records.empty(), "run produced no records");
        for (std::size_t i = 1; i < hist.records.size(); ++i) {
            const auto& a = hist.records[i - 1];
            const auto& b = hist.records[i];
            const bool increasing =
                std::tie(a.ell, a.k, a.j) < std::tie(b.ell, b.k, b.j);
            require(increasing, "records must be lexicographically ordered");
            require(b.cum_cost > a.cum_cost, "cost must strictly increase");
        }
    });

    return results;
}

}  // namespace ailfem
