#include "doctest.h"

#include "ailfem/algsolver.hpp"
#include "ailfem/linearize.hpp"
#include "ailfem/problems.hpp"

#include <cmath>
#include <random>

using namespace ailfem;

namespace {

const LinearizationMethod kKacanov{LinearizationMethod::Kind::kacanov, 0.0};

ScalarNonlinearity unit_coefficient() {
    return make_nonlinearity([](double) { return 1.0; },
                             [](double) { return 0.0; },
                             [](double s) { return s; }, 1.0, 1.0, 1.0);
}

// hierarchy of uniformly refined meshes over a domain
MultilevelHierarchy uniform_hierarchy(const char* domain, int depth) {
    std::vector<std::shared_ptr<const Mesh>> meshes;
    meshes.push_back(std::make_shared<const Mesh>(make_domain(domain)));
    for (int i = 0; i < depth; ++i)
        meshes.push_back(
            std::make_shared<const Mesh>(uniform_refine(*meshes.back())));
    return MultilevelHierarchy::from_meshes(meshes);
}

double a_norm(const LinearizedSystem& sys, const Eigen::VectorXd& v) {
    return std::sqrt(v.dot(sys.matrix * v));
}

}  // namespace

TEST_CASE("single-dof system is solved exactly in one step") {
    const auto hier = uniform_hierarchy("square", 1);
    const auto& dofs = hier.levels.back().dofs;
    REQUIRE(dofs->num_dofs == 1);
    ProblemData data;
    data.f = [](const Vec2&) { return 1.0; };
    const auto one = unit_coefficient();
    const LinearizedSystem sys =
        build_system(kKacanov, data, one, zero_function(dofs));
    const FeFunction out = one_step(hier, sys, zero_function(dofs));
    CHECK(out.coeffs[0] == doctest::Approx(1.0 / 12.0).epsilon(1e-14));

    // exact iterate stays fixed
    const FeFunction again = one_step(hier, sys, out);
    CHECK((again.coeffs - out.coeffs).norm() <= 1e-15);
}

TEST_CASE("direct solve fundamentals") {
    const auto hier = uniform_hierarchy("square", 3);
    const auto& dofs = hier.levels.back().dofs;
    ProblemData data;
    data.f = [](const Vec2& x) { return std::sin(3.0 * x.x()) + x.y(); };
    const auto one = unit_coefficient();
    const LinearizedSystem sys =
        build_system(kKacanov, data, one, zero_function(dofs));
    const FeFunction direct = direct_solve(sys);
    CHECK((sys.matrix * direct.coeffs - sys.rhs).norm() <=
          1e-12 * sys.rhs.norm());

    // zero right-hand side gives the zero solution
    LinearizedSystem zero_sys = sys;
    zero_sys.rhs.setZero();
    zero_sys.id += 1000000;  // distinct system
    CHECK(direct_solve(zero_sys).coeffs.norm() == 0.0);

    // iterated one_step converges to the direct solution
    FeFunction it = zero_function(dofs);
    MultigridWorkspace ws = prepare_multigrid(hier, sys);
    for (int step = 0; step < 200; ++step) it = one_step(hier, ws, sys, it);
    CHECK((it.coeffs - direct.coeffs).norm() <=
          1e-8 * std::max(1.0, direct.coeffs.norm()));
}

TEST_CASE("contraction on an adaptively refined nonlinear problem") {
    const Problem prob = make_problem("lshape");
    std::vector<std::shared_ptr<const Mesh>> meshes;
    meshes.push_back(std::make_shared<const Mesh>(prob.initial_mesh));
    std::mt19937 rng(23);
    for (int i = 0; i < 5; ++i) {
        const Mesh& m = *meshes.back();
        std::vector<int> marks;
        std::uniform_int_distribution<int> pick(0, m.num_triangles() - 1);
        for (int j = 0; j <= m.num_triangles() / 3; ++j)
            marks.push_back(pick(rng));
        meshes.push_back(
            std::make_shared<const Mesh>(refine(m, MarkedSet::of(marks, m))));
    }
    const auto hier = MultilevelHierarchy::from_meshes(meshes);
    const auto& dofs = hier.levels.back().dofs;
    REQUIRE(dofs->num_dofs > 10);

    std::normal_distribution<double> dist;
    FeFunction lin_point = zero_function(dofs);
    for (int i = 0; i < lin_point.coeffs.size(); ++i)
        lin_point.coeffs[i] = 0.3 * dist(rng);
    const LinearizedSystem sys =
        build_system(kKacanov, prob.data, prob.nonlinearity, lin_point);
    const FeFunction exact = direct_solve(sys);

    SolverStats stats;
    FeFunction it = zero_function(dofs);
    MultigridWorkspace ws = prepare_multigrid(hier, sys);
    const double floor = 1e-10 * a_norm(sys, exact.coeffs);
    for (int step = 0; step < 20; ++step) {
        const FeFunction next = one_step(hier, ws, sys, it);
        // stop measuring once the error reaches the round-off floor
        if (a_norm(sys, exact.coeffs - it.coeffs) <= floor) break;
        stats.record(a_norm(sys, exact.coeffs - it.coeffs),
                     a_norm(sys, exact.coeffs - next.coeffs));
        it = next;
    }
    const double q = estimate_contraction(stats);
    MESSAGE("contraction on adaptively refined lshape: ", q);
    CHECK(q <= 0.9);

    // triangle-inequality envelope with the measured factor
    FeFunction prev = zero_function(dofs);
    it = zero_function(dofs);
    for (int step = 0; step < 5; ++step) {
        const FeFunction next = one_step(hier, ws, sys, it);
        const double inc = a_norm(sys, next.coeffs - it.coeffs);
        const double err_before = a_norm(sys, exact.coeffs - it.coeffs);
        const double err_after = a_norm(sys, exact.coeffs - next.coeffs);
        CHECK(inc >= (1.0 - q) / q * err_after - 1e-12);
        CHECK(inc <= (1.0 + q) * err_before + 1e-12);
        prev = it;
        it = next;
    }
}

TEST_CASE("solver step is linear in iterate and right-hand side") {
    const auto hier = uniform_hierarchy("lshape", 3);
    const auto& dofs = hier.levels.back().dofs;
    const auto one = unit_coefficient();
    ProblemData data;
    data.f = [](const Vec2& x) { return x.x(); };
    LinearizedSystem sys =
        build_system(kKacanov, data, one, zero_function(dofs));
    MultigridWorkspace ws = prepare_multigrid(hier, sys);

    std::mt19937 rng(31);
    std::normal_distribution<double> dist;
    auto randvec = [&] {
        Eigen::VectorXd v(dofs->num_dofs);
        for (int i = 0; i < v.size(); ++i) v[i] = dist(rng);
        return v;
    };
    const Eigen::VectorXd x1 = randvec(), x2 = randvec();
    const Eigen::VectorXd b1 = randvec(), b2 = randvec();

    auto step_with = [&](const Eigen::VectorXd& b, const Eigen::VectorXd& x) {
        LinearizedSystem s = sys;
        s.rhs = b;
        s.id += 1 + static_cast<std::uint64_t>(rng());
        return one_step(hier, s, FeFunction{dofs, x}).coeffs;
    };
    const Eigen::VectorXd out1 = step_with(b1, x1);
    const Eigen::VectorXd out2 = step_with(b2, x2);
    const Eigen::VectorXd sum = step_with(b1 + b2, x1 + x2);
    CHECK((sum - out1 - out2).norm() <=
          1e-12 * std::max(1.0, sum.norm()));
}

TEST_CASE("error propagation is self-adjoint in the a-inner product") {
    const auto hier = uniform_hierarchy("lshape", 3);
    const auto& dofs = hier.levels.back().dofs;
    const auto one = unit_coefficient();
    ProblemData data;
    LinearizedSystem sys =
        build_system(kKacanov, data, one, zero_function(dofs));
    sys.rhs.setZero();  // then one_step applies the error propagation matrix
    MultigridWorkspace ws = prepare_multigrid(hier, sys);

    std::mt19937 rng(37);
    std::normal_distribution<double> dist;
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd v(dofs->num_dofs), w(dofs->num_dofs);
        for (int i = 0; i < v.size(); ++i) {
            v[i] = dist(rng);
            w[i] = dist(rng);
        }
        const Eigen::VectorXd ev =
            one_step(hier, ws, sys, FeFunction{dofs, v}).coeffs;
        const Eigen::VectorXd ew =
            one_step(hier, ws, sys, FeFunction{dofs, w}).coeffs;
        const double left = w.dot(sys.matrix * ev);
        const double right = v.dot(sys.matrix * ew);
        CHECK(left == doctest::Approx(right).epsilon(1e-10));
    }
}

TEST_CASE("solver stats") {
    SolverStats stats;
    CHECK_THROWS(estimate_contraction(stats));
    stats.record(1.0, 0.5);
    CHECK(estimate_contraction(stats) == 0.5);
    stats.record(1.0, 0.3);
    stats.record(1.0, 0.7);
    CHECK(estimate_contraction(stats) == 0.7);
    stats.record(0.0, 1.0);  // ignored: previous error is zero
    CHECK(stats.ratios.size() == 3);
}

TEST_CASE("one_step rejects mismatched dimensions") {
    const auto hier = uniform_hierarchy("square", 2);
    const auto& dofs = hier.levels.back().dofs;
    const auto one = unit_coefficient();
    ProblemData data;
    data.f = [](const Vec2&) { return 1.0; };
    const LinearizedSystem sys =
        build_system(kKacanov, data, one, zero_function(dofs));
    FeFunction wrong{dofs, Eigen::VectorXd::Zero(dofs->num_dofs + 3)};
    CHECK_THROWS(one_step(hier, sys, wrong));
}
