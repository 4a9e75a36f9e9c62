#include "doctest.h"

#include "ailfem/adaptive.hpp"
#include "ailfem/selfcheck.hpp"

#include <cmath>
#include <random>

using namespace ailfem;

TEST_CASE("manufactured solution gradient matches finite differences") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> coord(-0.95, 0.95);
    int checked = 0;
    while (checked < 200) {
        const Vec2 x(coord(rng), coord(rng));
        // stay inside the domain and away from the singular corner
        if (x.x() >= -0.05 && x.y() <= 0.05) continue;
        if (x.norm() < 0.05) continue;
        const Vec2 grad = lshape_exact_gradient(x);
        const double h = 1e-7;
        Vec2 fd;
        for (int c = 0; c < 2; ++c) {
            Vec2 dx = Vec2::Zero();
            dx[c] = h;
            fd[c] = (lshape_exact(x + dx) - lshape_exact(x - dx)) / (2.0 * h);
        }
        CHECK((grad - fd).norm() <= 2e-6 * std::max(1.0, grad.norm()));
        ++checked;
    }
}

TEST_CASE("manufactured solution vanishes on the boundary") {
    // outer square edges and the two reentrant legs
    for (int i = 0; i <= 50; ++i) {
        const double t = -1.0 + 2.0 * i / 50.0;
        CHECK(std::abs(lshape_exact(Vec2(t, 1.0))) <= 1e-14);
        CHECK(std::abs(lshape_exact(Vec2(-1.0, t))) <= 1e-14);
        if (t <= 0.0) {
            CHECK(std::abs(lshape_exact(Vec2(t, -1.0))) <= 1e-14);
            CHECK(std::abs(lshape_exact(Vec2(1.0, -t))) <= 1e-14);
        }
        if (t >= 0.0) {
            CHECK(std::abs(lshape_exact(Vec2(t, 0.0))) <= 1e-14);   // leg
            CHECK(std::abs(lshape_exact(Vec2(0.0, -t))) <= 1e-14);  // leg
        }
    }
}

// integration-level behavior behind the command line front end

TEST_CASE("zarantonello run on the Z-shape from a method string") {
    const Problem prob = make_problem("zshape");
    AdaptiveParams params;
    params.method = parse_method("zarantonello:0.648364");
    params.eta_stop = 0.2;
    const RunHistory hist = run_adaptive(prob, params);
    CHECK(hist.termination == Termination::tolerance_met);
    CHECK(hist.final_record().eta < 0.2);
    CHECK(to_string(hist.method) == "zarantonello:0.648364");
}

TEST_CASE("newton run with default damping") {
    const Problem prob = make_problem("lshape");
    AdaptiveParams params;
    params.method = parse_method("newton");
    params.eta_stop = 0.3;
    const RunHistory hist = run_adaptive(prob, params);
    CHECK(hist.termination == Termination::tolerance_met);
    CHECK(hist.final_record().eta < 0.3);
}

TEST_CASE("unknown problem names are rejected") {
    CHECK_THROWS(make_problem("disc"));
    CHECK_THROWS(make_problem(""));
}

TEST_CASE("theta variations all run to their stop") {
    // the marking parameter may be anything in (0, 1], including 1
    const Problem prob = make_problem("zshape");
    for (const double theta : {0.25, 1.0}) {
        AdaptiveParams params;
        params.theta = theta;
        params.eta_stop = 0.5;
        const RunHistory hist = run_adaptive(prob, params);
        CHECK(hist.termination == Termination::tolerance_met);
    }
}

TEST_CASE("self checks pass on a clean tree") {
    const auto results = run_self_checks();
    CHECK(!results.empty());
    for (const auto& r : results) {
        CAPTURE(r.name);
        CAPTURE(r.detail);
        CHECK(r.passed);
    }
}
