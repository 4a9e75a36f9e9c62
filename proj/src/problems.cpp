#include "ailfem/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ailfem {

namespace {

// polar angle in [0, 3*pi/2), measured counterclockwise from the positive
// x axis; the two reentrant legs of the L-shaped domain sit at 0 and 3*pi/2
double lshape_angle(const Vec2& x) {
    double phi = std::atan2(x.y(), x.x());
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    return phi;
}

}  // namespace

double lshape_exact(const Vec2& x) {
    const double r = x.norm();
    if (r == 0.0) return 0.0;
    const double phi = lshape_angle(x);
    const double singular = std::pow(r, 2.0 / 3.0) * std::sin(2.0 * phi / 3.0);
    const double bubble = (1.0 - x.x() * x.x()) * (1.0 - x.y() * x.y());
    return singular * bubble * std::cos(phi);
}

Vec2 lshape_exact_gradient(const Vec2& x) {
    const double r = x.norm();
    if (r < 1e-100) return Vec2::Zero();
    const double phi = lshape_angle(x);
    const double cp = std::cos(phi);
    const double sp = std::sin(phi);
    const double r13 = std::pow(r, 1.0 / 3.0);  // r^{1/3}
    const double r23 = r13 * r13;               // r^{2/3}

    const double s = r23 * std::sin(2.0 * phi / 3.0);
    const Vec2 ds(-(2.0 / 3.0) / r13 * std::sin(phi / 3.0),
                  (2.0 / 3.0) / r13 * std::cos(phi / 3.0));

    const double px = 1.0 - x.x() * x.x();
    const double py = 1.0 - x.y() * x.y();
    const double p = px * py;
    const Vec2 dp(-2.0 * x.x() * py, -2.0 * x.y() * px);

    const double c = cp;
    const Vec2 dc(sp * sp / r, -sp * cp / r);

    return ds * (p * c) + dp * (s * c) + dc * (s * p);
}

Problem make_problem(const std::string& name) {
    if (name == "lshape") {
        Problem prob;
        prob.name = name;
        prob.initial_mesh = make_domain("lshape");
        prob.nonlinearity = builtin_nonlinearity("lshape");
        const ScalarNonlinearity n = prob.nonlinearity;
        prob.data.f = nullptr;
        prob.data.f_vec = [n](const Vec2& x) {
            return flux(n, lshape_exact_gradient(x));
        };
        prob.data.exact = [](const Vec2& x) { return lshape_exact(x); };
        prob.data.exact_gradient = [](const Vec2& x) {
            return lshape_exact_gradient(x);
        };
        return prob;
    }
    if (name == "zshape") {
        Problem prob;
        prob.name = name;
        prob.initial_mesh = make_domain("zshape");
        prob.nonlinearity = builtin_nonlinearity("zshape");
        prob.data.f = [](const Vec2&) { return 1.0; };
        prob.data.f_vec = nullptr;
        return prob;
    }
    throw std::invalid_argument("make_problem: unknown problem '" + name + "'");
}

}  // namespace ailfem
