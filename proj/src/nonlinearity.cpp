#include "ailfem/nonlinearity.hpp"

#include "ailfem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ailfem {

namespace {

void validate(const ScalarNonlinearity& n) {
    if (!n.mu || !n.mu_prime || !n.antiderivative)
        throw std::invalid_argument("nonlinearity: mu, mu', and M are all required");
    if (!(n.alpha > 0.0) || !(n.alpha <= n.lipschitz) ||
        !(n.growth_upper > 0.0) || !(n.growth_upper <= n.lipschitz))
        throw std::invalid_argument("nonlinearity: invalid constants");
    if (std::abs(n.antiderivative(0.0)) > 1e-14)
        throw std::invalid_argument("nonlinearity: M(0) != 0");

    // M' = mu, checked against quadrature of mu on a handful of samples
    const double samples[] = {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0};
    for (const double s : samples) {
        const double quad = integrate_adaptive(n.mu, 0.0, s, 1e-12);
        const double closed = n.antiderivative(s);
        if (std::abs(quad - closed) > 1e-8 * std::max(1.0, std::abs(quad)))
            throw std::invalid_argument(
                "nonlinearity: antiderivative does not match quadrature of mu");
    }

    // sampled growth condition: alpha <= slope of mu(t^2) t <= growth_upper
    auto g = [&n](double t) { return n.mu(t * t) * t; };
    const double slack = 1e-9;
    double prev_t = 0.0, prev_g = 0.0;
    for (int i = 1; i <= 400; ++i) {
        const double t = 25.0 * i / 400.0;
        const double gt = g(t);
        const double slope = (gt - prev_g) / (t - prev_t);
        if (slope < n.alpha - slack || slope > n.growth_upper + slack)
            throw std::invalid_argument("nonlinearity: growth condition violated");
        prev_t = t;
        prev_g = gt;
    }
}

}  // namespace

ScalarNonlinearity make_nonlinearity(std::function<double(double)> mu,
                                     std::function<double(double)> mu_prime,
                                     std::function<double(double)> antiderivative,
                                     double alpha, double lipschitz,
                                     double growth_upper) {
    ScalarNonlinearity n{std::move(mu), std::move(mu_prime),
                         std::move(antiderivative), alpha, lipschitz,
                         growth_upper};
    validate(n);
    return n;
}

ScalarNonlinearity builtin_nonlinearity(const std::string& name) {
    if (name == "lshape") {
        const double alpha = 1.0 - 2.0 * std::exp(-1.5);
        return make_nonlinearity(
            [](double t) { return 1.0 + std::exp(-t); },
            [](double t) { return -std::exp(-t); },
            [](double s) { return s + 1.0 - std::exp(-s); },
            alpha, 6.0, 2.0);
    }
    if (name == "zshape") {
        // constants are the extremal slopes of mu(t^2) t
        const double alpha = 0.9582898017;
        const double lip = 1.542343818;
        return make_nonlinearity(
            [](double t) { return 1.0 + std::log1p(t) / (1.0 + t); },
            [](double t) {
                const double u = 1.0 + t;
                return (1.0 - std::log1p(t)) / (u * u);
            },
            [](double s) {
                const double l = std::log1p(s);
                return s + 0.5 * l * l;
            },
            alpha, lip, lip);
    }
    throw std::invalid_argument("builtin_nonlinearity: unknown name '" + name +
                                "'");
}

Vec2 flux(const ScalarNonlinearity& n, const Vec2& g) {
    return n.mu(g.squaredNorm()) * g;
}

Mat2 flux_jacobian(const ScalarNonlinearity& n, const Vec2& g) {
    const double s = g.squaredNorm();
    Mat2 jac = n.mu(s) * Mat2::Identity();
    jac += 2.0 * n.mu_prime(s) * (g * g.transpose());
    return jac;
}

double energy_density(const ScalarNonlinearity& n, const Vec2& g) {
    return 0.5 * n.antiderivative(g.squaredNorm());
}

JacobianBounds sampled_jacobian_bounds(const ScalarNonlinearity& n,
                                       double g_max, int samples) {
    // eigenvalues of dA are mu(s^2) (tangential) and mu(s^2) + 2 s^2 mu'(s^2)
    // (radial), both functions of s = |g| only
    JacobianBounds b{std::numeric_limits<double>::max(), 0.0};
    for (int i = 0; i <= samples; ++i) {
        const double s = g_max * i / samples;
        const double s2 = s * s;
        const double tangential = n.mu(s2);
        const double radial = tangential + 2.0 * s2 * n.mu_prime(s2);
        b.lower = std::min({b.lower, tangential, radial});
        b.upper = std::max({b.upper, tangential, radial});
    }
    return b;
}

}  // namespace ailfem
