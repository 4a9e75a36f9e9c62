#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace ailfem {

// Symmetric 7-point triangle rule, exact for polynomials of total degree 5.
// Weights are normalized to sum to 1; multiply by the triangle area.
struct TriQuadPoint {
    double l0, l1, l2;  // barycentric coordinates
    double w;
};

inline const std::array<TriQuadPoint, 7>& tri_quadrature_order5() {
    static const double a1 = (6.0 + std::sqrt(15.0)) / 21.0;
    static const double a2 = (6.0 - std::sqrt(15.0)) / 21.0;
    static const double w1 = (155.0 + std::sqrt(15.0)) / 1200.0;
    static const double w2 = (155.0 - std::sqrt(15.0)) / 1200.0;
    static const std::array<TriQuadPoint, 7> rule = {{
        {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0},
        {a1, a1, 1.0 - 2.0 * a1, w1},
        {a1, 1.0 - 2.0 * a1, a1, w1},
        {1.0 - 2.0 * a1, a1, a1, w1},
        {a2, a2, 1.0 - 2.0 * a2, w2},
        {a2, 1.0 - 2.0 * a2, a2, w2},
        {1.0 - 2.0 * a2, a2, a2, w2},
    }};
    return rule;
}

namespace detail {

struct GaussKronrod15 {
    // Nodes and weights of the 7-point Gauss / 15-point Kronrod pair on [-1,1].
    static constexpr std::array<double, 8> xk = {
        0.991455371120813, 0.949107912342759, 0.864864423359769,
        0.741531185599394, 0.586087235467691, 0.405845151377397,
        0.207784955007898, 0.0};
    static constexpr std::array<double, 8> wk = {
        0.022935322010529, 0.063092092629979, 0.104790010322250,
        0.140653259715525, 0.169004726639267, 0.190350578064785,
        0.204432940075298, 0.209482141084728};
    static constexpr std::array<double, 4> wg = {
        0.129484966168870, 0.279705391489277, 0.381830050505119,
        0.417959183673469};
};

template <class F>
void gk15(F&& f, double a, double b, double& kronrod, double& gauss) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double rk = 0.0, rg = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double x = GaussKronrod15::xk[i];
        const double fv = (i == 7) ? f(c)
                                   : f(c - h * x) + f(c + h * x);
        rk += GaussKronrod15::wk[i] * fv;
        // odd Kronrod indices (and the center) are the embedded Gauss nodes
        if (i % 2 == 1 || i == 7) rg += GaussKronrod15::wg[i / 2] * fv;
    }
    kronrod = rk * h;
    gauss = rg * h;
}

template <class F>
double gk_adaptive(F&& f, double a, double b, double tol, int depth) {
    double k, g;
    gk15(f, a, b, k, g);
    if (depth <= 0 || std::abs(k - g) <= tol * std::max(1.0, std::abs(k)))
        return k;
    const double c = 0.5 * (a + b);
    return gk_adaptive(f, a, c, tol * 0.5, depth - 1) +
           gk_adaptive(f, c, b, tol * 0.5, depth - 1);
}

}  // namespace detail

// Adaptive Gauss-Kronrod quadrature on [a,b]; used as an independent oracle
// for antiderivative validation and test expectations.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol = 1e-12) {
    if (!(a <= b)) throw std::invalid_argument("integrate_adaptive: a > b");
    if (a == b) return 0.0;
    return detail::gk_adaptive(f, a, b, tol, 40);
}

}  // namespace ailfem
