#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace ailfem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Scalar diffusion nonlinearity mu together with derived quantities.
//
// alpha is the strong-monotonicity constant and lipschitz the Lipschitz
// constant of the induced vector field g -> mu(|g|^2) g. growth_upper bounds
// the slope of t -> mu(t^2) t, which is also an upper bound for mu itself
// and hence for the Kacanov weights.
struct ScalarNonlinearity {
    std::function<double(double)> mu;              // t >= 0
    std::function<double(double)> mu_prime;        // derivative of mu
    std::function<double(double)> antiderivative;  // M(s) = int_0^s mu
    double alpha = 0.0;
    double lipschitz = 0.0;
    double growth_upper = 0.0;
};

// Validates the ingredients (constants positive and ordered, M(0) = 0,
// M' = mu against an adaptive Gauss-Kronrod quadrature of mu on sample
// points, sampled growth condition within growth_upper). Throws
// std::invalid_argument on violation.
ScalarNonlinearity make_nonlinearity(std::function<double(double)> mu,
                                     std::function<double(double)> mu_prime,
                                     std::function<double(double)> antiderivative,
                                     double alpha, double lipschitz,
                                     double growth_upper);

// Built-in nonlinearities of the benchmark problems:
//   lshape : mu(t) = 1 + exp(-t),          alpha = 1 - 2 exp(-3/2), L = 6
//   zshape : mu(t) = 1 + log(1+t)/(1+t),   alpha ~ 0.9582898017, L ~ 1.542343818
ScalarNonlinearity builtin_nonlinearity(const std::string& name);

// A(g) = mu(|g|^2) g
Vec2 flux(const ScalarNonlinearity& n, const Vec2& g);

// dA(g) = 2 mu'(|g|^2) g g^T + mu(|g|^2) I, the symmetric flux Jacobian
Mat2 flux_jacobian(const ScalarNonlinearity& n, const Vec2& g);

// (1/2) M(|g|^2), the integrand of the energy functional
double energy_density(const ScalarNonlinearity& n, const Vec2& g);

// Extremal eigenvalues of flux_jacobian over |g| <= g_max, sampled on a
// dense radial grid. Surrogates for the ellipticity/continuity constants of
// the Newton bilinear form.
struct JacobianBounds {
    double lower = 0.0;
    double upper = 0.0;
};
JacobianBounds sampled_jacobian_bounds(const ScalarNonlinearity& n,
                                       double g_max = 10.0, int samples = 4096);

}  // namespace ailfem
