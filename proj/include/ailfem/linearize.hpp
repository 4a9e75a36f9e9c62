#pragma once

#include "ailfem/fem.hpp"

#include <string>

namespace ailfem {

// One of the three iteration maps producing the SPD system of a
// linearization step:
//   zarantonello : damped Richardson with the Laplace form, 0 < delta < 2/L
//   kacanov      : weight mu(|grad u|^2) frozen at the previous iterate
//   newton       : damped Newton with the flux Jacobian as weight
struct LinearizationMethod {
    enum class Kind { zarantonello, kacanov, newton };
    Kind kind = Kind::kacanov;
    double delta = 0.0;  // damping; unused for kacanov
};

// Parses "kacanov" | "zarantonello:<delta>" | "newton:<delta>"; a bare
// "newton" selects delta = 1 clamped to the admissible window.
LinearizationMethod parse_method(const std::string& text);
std::string to_string(const LinearizationMethod& method);

// Validates the method parameters against the nonlinearity constants; for
// newton the damping is clamped into (0, 2 C'_ell / L] using sampled
// Jacobian bounds. Throws if no admissible damping exists.
LinearizationMethod validated_method(LinearizationMethod method,
                                     const ScalarNonlinearity& n);

// Assembles matrix and right-hand side such that the exact solve yields the
// next linearization iterate from u_prev:
//   rhs = matrix * u_prev + s * residual(u_prev),
// with s = delta for newton and s = 1 otherwise.
LinearizedSystem build_system(const LinearizationMethod& method,
                              const ProblemData& data,
                              const ScalarNonlinearity& n,
                              const FeFunction& u_prev);

// Direct-factorization solve of build_system; the iteration map itself.
FeFunction exact_step(const LinearizationMethod& method,
                      const ProblemData& data, const ScalarNonlinearity& n,
                      const FeFunction& u_prev);

// Coercivity constant linking the step size to the energy decrease:
//   zarantonello : 1/delta - L/2
//   kacanov      : alpha/2
//   newton       : C'_ell / delta - L/2 with sampled C'_ell
double coercivity_constant(const LinearizationMethod& method,
                           const ScalarNonlinearity& n);

}  // namespace ailfem
