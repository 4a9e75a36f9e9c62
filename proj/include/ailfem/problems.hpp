#pragma once

#include "ailfem/fem.hpp"
#include "ailfem/mesh.hpp"
#include "ailfem/nonlinearity.hpp"

#include <string>

namespace ailfem {

// Self-contained benchmark problem: coarse mesh, nonlinearity, and data.
struct Problem {
    std::string name;
    Mesh initial_mesh;
    ScalarNonlinearity nonlinearity;
    ProblemData data;
};

// Built-in benchmarks:
//   lshape : manufactured singular solution on the L-shaped domain, driven
//            variationally through f_vec = A(grad u*), f = 0
//   zshape : f = 1, f_vec = 0 on the Z-shaped domain, no known solution
Problem make_problem(const std::string& name);

// Closed-form L-shape solution (polar product form) and its gradient by
// analytic differentiation. Exposed for cross-checks.
double lshape_exact(const Vec2& x);
Vec2 lshape_exact_gradient(const Vec2& x);

}  // namespace ailfem
