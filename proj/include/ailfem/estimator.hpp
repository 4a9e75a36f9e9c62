#pragma once

#include "ailfem/fem.hpp"

#include <memory>

namespace ailfem {

// Squared residual indicators, one entry per triangle.
struct IndicatorField {
    Eigen::VectorXd eta_sq;
    std::shared_ptr<const Mesh> mesh;
};

// Residual indicators for P1 with elementwise P0-projected data:
//   eta_T^2 = |T| * ||f_T||_{L2(T)}^2
//           + |T|^{1/2} * sum_{e in dT cap Omega} ||[(A(grad u) - f_vec_T) . n]||_{L2(e)}^2
// where f_T, f_vec_T are the elementwise means of f and f_vec. The flux of a
// P1 function is elementwise constant, so its divergence drops out of the
// volume term and the jumps are constant per edge (edge integrals exact).
// Boundary edges carry no jump term.
IndicatorField indicators(const ProblemData& data, const ScalarNonlinearity& n,
                          const FeFunction& u);

// sqrt of the full squared sum
double total(const IndicatorField& ind);

// sqrt of the partial squared sum over a subset of triangles
double restricted(const IndicatorField& ind, const MarkedSet& subset);

}  // namespace ailfem
