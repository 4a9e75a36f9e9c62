#pragma once

#include "ailfem/mesh.hpp"
#include "ailfem/nonlinearity.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace ailfem {

// Lowest-order Lagrange space with homogeneous Dirichlet conditions: one
// degree of freedom per interior vertex, in vertex-index order.
struct DofMap {
    std::shared_ptr<const Mesh> mesh;
    std::vector<int> vertex_to_dof;  // -1 on Dirichlet vertices
    std::vector<int> dof_to_vertex;
    int num_dofs = 0;

    static DofMap build(std::shared_ptr<const Mesh> mesh);
};

std::shared_ptr<const DofMap> make_dof_map(std::shared_ptr<const Mesh> mesh);

// P1 function given by its interior-vertex coefficients; the Dirichlet trace
// is zero by construction. Immutable after construction.
struct FeFunction {
    std::shared_ptr<const DofMap> dofs;
    Eigen::VectorXd coeffs;
};

FeFunction zero_function(std::shared_ptr<const DofMap> dofs);

// Right-hand side data F(v) = <f, v> + <f_vec, grad v> and optional exact
// solution for error reporting. Null evaluators mean identically zero.
struct ProblemData {
    std::function<double(const Vec2&)> f;
    std::function<Vec2(const Vec2&)> f_vec;
    std::function<double(const Vec2&)> exact;
    std::function<Vec2(const Vec2&)> exact_gradient;

    bool has_exact() const { return static_cast<bool>(exact_gradient); }
};

// SPD system of one linearization step together with its linearization point.
struct LinearizedSystem {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
    FeFunction lin_point;
    double weight_min = 0.0;  // extremal element weights (eigenvalues for
    double weight_max = 0.0;  // matrix-valued weights)
    std::uint64_t id = 0;     // distinct per assembled system
};

// Gradients of the three hat functions on triangle t.
std::array<Vec2, 3> hat_gradients(const Mesh& mesh, int t);

// Elementwise-constant gradient of u on triangle t.
Vec2 element_gradient(const FeFunction& u, int t);

// Stiffness matrix with an elementwise constant scalar or symmetric
// positive-definite 2x2 matrix weight:
//   A_ij = sum_T grad phi_i . W_T grad phi_j |T|.
// Rejects non-symmetric or non-positive-definite weights.
Eigen::SparseMatrix<double> assemble_weighted_stiffness(
    const DofMap& dofs, std::span<const double> weights);
Eigen::SparseMatrix<double> assemble_weighted_stiffness(
    const DofMap& dofs, std::span<const Mat2> weights);
Eigen::SparseMatrix<double> assemble_weighted_stiffness(const DofMap& dofs,
                                                        double weight);

// Load vector F(phi_i), order-5 quadrature per triangle.
Eigen::VectorXd assemble_load(const DofMap& dofs, const ProblemData& data);

// Residual entries F(phi_i) - sum_T A(grad u).grad phi_i |T|.
Eigen::VectorXd nonlinear_residual(const ProblemData& data,
                                   const ScalarNonlinearity& n,
                                   const FeFunction& u);

// E(u) = sum_T |T| (1/2) M(|grad u|^2) - F(u); the M term is exact for P1,
// F(u) uses the same quadrature as assemble_load.
double energy(const ProblemData& data, const ScalarNonlinearity& n,
              const FeFunction& u);

// dl2(v, w) = E(w) - E(v), a single subtraction.
double energy_difference(const ProblemData& data, const ScalarNonlinearity& n,
                         const FeFunction& v, const FeFunction& w);

// |grad u| in L2
double energy_norm(const FeFunction& u);
double energy_norm_difference(const FeFunction& u, const FeFunction& v);

// Nodal interpolant of g; throws on non-finite vertex values.
FeFunction interpolate(std::shared_ptr<const DofMap> dofs,
                       const std::function<double(const Vec2&)>& g);

// |grad(exact - u)| in L2 by order-5 quadrature; requires exact_gradient.
double exact_error(const ProblemData& data, const FeFunction& u);

// Transfer onto the refinement the fine dof map was built on; exact for
// nested P1 spaces.
FeFunction prolongate(const FeFunction& coarse,
                      std::shared_ptr<const DofMap> fine);

}  // namespace ailfem
