#include "ailfem/oversolve.hpp"

#include "ailfem/algsolver.hpp"

#include <cmath>
#include <stdexcept>

namespace ailfem {

FeFunction oversolve(const ProblemData& data, const ScalarNonlinearity& n,
                     std::shared_ptr<const DofMap> dofs,
                     const OversolveOptions& opt) {
    const LinearizationMethod kacanov{LinearizationMethod::Kind::kacanov, 0.0};
    FeFunction u = opt.seed ? *opt.seed : zero_function(dofs);
    if (dofs->num_dofs == 0) return u;

    double e_prev = energy(data, n, u);
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        const FeFunction next = exact_step(kacanov, data, n, u);
        const double e_next = energy(data, n, next);
        const double decrease = e_prev - e_next;
        u = next;
        e_prev = e_next;
        if (decrease <= opt.tol_rel * std::max(1.0, std::abs(e_next))) break;
    }
    if (it == opt.max_iterations)
        throw std::runtime_error("oversolve: Kacanov iteration did not settle");

    if (opt.newton_polish) {
        // full Newton steps, bypassing the global damping window: near the
        // minimizer the full step is the right one, and the residual guard
        // rejects bad steps
        double res_norm = nonlinear_residual(data, n, u).norm();
        for (int k = 0; k < 5 && res_norm > 0.0; ++k) {
            FeFunction candidate = u;
            try {
                LinearizedSystem sys;
                const DofMap& dm = *u.dofs;
                const Mesh& mesh = *dm.mesh;
                std::vector<Mat2> w(mesh.num_triangles());
                for (int t = 0; t < mesh.num_triangles(); ++t)
                    w[t] = flux_jacobian(n, element_gradient(u, t));
                sys.matrix = assemble_weighted_stiffness(dm, w);
                sys.rhs = sys.matrix * u.coeffs + nonlinear_residual(data, n, u);
                sys.lin_point = u;
                candidate = direct_solve(sys);
            } catch (const std::exception&) {
                break;
            }
            const double cand_res = nonlinear_residual(data, n, candidate).norm();
            if (cand_res < res_norm) {
                u = candidate;
                res_norm = cand_res;
            } else {
                break;
            }
        }
    }
    return u;
}

}  // namespace ailfem
