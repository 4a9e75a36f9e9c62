#pragma once

#include "ailfem/fem.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <vector>

namespace ailfem {

// One mesh level of the refinement hierarchy: prolongation from the previous
// level and the set of dofs smoothed on this level (vertices created by the
// refinement step plus their edge neighbors; every dof on level 0).
struct HierarchyLevel {
    std::shared_ptr<const Mesh> mesh;
    std::shared_ptr<const DofMap> dofs;
    Eigen::SparseMatrix<double> prolongation;  // empty on level 0
    std::vector<int> smoothing_dofs;
};

// Ordered mesh levels from the initial mesh to the current one. Append-only.
struct MultilevelHierarchy {
    std::vector<HierarchyLevel> levels;

    void push_level(std::shared_ptr<const Mesh> mesh,
                    std::shared_ptr<const DofMap> dofs);
    int depth() const { return static_cast<int>(levels.size()); }

    static MultilevelHierarchy from_meshes(
        const std::vector<std::shared_ptr<const Mesh>>& meshes);
};

// Per-system state of the multigrid step: Galerkin coarse-level matrices of
// the system matrix and the factorized level-0 block. Rebuilt whenever the
// system changes; the hierarchy itself is reused.
struct MultigridWorkspace {
    std::uint64_t system_id = 0;
    std::vector<Eigen::SparseMatrix<double>> level_matrix;
    std::vector<Eigen::VectorXd> level_diag;
    std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>
        coarse_factor;
};

MultigridWorkspace prepare_multigrid(const MultilevelHierarchy& hier,
                                     const LinearizedSystem& sys);

// One multiplicative V-cycle with one forward local Gauss-Seidel sweep before
// and one backward sweep after the coarse correction, exact solve on level 0.
// The error contracts in the a-norm of sys.matrix.
FeFunction one_step(const MultilevelHierarchy& hier,
                    MultigridWorkspace& workspace, const LinearizedSystem& sys,
                    const FeFunction& iterate);

// Convenience overload preparing a fresh workspace per call.
FeFunction one_step(const MultilevelHierarchy& hier,
                    const LinearizedSystem& sys, const FeFunction& iterate);

// Reference direct solve (LDLT factorization).
FeFunction direct_solve(const LinearizedSystem& sys);

// Measured per-step a-norm error ratios.
struct SolverStats {
    std::vector<double> ratios;

    void record(double previous_error, double new_error) {
        if (previous_error > 0.0) ratios.push_back(new_error / previous_error);
    }
};

// Maximum observed contraction ratio; throws on empty stats.
double estimate_contraction(const SolverStats& stats);

}  // namespace ailfem
