#include "ailfem/algsolver.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace ailfem {

void MultilevelHierarchy::push_level(std::shared_ptr<const Mesh> mesh,
                                     std::shared_ptr<const DofMap> dofs) {
    HierarchyLevel level;
    level.mesh = std::move(mesh);
    level.dofs = std::move(dofs);

    if (levels.empty()) {
        level.smoothing_dofs.resize(level.dofs->num_dofs);
        for (int d = 0; d < level.dofs->num_dofs; ++d)
            level.smoothing_dofs[d] = d;
        levels.push_back(std::move(level));
        return;
    }

    const HierarchyLevel& prev = levels.back();
    const Mesh& fine = *level.mesh;
    const int n_prev_vertices = prev.mesh->num_vertices();
    if (fine.num_vertices() < n_prev_vertices)
        throw std::invalid_argument("hierarchy: level is not a refinement");

    // prolongation: carried vertices keep their value, new vertices average
    // the endpoints of the edge they bisected
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(level.dofs->num_dofs * 2);
    for (int d = 0; d < level.dofs->num_dofs; ++d) {
        const int v = level.dofs->dof_to_vertex[d];
        if (v < n_prev_vertices) {
            const int cd = prev.dofs->vertex_to_dof[v];
            if (cd >= 0) triplets.emplace_back(d, cd, 1.0);
        } else {
            const auto origin = fine.vertex_origins[v];
            if (origin.a < 0 || origin.a >= n_prev_vertices ||
                origin.b >= n_prev_vertices)
                throw std::invalid_argument(
                    "hierarchy: vertex origin outside the previous level");
            for (const int parent : {origin.a, origin.b}) {
                const int cd = prev.dofs->vertex_to_dof[parent];
                if (cd >= 0) triplets.emplace_back(d, cd, 0.5);
            }
        }
    }
    level.prolongation.resize(level.dofs->num_dofs, prev.dofs->num_dofs);
    level.prolongation.setFromTriplets(triplets.begin(), triplets.end());

    // smoothing set: new vertices and their edge neighbors, interior only
    std::vector<char> in_set(fine.num_vertices(), 0);
    for (int v = n_prev_vertices; v < fine.num_vertices(); ++v) in_set[v] = 1;
    for (const auto& tri : fine.triangles) {
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                if (i != j && tri.v[j] >= n_prev_vertices) in_set[tri.v[i]] = 1;
            }
        }
    }
    for (int v = 0; v < fine.num_vertices(); ++v) {
        const int d = level.dofs->vertex_to_dof[v];
        if (in_set[v] && d >= 0) level.smoothing_dofs.push_back(d);
    }
    levels.push_back(std::move(level));
}

MultilevelHierarchy MultilevelHierarchy::from_meshes(
    const std::vector<std::shared_ptr<const Mesh>>& meshes) {
    MultilevelHierarchy hier;
    for (const auto& mesh : meshes) hier.push_level(mesh, make_dof_map(mesh));
    return hier;
}

MultigridWorkspace prepare_multigrid(const MultilevelHierarchy& hier,
                                     const LinearizedSystem& sys) {
    const int depth = hier.depth();
    if (depth == 0) throw std::invalid_argument("multigrid: empty hierarchy");
    if (sys.matrix.rows() != hier.levels.back().dofs->num_dofs)
        throw std::invalid_argument("multigrid: system does not match hierarchy");

    MultigridWorkspace ws;
    ws.system_id = sys.id;
    ws.level_matrix.resize(depth);
    ws.level_diag.resize(depth);
    ws.level_matrix[depth - 1] = sys.matrix;
    for (int l = depth - 1; l > 0; --l) {
        const auto& p = hier.levels[l].prolongation;
        ws.level_matrix[l - 1] =
            p.transpose() * ws.level_matrix[l] * p;
    }
    for (int l = 0; l < depth; ++l)
        ws.level_diag[l] = ws.level_matrix[l].diagonal();
    if (ws.level_matrix[0].rows() > 0) {
        ws.coarse_factor = std::make_unique<
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(
            ws.level_matrix[0]);
        if (ws.coarse_factor->info() != Eigen::Success)
            throw std::runtime_error("multigrid: coarse factorization failed");
    }
    return ws;
}

namespace {

// in-place Gauss-Seidel sweep on the given dofs; forward or backward
void local_gs_sweep(const Eigen::SparseMatrix<double>& a,
                    const Eigen::VectorXd& diag, const Eigen::VectorXd& r,
                    const std::vector<int>& dofs, bool forward,
                    Eigen::VectorXd& e) {
    auto update = [&](int i) {
        double ae = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, i); it; ++it)
            ae += it.value() * e[it.row()];
        e[i] += (r[i] - ae) / diag[i];
    };
    if (forward) {
        for (auto it = dofs.begin(); it != dofs.end(); ++it) update(*it);
    } else {
        for (auto it = dofs.rbegin(); it != dofs.rend(); ++it) update(*it);
    }
}

Eigen::VectorXd vcycle(const MultilevelHierarchy& hier,
                       const MultigridWorkspace& ws, int l,
                       const Eigen::VectorXd& r) {
    if (l == 0) {
        if (r.size() == 0) return r;
        return ws.coarse_factor->solve(r);
    }
    const auto& a = ws.level_matrix[l];
    const auto& smoothing = hier.levels[l].smoothing_dofs;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(r.size());
    local_gs_sweep(a, ws.level_diag[l], r, smoothing, true, e);
    const auto& p = hier.levels[l].prolongation;
    const Eigen::VectorXd coarse_r = p.transpose() * (r - a * e);
    e += p * vcycle(hier, ws, l - 1, coarse_r);
    local_gs_sweep(a, ws.level_diag[l], r, smoothing, false, e);
    return e;
}

}  // namespace

FeFunction one_step(const MultilevelHierarchy& hier,
                    MultigridWorkspace& workspace, const LinearizedSystem& sys,
                    const FeFunction& iterate) {
    if (workspace.system_id != sys.id)
        workspace = prepare_multigrid(hier, sys);
    if (iterate.coeffs.size() != sys.matrix.rows())
        throw std::invalid_argument("one_step: iterate dimension mismatch");
    if (sys.matrix.rows() == 0) return iterate;
    const Eigen::VectorXd residual = sys.rhs - sys.matrix * iterate.coeffs;
    const Eigen::VectorXd correction =
        vcycle(hier, workspace, hier.depth() - 1, residual);
    return FeFunction{iterate.dofs, iterate.coeffs + correction};
}

FeFunction one_step(const MultilevelHierarchy& hier,
                    const LinearizedSystem& sys, const FeFunction& iterate) {
    MultigridWorkspace ws = prepare_multigrid(hier, sys);
    return one_step(hier, ws, sys, iterate);
}

FeFunction direct_solve(const LinearizedSystem& sys) {
    if (sys.matrix.rows() == 0) return sys.lin_point;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(sys.matrix);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("direct_solve: factorization failed");
    Eigen::VectorXd x = solver.solve(sys.rhs);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("direct_solve: solve failed");
    return FeFunction{sys.lin_point.dofs, std::move(x)};
}

double estimate_contraction(const SolverStats& stats) {
    if (stats.ratios.empty())
        throw std::invalid_argument("estimate_contraction: no recorded ratios");
    return *std::max_element(stats.ratios.begin(), stats.ratios.end());
}

}  // namespace ailfem
