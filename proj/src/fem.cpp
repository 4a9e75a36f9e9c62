#include "ailfem/fem.hpp"

#include "ailfem/quadrature.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <stdexcept>

namespace ailfem {

DofMap DofMap::build(std::shared_ptr<const Mesh> mesh) {
    DofMap dm;
    dm.mesh = std::move(mesh);
    const auto boundary = boundary_vertex_mask(*dm.mesh);
    dm.vertex_to_dof.assign(dm.mesh->num_vertices(), -1);
    for (int v = 0; v < dm.mesh->num_vertices(); ++v) {
        if (!boundary[v]) {
            dm.vertex_to_dof[v] = dm.num_dofs++;
            dm.dof_to_vertex.push_back(v);
        }
    }
    return dm;
}

std::shared_ptr<const DofMap> make_dof_map(std::shared_ptr<const Mesh> mesh) {
    return std::make_shared<const DofMap>(DofMap::build(std::move(mesh)));
}

FeFunction zero_function(std::shared_ptr<const DofMap> dofs) {
    const int n = dofs->num_dofs;
    return FeFunction{std::move(dofs), Eigen::VectorXd::Zero(n)};
}

std::array<Vec2, 3> hat_gradients(const Mesh& mesh, int t) {
    const auto& tv = mesh.triangles[t].v;
    const double inv2a = 1.0 / (2.0 * mesh.signed_area(t));
    std::array<Vec2, 3> grads;
    for (int i = 0; i < 3; ++i) {
        const Vec2 d = mesh.vertices[tv[(i + 1) % 3]] -
                       mesh.vertices[tv[(i + 2) % 3]];
        grads[i] = Vec2(d.y(), -d.x()) * inv2a;
    }
    return grads;
}

Vec2 element_gradient(const FeFunction& u, int t) {
    const Mesh& mesh = *u.dofs->mesh;
    const auto grads = hat_gradients(mesh, t);
    Vec2 g = Vec2::Zero();
    for (int i = 0; i < 3; ++i) {
        const int dof = u.dofs->vertex_to_dof[mesh.triangles[t].v[i]];
        if (dof >= 0) g += u.coeffs[dof] * grads[i];
    }
    return g;
}

namespace {

template <class WeightAt>
Eigen::SparseMatrix<double> assemble_stiffness_impl(const DofMap& dofs,
                                                    const WeightAt& weight_at) {
    const Mesh& mesh = *dofs.mesh;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.triangles.size() * 9);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto grads = hat_gradients(mesh, t);
        const Mat2 w = weight_at(t);
        const double area = mesh.area(t);
        for (int i = 0; i < 3; ++i) {
            const int di = dofs.vertex_to_dof[mesh.triangles[t].v[i]];
            if (di < 0) continue;
            for (int j = 0; j < 3; ++j) {
                const int dj = dofs.vertex_to_dof[mesh.triangles[t].v[j]];
                if (dj < 0) continue;
                triplets.emplace_back(di, dj,
                                      grads[i].dot(w * grads[j]) * area);
            }
        }
    }
    Eigen::SparseMatrix<double> a(dofs.num_dofs, dofs.num_dofs);
    a.setFromTriplets(triplets.begin(), triplets.end());
    return a;
}

void require_spd_weight(const Mat2& w) {
    if (std::abs(w(0, 1) - w(1, 0)) >
        1e-12 * std::max(1.0, w.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("stiffness weight must be symmetric");
    if (!(w.trace() > 0.0) || !(w.determinant() > 0.0))
        throw std::invalid_argument("stiffness weight must be positive definite");
}

}  // namespace

Eigen::SparseMatrix<double> assemble_weighted_stiffness(
    const DofMap& dofs, std::span<const double> weights) {
    if (static_cast<int>(weights.size()) != dofs.mesh->num_triangles())
        throw std::invalid_argument("stiffness: one weight per triangle required");
    for (const double w : weights)
        if (!(w > 0.0))
            throw std::invalid_argument("stiffness weight must be positive");
    return assemble_stiffness_impl(dofs, [&](int t) {
        return Mat2(weights[t] * Mat2::Identity());
    });
}

Eigen::SparseMatrix<double> assemble_weighted_stiffness(
    const DofMap& dofs, std::span<const Mat2> weights) {
    if (static_cast<int>(weights.size()) != dofs.mesh->num_triangles())
        throw std::invalid_argument("stiffness: one weight per triangle required");
    for (const auto& w : weights) require_spd_weight(w);
    return assemble_stiffness_impl(dofs, [&](int t) { return weights[t]; });
}

Eigen::SparseMatrix<double> assemble_weighted_stiffness(const DofMap& dofs,
                                                        double weight) {
    if (!(weight > 0.0))
        throw std::invalid_argument("stiffness weight must be positive");
    return assemble_stiffness_impl(
        dofs, [&](int) { return Mat2(weight * Mat2::Identity()); });
}

Eigen::VectorXd assemble_load(const DofMap& dofs, const ProblemData& data) {
    const Mesh& mesh = *dofs.mesh;
    Eigen::VectorXd load = Eigen::VectorXd::Zero(dofs.num_dofs);
    if (!data.f && !data.f_vec) return load;
    const auto& rule = tri_quadrature_order5();
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tv = mesh.triangles[t].v;
        const Vec2 p0 = mesh.vertices[tv[0]];
        const Vec2 p1 = mesh.vertices[tv[1]];
        const Vec2 p2 = mesh.vertices[tv[2]];
        const double area = mesh.area(t);
        const auto grads = hat_gradients(mesh, t);
        std::array<double, 3> local = {0.0, 0.0, 0.0};
        for (const auto& q : rule) {
            const Vec2 x = q.l0 * p0 + q.l1 * p1 + q.l2 * p2;
            if (data.f) {
                const double fx = data.f(x);
                const double lam[3] = {q.l0, q.l1, q.l2};
                for (int i = 0; i < 3; ++i)
                    local[i] += q.w * area * fx * lam[i];
            }
            if (data.f_vec) {
                const Vec2 fv = data.f_vec(x);
                for (int i = 0; i < 3; ++i)
                    local[i] += q.w * area * fv.dot(grads[i]);
            }
        }
        for (int i = 0; i < 3; ++i) {
            if (!std::isfinite(local[i]))
                throw std::runtime_error("assemble_load: non-finite data value");
            const int dof = dofs.vertex_to_dof[tv[i]];
            if (dof >= 0) load[dof] += local[i];
        }
    }
    return load;
}

Eigen::VectorXd nonlinear_residual(const ProblemData& data,
                                   const ScalarNonlinearity& n,
                                   const FeFunction& u) {
    const DofMap& dofs = *u.dofs;
    const Mesh& mesh = *dofs.mesh;
    Eigen::VectorXd res = assemble_load(dofs, data);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Vec2 fl = flux(n, element_gradient(u, t));
        const auto grads = hat_gradients(mesh, t);
        const double area = mesh.area(t);
        for (int i = 0; i < 3; ++i) {
            const int dof = dofs.vertex_to_dof[mesh.triangles[t].v[i]];
            if (dof >= 0) res[dof] -= fl.dot(grads[i]) * area;
        }
    }
    return res;
}

double energy(const ProblemData& data, const ScalarNonlinearity& n,
              const FeFunction& u) {
    const DofMap& dofs = *u.dofs;
    const Mesh& mesh = *dofs.mesh;
    double pot = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        pot += mesh.area(t) * energy_density(n, element_gradient(u, t));
    const Eigen::VectorXd load = assemble_load(dofs, data);
    return pot - load.dot(u.coeffs);
}

double energy_difference(const ProblemData& data, const ScalarNonlinearity& n,
                         const FeFunction& v, const FeFunction& w) {
    if (v.dofs.get() != w.dofs.get())
        throw std::invalid_argument("energy_difference: dof maps differ");
    return energy(data, n, w) - energy(data, n, v);
}

double energy_norm(const FeFunction& u) {
    const Mesh& mesh = *u.dofs->mesh;
    double sum = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        sum += element_gradient(u, t).squaredNorm() * mesh.area(t);
    return std::sqrt(sum);
}

double energy_norm_difference(const FeFunction& u, const FeFunction& v) {
    if (u.dofs.get() != v.dofs.get())
        throw std::invalid_argument("energy_norm_difference: dof maps differ");
    FeFunction d{u.dofs, u.coeffs - v.coeffs};
    return energy_norm(d);
}

FeFunction interpolate(std::shared_ptr<const DofMap> dofs,
                       const std::function<double(const Vec2&)>& g) {
    FeFunction u = zero_function(dofs);
    for (int d = 0; d < dofs->num_dofs; ++d) {
        const double value = g(dofs->mesh->vertices[dofs->dof_to_vertex[d]]);
        if (!std::isfinite(value))
            throw std::invalid_argument("interpolate: non-finite vertex value");
        u.coeffs[d] = value;
    }
    return u;
}

double exact_error(const ProblemData& data, const FeFunction& u) {
    if (!data.exact_gradient)
        throw std::invalid_argument("exact_error: exact gradient unavailable");
    const Mesh& mesh = *u.dofs->mesh;
    const auto& rule = tri_quadrature_order5();
    double sum = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tv = mesh.triangles[t].v;
        const Vec2 p0 = mesh.vertices[tv[0]];
        const Vec2 p1 = mesh.vertices[tv[1]];
        const Vec2 p2 = mesh.vertices[tv[2]];
        const Vec2 gh = element_gradient(u, t);
        const double area = mesh.area(t);
        for (const auto& q : rule) {
            const Vec2 x = q.l0 * p0 + q.l1 * p1 + q.l2 * p2;
            sum += q.w * area * (data.exact_gradient(x) - gh).squaredNorm();
        }
    }
    return std::sqrt(sum);
}

FeFunction prolongate(const FeFunction& coarse,
                      std::shared_ptr<const DofMap> fine) {
    const DofMap& cd = *coarse.dofs;
    const DofMap& fd = *fine;
    const int n_coarse_vertices = cd.mesh->num_vertices();
    if (fd.mesh->num_vertices() < n_coarse_vertices)
        throw std::invalid_argument(
            "prolongate: fine mesh is not a refinement of the coarse one");
    // vertices are appended in creation order, so new-vertex origins always
    // point at already-computed values; this also covers several refinement
    // generations at once
    std::vector<double> values(fd.mesh->num_vertices(), 0.0);
    for (int v = 0; v < n_coarse_vertices; ++v) {
        const int dof = cd.vertex_to_dof[v];
        values[v] = dof >= 0 ? coarse.coeffs[dof] : 0.0;
    }
    for (int v = n_coarse_vertices; v < fd.mesh->num_vertices(); ++v) {
        const auto origin = fd.mesh->vertex_origins[v];
        if (origin.a < 0 || origin.a >= v || origin.b >= v)
            throw std::invalid_argument(
                "prolongate: fine mesh is not a refinement of the coarse one");
        values[v] = 0.5 * (values[origin.a] + values[origin.b]);
    }
    FeFunction out = zero_function(std::move(fine));
    for (int d = 0; d < fd.num_dofs; ++d)
        out.coeffs[d] = values[fd.dof_to_vertex[d]];
    return out;
}

}  // namespace ailfem
