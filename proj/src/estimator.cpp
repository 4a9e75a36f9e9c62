#include "ailfem/estimator.hpp"

#include "ailfem/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace ailfem {

IndicatorField indicators(const ProblemData& data, const ScalarNonlinearity& n,
                          const FeFunction& u) {
    const DofMap& dofs = *u.dofs;
    const Mesh& mesh = *dofs.mesh;
    const int nt = mesh.num_triangles();
    const auto& rule = tri_quadrature_order5();

    // P0 data projections and elementwise flux residual A(grad u) - f_vec
    std::vector<double> f_mean(nt, 0.0);
    std::vector<Vec2> flux_res(nt);
    for (int t = 0; t < nt; ++t) {
        const auto& tv = mesh.triangles[t].v;
        const Vec2 p0 = mesh.vertices[tv[0]];
        const Vec2 p1 = mesh.vertices[tv[1]];
        const Vec2 p2 = mesh.vertices[tv[2]];
        double fm = 0.0;
        Vec2 fvm = Vec2::Zero();
        if (data.f || data.f_vec) {
            for (const auto& q : rule) {
                const Vec2 x = q.l0 * p0 + q.l1 * p1 + q.l2 * p2;
                if (data.f) fm += q.w * data.f(x);
                if (data.f_vec) fvm += q.w * data.f_vec(x);
            }
        }
        f_mean[t] = fm;
        flux_res[t] = flux(n, element_gradient(u, t)) - fvm;
    }

    IndicatorField ind{Eigen::VectorXd::Zero(nt), dofs.mesh};
    for (int t = 0; t < nt; ++t) {
        const double area = mesh.area(t);
        ind.eta_sq[t] = area * area * f_mean[t] * f_mean[t];
    }

    const auto neighbors = triangle_neighbors(mesh);
    for (int t = 0; t < nt; ++t) {
        const double wt = std::sqrt(mesh.area(t));
        for (int e = 0; e < 3; ++e) {
            const int s = neighbors[t][e];
            if (s < 0) continue;  // boundary edge: no jump contribution
            const auto ev = mesh.edge(t, e);
            const Vec2 d = mesh.vertices[ev[1]] - mesh.vertices[ev[0]];
            const double len = d.norm();
            const Vec2 normal = Vec2(d.y(), -d.x()) / len;
            const double jump = (flux_res[t] - flux_res[s]).dot(normal);
            ind.eta_sq[t] += wt * jump * jump * len;
        }
    }
    return ind;
}

double total(const IndicatorField& ind) {
    return std::sqrt(ind.eta_sq.sum());
}

double restricted(const IndicatorField& ind, const MarkedSet& subset) {
    double sum = 0.0;
    for (const int t : subset.indices) {
        if (t < 0 || t >= ind.eta_sq.size())
            throw std::out_of_range("restricted: triangle index out of range");
        sum += ind.eta_sq[t];
    }
    return std::sqrt(sum);
}

}  // namespace ailfem
