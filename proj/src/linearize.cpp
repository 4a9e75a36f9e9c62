#include "ailfem/linearize.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ailfem {

namespace {

std::atomic<std::uint64_t> next_system_id{1};

}  // namespace

LinearizationMethod parse_method(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    double delta = 0.0;
    bool have_delta = false;
    if (colon != std::string::npos) {
        std::istringstream is(text.substr(colon + 1));
        if (!(is >> delta) || !(delta > 0.0))
            throw std::invalid_argument("method: bad damping in '" + text + "'");
        have_delta = true;
    }
    if (name == "kacanov") {
        if (have_delta)
            throw std::invalid_argument("method: kacanov takes no damping");
        return {LinearizationMethod::Kind::kacanov, 0.0};
    }
    if (name == "zarantonello") {
        if (!have_delta)
            throw std::invalid_argument("method: zarantonello:<delta> required");
        return {LinearizationMethod::Kind::zarantonello, delta};
    }
    if (name == "newton")
        return {LinearizationMethod::Kind::newton, have_delta ? delta : 0.0};
    throw std::invalid_argument("method: unknown '" + text + "'");
}

std::string to_string(const LinearizationMethod& method) {
    std::ostringstream os;
    switch (method.kind) {
        case LinearizationMethod::Kind::kacanov:
            os << "kacanov";
            break;
        case LinearizationMethod::Kind::zarantonello:
            os << "zarantonello:" << method.delta;
            break;
        case LinearizationMethod::Kind::newton:
            os << "newton:" << method.delta;
            break;
    }
    return os.str();
}

LinearizationMethod validated_method(LinearizationMethod method,
                                     const ScalarNonlinearity& n) {
    switch (method.kind) {
        case LinearizationMethod::Kind::kacanov:
            return method;
        case LinearizationMethod::Kind::zarantonello:
            if (!(method.delta > 0.0) || !(method.delta < 2.0 / n.lipschitz))
                throw std::invalid_argument(
                    "zarantonello: damping must lie in (0, 2/L)");
            return method;
        case LinearizationMethod::Kind::newton: {
            const auto bounds = sampled_jacobian_bounds(n);
            const double delta_max = 2.0 * bounds.lower / n.lipschitz;
            if (!(delta_max > 0.0))
                throw std::invalid_argument("newton: no admissible damping");
            if (method.delta == 0.0)
                method.delta = std::min(1.0, delta_max);
            if (!(method.delta > 0.0) || method.delta > delta_max + 1e-12)
                throw std::invalid_argument(
                    "newton: damping outside the admissible window");
            return method;
        }
    }
    throw std::logic_error("validated_method: unreachable");
}

LinearizedSystem build_system(const LinearizationMethod& method,
                              const ProblemData& data,
                              const ScalarNonlinearity& n,
                              const FeFunction& u_prev) {
    const LinearizationMethod m = validated_method(method, n);
    const DofMap& dofs = *u_prev.dofs;
    const Mesh& mesh = *dofs.mesh;
    const int nt = mesh.num_triangles();

    LinearizedSystem sys;
    sys.lin_point = u_prev;
    sys.id = next_system_id.fetch_add(1);
    double residual_scale = 1.0;

    switch (m.kind) {
        case LinearizationMethod::Kind::zarantonello: {
            const double w = 1.0 / m.delta;
            sys.matrix = assemble_weighted_stiffness(dofs, w);
            sys.weight_min = sys.weight_max = w;
            break;
        }
        case LinearizationMethod::Kind::kacanov: {
            std::vector<double> w(nt);
            sys.weight_min = std::numeric_limits<double>::max();
            sys.weight_max = 0.0;
            for (int t = 0; t < nt; ++t) {
                w[t] = n.mu(element_gradient(u_prev, t).squaredNorm());
                sys.weight_min = std::min(sys.weight_min, w[t]);
                sys.weight_max = std::max(sys.weight_max, w[t]);
            }
            if (nt == 0) sys.weight_min = sys.weight_max = 0.0;
            sys.matrix = assemble_weighted_stiffness(dofs, w);
            break;
        }
        case LinearizationMethod::Kind::newton: {
            std::vector<Mat2> w(nt);
            sys.weight_min = std::numeric_limits<double>::max();
            sys.weight_max = 0.0;
            for (int t = 0; t < nt; ++t) {
                w[t] = flux_jacobian(n, element_gradient(u_prev, t));
                const Eigen::SelfAdjointEigenSolver<Mat2> eig(w[t]);
                sys.weight_min = std::min(sys.weight_min, eig.eigenvalues()[0]);
                sys.weight_max = std::max(sys.weight_max, eig.eigenvalues()[1]);
            }
            if (nt == 0) sys.weight_min = sys.weight_max = 0.0;
            sys.matrix = assemble_weighted_stiffness(dofs, w);
            residual_scale = m.delta;
            break;
        }
    }

    sys.rhs = sys.matrix * u_prev.coeffs +
              residual_scale * nonlinear_residual(data, n, u_prev);
    return sys;
}

FeFunction exact_step(const LinearizationMethod& method,
                      const ProblemData& data, const ScalarNonlinearity& n,
                      const FeFunction& u_prev) {
    const LinearizedSystem sys = build_system(method, data, n, u_prev);
    if (sys.matrix.rows() == 0) return u_prev;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(sys.matrix);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("exact_step: factorization failed");
    return FeFunction{u_prev.dofs, solver.solve(sys.rhs)};
}

double coercivity_constant(const LinearizationMethod& method,
                           const ScalarNonlinearity& n) {
    const LinearizationMethod m = validated_method(method, n);
    switch (m.kind) {
        case LinearizationMethod::Kind::zarantonello:
            return 1.0 / m.delta - 0.5 * n.lipschitz;
        case LinearizationMethod::Kind::kacanov:
            return 0.5 * n.alpha;
        case LinearizationMethod::Kind::newton:
            return sampled_jacobian_bounds(n).lower / m.delta -
                   0.5 * n.lipschitz;
    }
    throw std::logic_error("coercivity_constant: unreachable");
}

}  // namespace ailfem
