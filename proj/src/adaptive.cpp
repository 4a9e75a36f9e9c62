#include "ailfem/adaptive.hpp"

#include "ailfem/oversolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ailfem {

void validate_params(const AdaptiveParams& p) {
    if (!(p.theta > 0.0) || !(p.theta <= 1.0))
        throw std::invalid_argument("params: theta must lie in (0, 1]");
    if (!(p.lambda_lin > 0.0))
        throw std::invalid_argument("params: lambda_lin must be positive");
    if (!(p.rho > 0.0) || !(p.rho < 1.0))
        throw std::invalid_argument("params: rho must lie in (0, 1)");
    if (!(p.alpha_min_init > 0.0))
        throw std::invalid_argument("params: alpha_min must be positive");
    if (p.j_max_init < 1)
        throw std::invalid_argument("params: j_max must be at least 1");
    if (!(p.tau >= 0.0))
        throw std::invalid_argument("params: tau must be nonnegative");
    if (!(p.c_mark >= 1.0))
        throw std::invalid_argument("params: c_mark must be at least 1");
    if (p.max_total_steps < 1)
        throw std::invalid_argument("params: step cap must be positive");
    if (!(p.eta_stop >= 0.0))
        throw std::invalid_argument("params: eta_stop must be nonnegative");
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::tolerance_met: return "tolerance-met";
        case Termination::step_cap: return "step-cap";
        case Termination::exact_hit: return "exact-hit";
    }
    return "unknown";
}

bool stop_overall(double eta, double norm_inc_lin, double norm_inc_alg,
                  double tau) {
    return eta + norm_inc_lin + norm_inc_alg <= tau;
}

bool stop_algebraic(double alpha_kj, double alpha_min, bool iterate_unchanged,
                    int j, int j_max) {
    return alpha_kj >= alpha_min || iterate_unchanged ||
           (alpha_kj > 0.0 && j > j_max);
}

bool stop_linearization(double dl2_inc, double lambda_lin, double eta) {
    return dl2_inc <= lambda_lin * eta * eta;
}

MarkedSet doerfler_mark(const IndicatorField& ind, double theta) {
    if (!(theta > 0.0) || !(theta <= 1.0))
        throw std::invalid_argument("doerfler_mark: theta must lie in (0, 1]");
    const int nt = static_cast<int>(ind.eta_sq.size());
    std::vector<int> order(nt);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return ind.eta_sq[a] > ind.eta_sq[b];
    });
    const double target = theta * ind.eta_sq.sum();
    std::vector<int> selected;
    long double cumulative = 0.0L;
    std::size_t pos = 0;
    for (; pos < order.size(); ++pos) {
        if (static_cast<double>(cumulative) >= target) break;
        if (!(ind.eta_sq[order[pos]] > 0.0)) break;  // zeros cannot help
        selected.push_back(order[pos]);
        cumulative += ind.eta_sq[order[pos]];
    }
    MarkedSet marked = MarkedSet::of(std::move(selected), *ind.mesh);
    // rounding guard: the marking property must hold as evaluated by
    // restricted(), whose summation order differs from the sorted prefix
    double have = restricted(ind, marked);
    have *= have;
    while (have < target && pos < order.size()) {
        const int t = order[pos++];
        if (!(ind.eta_sq[t] > 0.0)) break;
        marked.indices.push_back(t);
        std::sort(marked.indices.begin(), marked.indices.end());
        double now = restricted(ind, marked);
        now *= now;
        if (now <= have) break;  // no progress possible
        have = now;
    }
    return marked;
}

namespace {

struct LoopState {
    double alpha_min;
    int j_max;
    long long cum_cost = 0;
    long total_steps = 0;
};

// tiny round-off negatives are treated as zero; genuinely negative energy
// increments at accepted steps indicate a defect
double clamp_dl2(double dl2, double energy_scale, bool abort_on_defect) {
    const double slack = 1e-12 * std::max(1.0, std::abs(energy_scale));
    if (dl2 >= 0.0) return dl2;
    if (dl2 >= -slack) return 0.0;
    if (abort_on_defect)
        throw std::runtime_error(
            "adaptive: negative energy increment at an accepted step "
            "(dl2 = " + std::to_string(dl2) + ")");
    return dl2;
}

bool iterates_equal(const FeFunction& a, const FeFunction& b) {
    // |a - b| <= 2^-48 max(1, |a|) stands in for exact equality
    const double eps = std::ldexp(1.0, -48);
    const double diff = energy_norm_difference(a, b);
    return diff <= eps * std::max(1.0, energy_norm(a));
}

}  // namespace

std::vector<std::size_t> RunHistory::level_final_records() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (i + 1 == records.size() || records[i + 1].ell != records[i].ell)
            out.push_back(i);
    }
    return out;
}

RunHistory run_adaptive(const Problem& problem, const AdaptiveParams& params) {
    validate_params(params);
    const LinearizationMethod method =
        validated_method(params.method, problem.nonlinearity);
    const auto t_start = std::chrono::steady_clock::now();

    RunHistory history;
    history.method = method;
    history.hierarchy = std::make_shared<MultilevelHierarchy>();
    history.weight_min = std::numeric_limits<double>::max();
    history.weight_max = 0.0;

    auto mesh = std::make_shared<const Mesh>(problem.initial_mesh);
    auto dofs = make_dof_map(mesh);
    history.hierarchy->push_level(mesh, dofs);

    const ProblemData& data = problem.data;
    const ScalarNonlinearity& n = problem.nonlinearity;
    const bool with_exact = params.record_exact_error && data.has_exact();

    FeFunction u = zero_function(dofs);  // u_0^{0,0}
    LoopState state{params.alpha_min_init, params.j_max_init};

    auto retain_accepted = [&](int ell, int k, const FeFunction& v) {
        if (params.retention != Retention::none)
            history.accepted.push_back({ell, k, 0, v});
    };

    for (int ell = 0;; ++ell) {
        FeFunction u_accept = u;  // u_ell^{0,jbar} by nested iteration
        retain_accepted(ell, 0, u_accept);
        IndicatorField ind_accept;
        double eta_accept = 0.0;

        for (int k = 1;; ++k) {
            const FeFunction u_lin = u_accept;  // u_ell^{k-1,jbar}
            const LinearizedSystem sys = build_system(method, data, n, u_lin);
            history.weight_min = std::min(history.weight_min, sys.weight_min);
            history.weight_max = std::max(history.weight_max, sys.weight_max);
            MultigridWorkspace ws = prepare_multigrid(*history.hierarchy, sys);

            FeFunction reference;  // direct solution, measured mode only
            if (params.measure_contraction && dofs->num_dofs > 0)
                reference = direct_solve(sys);

            const double energy_lin = energy(data, n, u_lin);
            FeFunction ukj = u_lin;  // u_ell^{k,0}
            double eta = 0.0, dl2 = 0.0;
            IndicatorField ind;
            int j = 0;
            bool terminate = false;

            for (;;) {
                ++j;
                ++state.total_steps;
                const FeFunction prev = ukj;
                ukj = one_step(*history.hierarchy, ws, sys, prev);
                if (params.measure_contraction && dofs->num_dofs > 0) {
                    auto a_norm = [&sys](const Eigen::VectorXd& v) {
                        return std::sqrt(v.dot(sys.matrix * v));
                    };
                    const double err_prev =
                        a_norm(reference.coeffs - prev.coeffs);
                    const double err_new =
                        a_norm(reference.coeffs - ukj.coeffs);
                    // errors at the round-off floor carry no contraction
                    // information
                    const double floor =
                        1e-10 * std::max(1.0, a_norm(reference.coeffs));
                    if (err_prev > floor)
                        history.solver_stats.record(err_prev, err_new);
                }

                ind = indicators(data, n, ukj);
                eta = total(ind);
                const double inc_lin = energy_norm_difference(ukj, u_lin);
                const double inc_alg = energy_norm_difference(ukj, prev);
                const double energy_cur = energy(data, n, ukj);
                dl2 = energy_lin - energy_cur;
                const bool unchanged = iterates_equal(ukj, u_lin);
                const double alpha_kj =
                    unchanged ? 0.0
                              : clamp_dl2(dl2, energy_cur, false) /
                                    (inc_lin * inc_lin);

                state.cum_cost += mesh->num_triangles();
                history.records.push_back(
                    {ell, k, j, dofs->num_dofs, eta, inc_lin, inc_alg, dl2,
                     alpha_kj, state.alpha_min, state.j_max, energy_cur,
                     state.cum_cost, std::nullopt});
                if (params.retention == Retention::all)
                    history.iterates.push_back({ell, k, j, ukj});
                if (!std::isfinite(eta) || !std::isfinite(energy_cur))
                    throw std::runtime_error(
                        "adaptive: non-finite estimator or energy");

                if (stop_overall(eta, inc_lin, inc_alg, params.tau)) {
                    history.termination = params.tau > 0.0
                                              ? Termination::tolerance_met
                                              : Termination::exact_hit;
                    terminate = true;
                    break;
                }
                if (state.total_steps >= params.max_total_steps) {
                    history.termination = Termination::step_cap;
                    terminate = true;
                    break;
                }
                if (stop_algebraic(alpha_kj, state.alpha_min, unchanged, j,
                                   state.j_max))
                    break;
            }

            if (terminate) {
                history.final_ell = ell;
                history.final_k = k;
                history.final_j = j;
                retain_accepted(ell, k, ukj);
                const auto t_end = std::chrono::steady_clock::now();
                history.wall_seconds =
                    std::chrono::duration<double>(t_end - t_start).count();
                return history;
            }

            if (j > state.j_max) {
                state.j_max = j;
                state.alpha_min *= params.rho;
            }
            retain_accepted(ell, k, ukj);

            // accepted step: the energy increment is nonnegative up to
            // round-off, anything worse is a defect
            const double dl2_accepted = clamp_dl2(
                dl2, history.records.back().energy, true);
            if (with_exact) {
                history.records.back().exact_error = exact_error(data, ukj);
            }
            u_accept = ukj;
            ind_accept = ind;
            eta_accept = eta;

            if (stop_linearization(dl2_accepted, params.lambda_lin, eta)) {
                history.final_ell = ell;
                history.final_k = k;
                history.final_j = j;
                break;
            }
        }

        if (params.eta_stop > 0.0 && eta_accept < params.eta_stop) {
            history.termination = Termination::tolerance_met;
            break;
        }

        const MarkedSet marked = doerfler_mark(ind_accept, params.theta);
        history.marked_counts.push_back(static_cast<long>(marked.size()));
        mesh = std::make_shared<const Mesh>(refine(*mesh, marked));
        dofs = make_dof_map(mesh);
        history.hierarchy->push_level(mesh, dofs);
        u = prolongate(u_accept, dofs);  // nested iteration transfer
    }

    const auto t_end = std::chrono::steady_clock::now();
    history.wall_seconds =
        std::chrono::duration<double>(t_end - t_start).count();
    return history;
}

RateSummary rates(const RunHistory& history, double cutoff_fraction) {
    const auto finals = history.level_final_records();
    if (finals.size() < 2)
        throw std::invalid_argument("rates: at least two mesh levels required");
    const std::size_t skip = static_cast<std::size_t>(
        std::floor(cutoff_fraction * static_cast<double>(finals.size())));
    if (finals.size() - skip < 2)
        throw std::invalid_argument("rates: not enough post-cutoff levels");

    auto slope = [&](auto x_of) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (std::size_t i = skip; i < finals.size(); ++i) {
            const StepRecord& r = history.records[finals[i]];
            if (!(r.eta > 0.0)) continue;
            const double x = std::log(x_of(r));
            const double y = std::log(r.eta);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++m;
        }
        if (m < 2) throw std::invalid_argument("rates: not enough data points");
        return (m * sxy - sx * sy) / (m * sxx - sx * sx);
    };

    RateSummary s;
    s.slope_dofs = slope([](const StepRecord& r) {
        return static_cast<double>(std::max(1, r.dofs));
    });
    s.slope_cost = slope([](const StepRecord& r) {
        return static_cast<double>(r.cum_cost);
    });
    s.levels_used = static_cast<int>(finals.size() - skip);
    return s;
}

std::vector<double> quasi_error(const RunHistory& history,
                                const Problem& problem) {
    if (history.iterates.size() != history.records.size())
        throw std::invalid_argument(
            "quasi_error: run was not made with retention == all");
    const ProblemData& data = problem.data;
    const ScalarNonlinearity& n = problem.nonlinearity;

    std::vector<double> h(history.records.size());
    int cached_level = -1;
    FeFunction u_star;  // over-solved per level
    int cached_sys_ell = -1, cached_sys_k = -1;
    FeFunction uk_star;  // exact solution of the (ell,k) system

    // accepted iterates indexed by (ell,k) for rebuilding the systems
    auto accepted_at = [&](int ell, int k) -> const FeFunction& {
        for (const auto& a : history.accepted)
            if (a.ell == ell && a.k == k) return a.u;
        throw std::logic_error("quasi_error: accepted iterate missing");
    };

    for (std::size_t i = 0; i < history.records.size(); ++i) {
        const StepRecord& r = history.records[i];
        const FeFunction& ukj = history.iterates[i].u;
        if (r.ell != cached_level) {
            OversolveOptions opt;
            const FeFunction& seed = accepted_at(r.ell, 0);
            opt.seed = &seed;
            u_star = oversolve(data, n, ukj.dofs, opt);
            cached_level = r.ell;
        }
        if (r.ell != cached_sys_ell || r.k != cached_sys_k) {
            const FeFunction& lin_point = accepted_at(r.ell, r.k - 1);
            const LinearizedSystem sys =
                build_system(history.method, data, n, lin_point);
            uk_star = direct_solve(sys);
            cached_sys_ell = r.ell;
            cached_sys_k = r.k;
        }
        h[i] = energy_norm_difference(u_star, ukj) +
               energy_norm_difference(uk_star, ukj) + r.eta;
    }
    return h;
}

EnvelopeFit fit_r_linear(const std::vector<double>& h) {
    std::vector<std::size_t> positive;
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h[i] > 0.0) positive.push_back(i);
    if (positive.size() < 2)
        throw std::invalid_argument("fit_r_linear: not enough positive values");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto i : positive) {
        const double x = static_cast<double>(i);
        const double y = std::log(h[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(positive.size());
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    EnvelopeFit fit;
    fit.q = std::exp(slope);
    fit.c = 0.0;
    for (const auto i : positive)
        for (const auto i0 : positive) {
            if (i0 >= i) continue;
            const double bound =
                h[i] / (h[i0] * std::pow(fit.q, static_cast<double>(i - i0)));
            fit.c = std::max(fit.c, bound);
        }
    return fit;
}

void write_history_csv(std::ostream& out, const RunHistory& history) {
    bool with_exact = false;
    for (const auto& r : history.records)
        if (r.exact_error) with_exact = true;

    out << "ell,k,j,dofs,eta,norm_inc_lin,norm_inc_alg,dl2_inc,alpha_kj,"
           "alpha_min,J_max,energy,cum_cost";
    if (with_exact) out << ",exact_error";
    out << "\n";
    out << std::setprecision(17);
    for (const auto& r : history.records) {
        out << r.ell << "," << r.k << "," << r.j << "," << r.dofs << ","
            << r.eta << "," << r.norm_inc_lin << "," << r.norm_inc_alg << ","
            << r.dl2_inc << "," << r.alpha_kj << "," << r.alpha_min << ","
            << r.j_max << "," << r.energy << "," << r.cum_cost;
        if (with_exact) {
            out << ",";
            if (r.exact_error) out << *r.exact_error;
        }
        out << "\n";
    }
}

std::string history_csv(const RunHistory& history) {
    std::ostringstream os;
    write_history_csv(os, history);
    return os.str();
}

}  // namespace ailfem
