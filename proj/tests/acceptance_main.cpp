// Acceptance suite: end-to-end checks of the benchmark behavior, one
// pass/fail line per criterion. Exits nonzero if any criterion fails.

#include "ailfem/adaptive.hpp"
#include "ailfem/oversolve.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <vector>

using namespace ailfem;

namespace {

int failures = 0;

void report(int criterion, bool passed, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s\n", passed ? "PASS" : "FAIL", criterion,
                detail.c_str());
    std::fflush(stdout);
    if (!passed) ++failures;
}

double seconds_since(
    const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
}

FeFunction random_function(std::shared_ptr<const DofMap> dofs,
                           std::mt19937& rng, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    FeFunction u = zero_function(std::move(dofs));
    for (int i = 0; i < u.coeffs.size(); ++i) u.coeffs[i] = dist(rng);
    return u;
}

std::shared_ptr<const Mesh> refined(const std::string& domain, int rounds) {
    Mesh mesh = make_domain(domain);
    for (int i = 0; i < rounds; ++i) mesh = uniform_refine(mesh);
    return std::make_shared<const Mesh>(std::move(mesh));
}

// ---------------------------------------------------------------- criterion 1
void criterion_1() {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    std::ostringstream note;
    std::mt19937 rng(101);
    for (const char* name : {"lshape", "zshape"}) {
        const Problem prob = make_problem(name);
        const auto mesh = refined(name, 2);
        const auto dofs = make_dof_map(mesh);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            const FeFunction v = random_function(dofs, rng);
            const FeFunction w = random_function(dofs, rng);
            const FeFunction z = random_function(dofs, rng);
            const auto& n = prob.nonlinearity;
            const double vw = energy_difference(prob.data, n, v, w);
            const double wv = energy_difference(prob.data, n, w, v);
            if (vw != -wv) ok = false;  // antisymmetry is a single negation
            const double vz = energy_difference(prob.data, n, v, z);
            const double zw = energy_difference(prob.data, n, z, w);
            const double scale =
                std::max({1.0, std::abs(vw), std::abs(vz), std::abs(zw)});
            worst = std::max(worst, std::abs(vw - (vz + zw)) / scale);
        }
        if (worst > 1e-12) ok = false;
        note << name << " additivity defect " << worst << "  ";
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 5.0) ok = false;
    note << "(" << elapsed << " s)";
    report(1, ok, "energy-difference algebra: " + note.str());
}

// ---------------------------------------------------------------- criterion 2
void criterion_2() {
    const auto start = std::chrono::steady_clock::now();
    const ScalarNonlinearity n = builtin_nonlinearity("lshape");
    ProblemData data;  // constant data, represented exactly by the projection
    data.f = [](const Vec2&) { return 0.25; };
    data.f_vec = [](const Vec2&) { return Vec2(0.1, -0.3); };
    const double q_red = std::pow(2.0, -0.25);
    std::mt19937 rng(202);
    int violations = 0;
    double worst = 0.0;
    const std::pair<const char*, int> bases[3] = {
        {"lshape", 1}, {"lshape", 2}, {"zshape", 2}};
    for (const auto& [domain, rounds] : bases) {
        const auto coarse = refined(domain, rounds);
        const auto cd = make_dof_map(coarse);
        const auto fine = std::make_shared<const Mesh>(uniform_refine(*coarse));
        const auto fd = make_dof_map(fine);
        // uniform refinement replaces every triangle, so the new-element and
        // refined-element sets are the full meshes
        for (int trial = 0; trial < 100; ++trial) {
            const FeFunction v = random_function(cd, rng);
            const double coarse_eta = total(indicators(data, n, v));
            const double fine_eta =
                total(indicators(data, n, prolongate(v, fd)));
            const double bound = q_red * coarse_eta;
            if (fine_eta > bound * (1.0 + 1e-12)) ++violations;
            if (bound > 0.0) worst = std::max(worst, fine_eta / bound);
        }
    }
    const double elapsed = seconds_since(start);
    std::ostringstream note;
    note << "reduction factor check, worst ratio to bound " << worst << ", "
         << violations << " violations (" << elapsed << " s)";
    report(2, violations == 0 && elapsed < 10.0, note.str());
}

// ---------------------------------------------------------------- criterion 3
void criterion_3() {
    const auto start = std::chrono::steady_clock::now();
    const Problem prob = make_problem("lshape");
    const auto& n = prob.nonlinearity;
    const double alpha = 1.0 - 2.0 * std::exp(-1.5);
    const double lipschitz = 6.0;
    const auto mesh = refined("lshape", 5);
    const auto dofs = make_dof_map(mesh);
    const FeFunction u_star = oversolve(prob.data, n, dofs);
    std::mt19937 rng(303);
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        FeFunction v = random_function(dofs, rng, trial % 2 ? 0.5 : 1e-2);
        v.coeffs += u_star.coeffs;
        const double dist = energy_norm_difference(v, u_star);
        const double dl2 = energy_difference(prob.data, n, u_star, v);
        const double slack = 1e-11 * std::max(1.0, dist * dist);
        if (dl2 < 0.5 * alpha * dist * dist - slack) ok = false;
        if (dl2 > 0.5 * lipschitz * dist * dist + slack) ok = false;
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 30.0) ok = false;
    std::ostringstream note;
    note << "norm-energy sandwich at " << dofs->num_dofs << " dofs ("
         << elapsed << " s)";
    report(3, ok, note.str());
}

// ------------------------------------------------------------- run summaries
struct BenchmarkRun {
    RunHistory history;
    Problem problem;
};

BenchmarkRun run_benchmark(const std::string& name,
                           const std::string& method_string, bool measure,
                           Retention retention) {
    BenchmarkRun out{{}, make_problem(name)};
    AdaptiveParams params;
    params.method = parse_method(method_string);
    params.eta_stop = 1e-2;
    params.measure_contraction = measure;
    params.retention = retention;
    out.history = run_adaptive(out.problem, params);
    return out;
}

// per-level effectivity from the accepted records
double effectivity_spread_last5(const RunHistory& hist) {
    const auto finals = hist.level_final_records();
    double lo = std::numeric_limits<double>::max(), hi = 0.0;
    const std::size_t begin = finals.size() >= 5 ? finals.size() - 5 : 0;
    for (std::size_t i = begin; i < finals.size(); ++i) {
        const auto& r = hist.records[finals[i]];
        if (r.exact_error && r.eta > 0.0) {
            const double eff = *r.exact_error / r.eta;
            lo = std::min(lo, eff);
            hi = std::max(hi, eff);
        }
    }
    return hi / lo;
}

void criterion_6(const BenchmarkRun& run6) {
    const auto& hist = run6.history;
    const auto& last = hist.final_record();
    std::ostringstream note;
    bool ok = true;

    if (!(last.eta < 1e-2)) ok = false;
    note << "eta " << last.eta;
    if (!(last.dofs <= 100000)) ok = false;
    note << ", dofs " << last.dofs;
    const RateSummary r = rates(hist);
    if (!(std::abs(r.slope_dofs + 0.5) <= 0.1)) ok = false;
    note << ", slope " << r.slope_dofs;
    const double spread = effectivity_spread_last5(hist);
    if (!(spread <= 3.0)) ok = false;
    note << ", effectivity max/min " << spread;
    if (!(hist.wall_seconds < 120.0)) ok = false;
    note << ", wall " << hist.wall_seconds << " s";
    report(6, ok, "L-shape benchmark: " + note.str());
    if (!ok && last.eta < 1e-2 && last.dofs > 100000) {
        const double c_eta =
            last.eta * std::sqrt(static_cast<double>(last.dofs));
        std::printf(
            "       note: estimator constant eta*sqrt(dofs) = %.2f; the "
            "estimator stop 1e-2 is reached near %.0f dofs, so the dof bound "
            "1e5 would require the constant <= 3.16\n",
            c_eta, std::pow(c_eta / 1e-2, 2.0));
    }
}

void criterion_7(const BenchmarkRun& run7, const BenchmarkRun& run7z) {
    const auto& hist = run7.history;
    const auto& last = hist.final_record();
    std::ostringstream note;
    bool ok = true;

    if (!(last.eta < 1e-2)) ok = false;
    note << "kacanov eta " << last.eta;
    const RateSummary r = rates(hist);
    if (!(std::abs(r.slope_dofs + 0.5) <= 0.15)) ok = false;
    note << ", slope " << r.slope_dofs;
    if (!(hist.wall_seconds < 120.0)) ok = false;
    note << ", wall " << hist.wall_seconds << " s";

    const auto& zlast = run7z.history.final_record();
    if (!(zlast.eta < 1e-2)) ok = false;
    const double step_ratio =
        static_cast<double>(run7z.history.records.size()) /
        static_cast<double>(hist.records.size());
    if (!(step_ratio <= 5.0)) ok = false;
    note << "; zarantonello eta " << zlast.eta << ", step ratio "
         << step_ratio;
    report(7, ok, "Z-shape benchmark: " + note.str());
}

void criterion_4(const BenchmarkRun& run6) {
    const ScalarNonlinearity& n = run6.problem.nonlinearity;
    const bool ok = run6.history.weight_min >= n.alpha &&
                    run6.history.weight_max <= n.lipschitz / 3.0;
    std::ostringstream note;
    note << "element weights on the L-shape run in [" << run6.history.weight_min
         << ", " << run6.history.weight_max << "] against [" << n.alpha << ", "
         << n.lipschitz / 3.0 << "]";
    report(4, ok, note.str());
}

void criterion_5(const std::vector<const RunHistory*>& runs) {
    double worst = 0.0;
    std::size_t count = 0;
    for (const RunHistory* hist : runs) {
        for (const double ratio : hist->solver_stats.ratios) {
            worst = std::max(worst, ratio);
            ++count;
        }
    }
    std::ostringstream note;
    note << "max per-step a-norm error ratio " << worst << " over " << count
         << " measured steps";
    report(5, count > 0 && worst < 0.99, note.str());
}

void criterion_8(const std::vector<const RunHistory*>& runs) {
    bool ok = true;
    std::ostringstream note;
    for (const RunHistory* hist : runs) {
        // last step index at which the cap was raised
        std::size_t last_update = 0;
        int cap = hist->records.front().j_max;
        for (std::size_t i = 0; i < hist->records.size(); ++i) {
            if (hist->records[i].j_max > cap) {
                cap = hist->records[i].j_max;
                last_update = i;
            }
        }
        const bool stabilized =
            last_update < hist->records.size() / 2;
        // modal final solver step count after the first three mesh levels
        std::map<std::pair<int, int>, int> jbar;
        for (const auto& r : hist->records)
            if (r.ell >= 3)
                jbar[{r.ell, r.k}] = std::max(jbar[{r.ell, r.k}], r.j);
        std::map<int, int> histogram;
        for (const auto& [key, j] : jbar) ++histogram[j];
        int modal = 0, best_count = -1;
        for (const auto& [j, cnt] : histogram)
            if (cnt > best_count) {
                best_count = cnt;
                modal = j;
            }
        if (!stabilized || modal != 1) ok = false;
        note << "last cap update at step " << last_update + 1 << "/"
             << hist->records.size() << ", modal jbar " << modal << "; ";
    }
    report(8, ok, "uniform algebraic steps: " + note.str());
    if (!ok) {
        std::printf(
            "       note: lowering alpha_min from 100 below the observed "
            "energy-to-norm quotients takes a fixed number of cap raises "
            "(one per halving); on short runs this staircase can extend "
            "past the midpoint in step count even though it ends within "
            "the first levels\n");
    }
}

void criterion_9(const BenchmarkRun& run6) {
    const RunHistory& hist = run6.history;
    const ProblemData& data = run6.problem.data;
    const ScalarNonlinearity& n = run6.problem.nonlinearity;

    // accepted iterates per (ell, k); k = 0 is the nested-iteration transfer
    std::map<std::pair<int, int>, const FeFunction*> accepted;
    for (const auto& a : hist.accepted) accepted[{a.ell, a.k}] = &a.u;

    double worst = 0.0;
    std::size_t measured = 0, skipped = 0;
    bool ok = true;
    for (int ell = 0;; ++ell) {
        const auto transfer = accepted.find({ell, 0});
        if (transfer == accepted.end()) break;
        const auto dofs = transfer->second->dofs;
        if (dofs->num_dofs == 0) continue;
        OversolveOptions opt;
        // seed with the last accepted iterate of this level
        int k_last = 0;
        while (accepted.count({ell, k_last + 1})) ++k_last;
        opt.seed = accepted.at({ell, k_last});
        opt.newton_polish = false;
        const FeFunction u_ref = oversolve(data, n, dofs, opt);
        const double e_ref = energy(data, n, u_ref);

        double dl2_prev =
            energy(data, n, *transfer->second) - e_ref;
        for (int k = 1; accepted.count({ell, k}); ++k) {
            const double dl2_now =
                energy(data, n, *accepted.at({ell, k})) - e_ref;
            const double floor =
                1e-13 * std::max(1.0, std::abs(e_ref));
            if (dl2_prev > floor) {
                const double ratio = dl2_now / dl2_prev;
                worst = std::max(worst, ratio);
                ++measured;
                if (!(ratio < 1.0)) ok = false;
            } else {
                ++skipped;
            }
            dl2_prev = dl2_now;
        }
    }
    std::ostringstream note;
    note << "energy contraction of inexact linearization: max ratio " << worst
         << " over " << measured << " accepted steps (" << skipped
         << " below measurement floor)";
    report(9, ok && measured > 0, note.str());
}

void criterion_10(const BenchmarkRun& run6) {
    const RateSummary r = rates(run6.history);
    const double gap = std::abs(r.slope_dofs - r.slope_cost);
    std::ostringstream note;
    note << "slope vs dofs " << r.slope_dofs << ", slope vs cumulative cost "
         << r.slope_cost << ", gap " << gap;
    report(10, gap <= 0.1, note.str());
}

// --------------------------------------------------------------- criterion 11
void criterion_11() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937 rng(1111);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    const auto meshes = {refined("lshape", 0), refined("square", 1),
                         refined("lshape", 1)};
    bool ok = true;
    int checked = 0;
    for (const auto& mesh : meshes) {
        const int nt = mesh->num_triangles();
        if (nt > 15) continue;
        for (int trial = 0; trial < 200; ++trial) {
            IndicatorField ind;
            ind.mesh = mesh;
            ind.eta_sq = Eigen::VectorXd::Zero(nt);
            for (int t = 0; t < nt; ++t)
                ind.eta_sq[t] =
                    (trial % 5 == 0 && value(rng) < 0.25) ? 0.0 : value(rng);
            const double theta = 0.05 + 0.9 * value(rng);
            const MarkedSet marked = doerfler_mark(ind, theta);
            const double target = theta * ind.eta_sq.sum();
            const double got = restricted(ind, marked);
            if (got * got < target) ok = false;
            // brute-force minimal cardinality over all subsets
            int best = nt;
            for (int mask = 0; mask < (1 << nt); ++mask) {
                double sum = 0.0;
                int card = 0;
                for (int t = 0; t < nt; ++t)
                    if (mask & (1 << t)) {
                        sum += ind.eta_sq[t];
                        ++card;
                    }
                if (sum >= target) best = std::min(best, card);
            }
            if (static_cast<int>(marked.size()) != best) ok = false;
            ++checked;
        }
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 5.0 || checked < 600) ok = false;
    std::ostringstream note;
    note << "marking minimality on " << checked << " random fields ("
         << elapsed << " s)";
    report(11, ok, note.str());
}

// --------------------------------------------------------------- criterion 12
void criterion_12() {
    const Problem prob = make_problem("lshape");
    AdaptiveParams params;
    params.eta_stop = 0.05;
    params.retention = Retention::all;
    const RunHistory hist = run_adaptive(prob, params);
    const std::vector<double> h = quasi_error(hist, prob);
    const EnvelopeFit fit = fit_r_linear(h);
    std::ostringstream note;
    note << "R-linear envelope over " << h.size() << " steps: q " << fit.q
         << ", C " << fit.c;
    report(12, fit.q < 1.0, note.str());
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();

    const BenchmarkRun run6 =
        run_benchmark("lshape", "kacanov", true, Retention::accepted);
    const BenchmarkRun run7 =
        run_benchmark("zshape", "kacanov", true, Retention::none);
    const BenchmarkRun run7z = run_benchmark("zshape", "zarantonello:0.648364",
                                             true, Retention::none);

    criterion_4(run6);
    criterion_5({&run6.history, &run7.history, &run7z.history});
    criterion_6(run6);
    criterion_7(run7, run7z);
    criterion_8({&run6.history, &run7.history});
    criterion_9(run6);
    criterion_10(run6);
    criterion_11();
    criterion_12();

    if (failures == 0) {
        std::printf("acceptance: all criteria passed\n");
    } else {
        std::printf("acceptance: %d criterion(s) FAILED\n", failures);
    }
    return failures == 0 ? 0 : 1;
}
