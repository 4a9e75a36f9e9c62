#pragma once

#include "ailfem/algsolver.hpp"
#include "ailfem/estimator.hpp"
#include "ailfem/linearize.hpp"
#include "ailfem/problems.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ailfem {

// What the driver keeps beyond the step records. "accepted" retains the
// final iterate of every linearization step (plus the per-level transfer),
// "all" additionally retains every inner iterate.
enum class Retention { none, accepted, all };

struct AdaptiveParams {
    double theta = 0.5;          // marking parameter in (0, 1]
    double lambda_lin = 0.9;     // linearization stopping parameter > 0
    double rho = 0.5;            // decay factor for alpha_min in (0, 1)
    double alpha_min_init = 100.0;
    int j_max_init = 1;
    double tau = 0.0;            // overall tolerance >= 0
    double c_mark = 1.0;         // >= 1; marking is sort-based, so 1 is attained
    LinearizationMethod method{LinearizationMethod::Kind::kacanov, 0.0};
    long max_total_steps = 1000000;  // safety cap on inner steps

    // artifact knobs
    double eta_stop = 0.0;  // alternative stop: estimator below this after a
                            // linearization loop finishes (0 disables)
    bool measure_contraction = false;  // record a-norm solver ratios against
                                       // direct reference solves
    Retention retention = Retention::none;
    bool record_exact_error = true;  // at accepted steps, when available
};

void validate_params(const AdaptiveParams& params);

// One row per algebraic solver step (ell, k, j), k >= 1, j >= 1.
struct StepRecord {
    int ell = 0;
    int k = 0;
    int j = 0;
    int dofs = 0;
    double eta = 0.0;
    double norm_inc_lin = 0.0;  // |u^{k,j} - u^{k-1,jbar}|
    double norm_inc_alg = 0.0;  // |u^{k,j} - u^{k,j-1}|
    double dl2_inc = 0.0;       // dl2(u^{k,j}, u^{k-1,jbar})
    double alpha_kj = 0.0;      // dl2_inc / norm_inc_lin^2, 0 when undefined
    double alpha_min = 0.0;     // current lower bound
    int j_max = 0;              // current step cap
    double energy = 0.0;
    long long cum_cost = 0;     // running sum of #triangles over all steps
    std::optional<double> exact_error;
};

enum class Termination { tolerance_met, step_cap, exact_hit };
std::string to_string(Termination t);

struct RetainedIterate {
    int ell, k, j;
    FeFunction u;
};

struct RunHistory {
    std::vector<StepRecord> records;
    Termination termination = Termination::step_cap;
    int final_ell = 0, final_k = 0, final_j = 0;
    LinearizationMethod method;  // validated method the run used

    std::shared_ptr<MultilevelHierarchy> hierarchy;  // all visited levels
    std::vector<long> marked_counts;                 // per refined level
    SolverStats solver_stats;                        // measured mode only
    double weight_min = 0.0, weight_max = 0.0;  // extremal element weights
                                                // over all assembled systems
    std::vector<RetainedIterate> accepted;  // retention >= accepted: (ell,k,jbar)
                                            // iterates, k = 0 is the transfer
    std::vector<RetainedIterate> iterates;  // retention == all: one per record
    double wall_seconds = 0.0;

    const StepRecord& final_record() const { return records.back(); }
    // last record of each mesh level (the accepted u^{kbar,jbar})
    std::vector<std::size_t> level_final_records() const;
};

// Literal stopping predicates of the three loop levels.
bool stop_overall(double eta, double norm_inc_lin, double norm_inc_alg,
                  double tau);
bool stop_algebraic(double alpha_kj, double alpha_min, bool iterate_unchanged,
                    int j, int j_max);
bool stop_linearization(double dl2_inc, double lambda_lin, double eta);

// Minimal-cardinality set with theta * total(ind)^2 <= restricted(ind, .)^2,
// obtained by descending sort on the squared indicators, ties broken by
// triangle index.
MarkedSet doerfler_mark(const IndicatorField& ind, double theta);

// The full adaptive loop: mesh refinement (ell) around iterative
// linearization (k) around the contractive algebraic solver (j), with
// nested iteration and the self-tuning alpha_min / j_max stopping state.
RunHistory run_adaptive(const Problem& problem, const AdaptiveParams& params);

// Log-log least-squares slopes of the per-level final estimator against dof
// count and against cumulative cost, skipping the first cutoff_fraction of
// the levels. Requires at least two post-cutoff levels.
struct RateSummary {
    double slope_dofs = 0.0;
    double slope_cost = 0.0;
    int levels_used = 0;
};
RateSummary rates(const RunHistory& history, double cutoff_fraction = 0.25);

// Quasi-error per record: |u_ell* - u| + |u^{k,*} - u| + eta, with u_ell*
// over-solved per level and u^{k,*} the direct solve of the rebuilt step
// system. Requires retention == all.
std::vector<double> quasi_error(const RunHistory& history,
                                const Problem& problem);

// Envelope fit H_i <= C q^{i-i'} H_{i'}: q from a least-squares slope of
// log H, C as the smallest constant making the envelope hold.
struct EnvelopeFit {
    double q = 0.0;
    double c = 0.0;
};
EnvelopeFit fit_r_linear(const std::vector<double>& h);

// History export, one row per record:
// ell,k,j,dofs,eta,norm_inc_lin,norm_inc_alg,dl2_inc,alpha_kj,alpha_min,
// J_max,energy,cum_cost[,exact_error]; full-precision decimals, the
// exact_error column appears only when any record carries a value.
void write_history_csv(std::ostream& out, const RunHistory& history);
std::string history_csv(const RunHistory& history);

}  // namespace ailfem
