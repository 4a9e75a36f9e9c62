#pragma once

#include "ailfem/fem.hpp"
#include "ailfem/linearize.hpp"

#include <memory>

namespace ailfem {

struct OversolveOptions {
    double tol_rel = 1e-14;  // stop when the energy decrease per Kacanov step
                             // drops below tol_rel * max(1, |E|)
    int max_iterations = 400;
    bool newton_polish = true;  // a few full Newton steps to push the residual
                                // to the round-off floor
    const FeFunction* seed = nullptr;
};

// Reference discrete minimizer on a fixed mesh: Kacanov iteration with direct
// solves until the energy difference per step is negligible, optionally
// polished by full Newton steps guarded by residual decrease.
FeFunction oversolve(const ProblemData& data, const ScalarNonlinearity& n,
                     std::shared_ptr<const DofMap> dofs,
                     const OversolveOptions& opt = {});

}  // namespace ailfem
