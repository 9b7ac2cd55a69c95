#pragma once

#include <optional>

#include "opfproxy/netcase.hpp"
#include "opfproxy/qp.hpp"

namespace opfproxy {

struct OpfOutcome {
    bool feasible = false;
    std::optional<double> cost;  // $, present iff feasible
    Vec dispatch;                // per-generator pu, empty when infeasible
    double solve_time = 0.0;     // seconds, monotonic clock
};

/// Decision variables are the generator outputs. One equality row balances
/// total generation against total load; inequalities are the generator
/// boxes followed by the branch-flow limits through the shift factors.
QpProblem assemble_dcopf(const DcModel& model, const Vec& load);

OpfOutcome solve_opf(const DcModel& model, const Vec& load, const QpSettings& settings = {});

}  // namespace opfproxy
