#include "opfproxy/opf.hpp"

#include <chrono>

namespace opfproxy {

QpProblem assemble_dcopf(const DcModel& model, const Vec& load) {
    if (load.size() != model.n_bus)
        throw std::invalid_argument("load dimension " + std::to_string(load.size()) +
                                    " does not match bus count " + std::to_string(model.n_bus));
    if ((load.array() < 0).any())
        throw std::invalid_argument("load vector has a negative entry");

    const int ng = static_cast<int>(model.gen_p_min.size());
    const int nl = static_cast<int>(model.flow_limit.size());

    QpProblem qp;
    qp.quadratic = (2.0 * model.cost_quadratic).asDiagonal();
    qp.linear = model.cost_linear;

    qp.eq_lhs = Mat::Ones(1, ng);
    qp.eq_rhs = Vec::Constant(1, load.sum());

    // generator boxes, then flow limits on shift * (Cg p - l)
    qp.in_lhs.resize(ng + nl, ng);
    qp.in_lower.resize(ng + nl);
    qp.in_upper.resize(ng + nl);
    qp.in_lhs.topRows(ng) = Mat::Identity(ng, ng);
    qp.in_lower.head(ng) = model.gen_p_min;
    qp.in_upper.head(ng) = model.gen_p_max;

    Mat flow_of_gen = model.injection_shift * model.gen_incidence;  // nl x ng
    Vec flow_of_load = model.injection_shift * load;                // constant offset
    qp.in_lhs.bottomRows(nl) = flow_of_gen;
    qp.in_lower.tail(nl) = -model.flow_limit + flow_of_load;
    qp.in_upper.tail(nl) = model.flow_limit + flow_of_load;
    return qp;
}

OpfOutcome solve_opf(const DcModel& model, const Vec& load, const QpSettings& settings) {
    auto t0 = std::chrono::steady_clock::now();
    QpProblem qp = assemble_dcopf(model, load);

    OpfOutcome out;
    try {
        QpSolution sol = solve_qp(qp, settings);
        if (sol.status == QpStatus::Infeasible) {
            out.feasible = false;
        } else if (sol.status == QpStatus::Optimal) {
            out.feasible = true;
            out.cost = sol.objective + model.cost_constant.sum();
            out.dispatch = sol.x;
        } else {
            throw NumericError("OPF solve hit the iteration limit");
        }
    } catch (const NumericError& e) {
        std::string loads = "[";
        for (int i = 0; i < load.size(); ++i)
            loads += (i ? "," : "") + std::to_string(load[i]);
        throw NumericError(std::string(e.what()) + " for load " + loads + "]");
    }
    out.solve_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace opfproxy
