#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace opfproxy {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Convex QP:  min 1/2 x'Gx + a'x
///             s.t. eq_lhs x = eq_rhs,  in_lower <= in_lhs x <= in_upper.
/// G symmetric PSD; equality rows linearly independent.
struct QpProblem {
    Mat quadratic;     // G, n x n
    Vec linear;        // a, n
    Mat eq_lhs;        // p x n (p may be 0)
    Vec eq_rhs;
    Mat in_lhs;        // m x n
    Vec in_lower;      // may contain -inf
    Vec in_upper;      // may contain +inf

    int num_vars() const { return static_cast<int>(linear.size()); }
};

enum class QpStatus { Optimal, Infeasible, MaxIter };

struct QpSolution {
    QpStatus status = QpStatus::MaxIter;
    Vec x;             // decision vector at termination
    double objective = 0.0;
    Vec eq_duals;
    Vec in_duals_lower, in_duals_upper;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
};

struct QpSettings {
    double tolerance = 1e-8;        // scaled gap and residual target
    int max_iterations = 100;
    double feasibility_slack = 1e-6;  // phase-1 acceptance on total violation
    double regularization = 1e-10;    // static diagonal shift on the KKT system
};

/// Primal-dual interior-point solve. Runs the phase-1 feasibility program
/// first; returns status Infeasible when the minimal total constraint
/// violation exceeds settings.feasibility_slack.
QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings = {});

/// Phase-1 only: minimal total nonnegative slack needed to satisfy all
/// constraints is <= settings.feasibility_slack.
bool check_feasible(const QpProblem& problem, const QpSettings& settings = {});

}  // namespace opfproxy
