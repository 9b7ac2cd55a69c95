#include "opfproxy/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace opfproxy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One-sided form: min 1/2 x'Gx + a'x  s.t.  A x = b,  C x <= d.
struct Standard {
    Mat G;
    Vec a;
    Mat A;
    Vec b;
    Mat C;
    Vec d;
};

Standard to_standard(const QpProblem& p) {
    Standard s;
    s.G = p.quadratic;
    s.a = p.linear;
    s.A = p.eq_lhs;
    s.b = p.eq_rhs;
    const int n = p.num_vars();
    const int m = static_cast<int>(p.in_lhs.rows());
    int rows = 0;
    for (int i = 0; i < m; ++i) {
        if (p.in_upper[i] < kInf) ++rows;
        if (p.in_lower[i] > -kInf) ++rows;
    }
    s.C.resize(rows, n);
    s.d.resize(rows);
    int r = 0;
    for (int i = 0; i < m; ++i) {
        if (p.in_upper[i] < kInf) {
            s.C.row(r) = p.in_lhs.row(i);
            s.d[r] = p.in_upper[i];
            ++r;
        }
        if (p.in_lower[i] > -kInf) {
            s.C.row(r) = -p.in_lhs.row(i);
            s.d[r] = -p.in_lower[i];
            ++r;
        }
    }
    return s;
}

struct IpmResult {
    bool converged = false;
    Vec x, y, z;  // primal, equality duals, inequality duals
    int iterations = 0;
    double primal_residual = 0.0, dual_residual = 0.0, gap = 0.0;
};

// Mehrotra-style predictor-corrector for the one-sided standard form.
IpmResult ipm_solve(const Standard& st, const QpSettings& cfg) {
    const int n = static_cast<int>(st.a.size());
    const int p = static_cast<int>(st.A.rows());
    const int m = static_cast<int>(st.C.rows());
    const double reg = cfg.regularization;

    IpmResult res;
    res.x = Vec::Zero(n);
    res.y = Vec::Zero(p);

    if (m == 0) {
        // pure equality QP: solve the KKT system once
        Mat K = Mat::Zero(n + p, n + p);
        K.topLeftCorner(n, n) = st.G + reg * Mat::Identity(n, n);
        if (p > 0) {
            K.topRightCorner(n, p) = st.A.transpose();
            K.bottomLeftCorner(p, n) = st.A;
            K.bottomRightCorner(p, p) = -reg * Mat::Identity(p, p);
        }
        Vec rhs(n + p);
        rhs.head(n) = -st.a;
        if (p > 0) rhs.tail(p) = st.b;
        Eigen::PartialPivLU<Mat> lu(K);
        Vec sol = lu.solve(rhs);
        if (!sol.allFinite()) throw NumericError("KKT solve failed on equality-only system");
        res.x = sol.head(n);
        if (p > 0) res.y = sol.tail(p);
        res.z.resize(0);
        res.converged = true;
        res.iterations = 1;
        return res;
    }

    Vec s = (st.d - st.C * res.x).cwiseMax(1.0);
    Vec z = Vec::Ones(m);

    const double obj_scale = 1.0 + st.a.lpNorm<Eigen::Infinity>();
    const double rhs_scale =
        1.0 + std::max(p > 0 ? st.b.lpNorm<Eigen::Infinity>() : 0.0, st.d.lpNorm<Eigen::Infinity>());

    Mat K(n + p, n + p);
    Vec rhs(n + p), dx(n), dy(p), ds(m), dz(m);

    for (int it = 1; it <= cfg.max_iterations; ++it) {
        Vec rd = st.G * res.x + st.a + st.C.transpose() * z;
        if (p > 0) rd += st.A.transpose() * res.y;
        Vec rp = p > 0 ? Vec(st.A * res.x - st.b) : Vec();
        Vec ri = st.C * res.x + s - st.d;
        double mu = s.dot(z) / m;

        res.dual_residual = rd.lpNorm<Eigen::Infinity>() / obj_scale;
        res.primal_residual =
            std::max(p > 0 ? rp.lpNorm<Eigen::Infinity>() : 0.0, ri.lpNorm<Eigen::Infinity>()) /
            rhs_scale;
        double obj = 0.5 * res.x.dot(st.G * res.x) + st.a.dot(res.x);
        res.gap = mu / (1.0 + std::abs(obj));
        res.iterations = it;
        if (res.dual_residual <= cfg.tolerance && res.primal_residual <= cfg.tolerance &&
            res.gap <= cfg.tolerance) {
            res.converged = true;
            res.z = z;
            return res;
        }

        Vec dvec = z.cwiseQuotient(s);  // D = Z S^-1
        K.setZero();
        K.topLeftCorner(n, n) =
            st.G + st.C.transpose() * dvec.asDiagonal() * st.C + reg * Mat::Identity(n, n);
        if (p > 0) {
            K.topRightCorner(n, p) = st.A.transpose();
            K.bottomLeftCorner(p, n) = st.A;
            K.bottomRightCorner(p, p) = -reg * Mat::Identity(p, p);
        }
        Eigen::PartialPivLU<Mat> lu(K);

        auto solve_step = [&](const Vec& rc) {
            // rc is the target complementarity residual: S z - rc_goal folded in
            rhs.head(n) = -rd + st.C.transpose() * (rc.cwiseQuotient(s) - dvec.cwiseProduct(ri));
            if (p > 0) rhs.tail(p) = -rp;
            Vec sol = lu.solve(rhs);
            if (!sol.allFinite()) throw NumericError("KKT linear solve failed (degenerate system)");
            dx = sol.head(n);
            if (p > 0) dy = sol.tail(p);
            ds = -ri - st.C * dx;
            dz = -(rc + z.cwiseProduct(ds)).cwiseQuotient(s);
        };

        auto max_step = [&](const Vec& v, const Vec& dv) {
            double alpha = 1.0;
            for (int i = 0; i < m; ++i)
                if (dv[i] < 0) alpha = std::min(alpha, -v[i] / dv[i]);
            return alpha;
        };

        // predictor
        Vec rc_aff = s.cwiseProduct(z);
        solve_step(rc_aff);
        double ap = max_step(s, ds), ad = max_step(z, dz);
        double mu_aff = (s + ap * ds).dot(z + ad * dz) / m;
        double sigma = std::pow(mu_aff / mu, 3.0);
        sigma = std::clamp(sigma, 1e-8, 0.99);

        // corrector
        Vec rc = s.cwiseProduct(z) + ds.cwiseProduct(dz) - Vec::Constant(m, sigma * mu);
        solve_step(rc);
        ap = max_step(s, ds);
        ad = max_step(z, dz);
        double alpha = 0.995 * std::min(ap, ad);
        alpha = std::min(alpha, 1.0);

        res.x += alpha * dx;
        if (p > 0) res.y += alpha * dy;
        s += alpha * ds;
        z += alpha * dz;
    }
    res.z = z;
    return res;
}

// Phase-1: min sum(t) over (x, t) with per-constraint nonnegative slacks;
// equalities relaxed symmetrically. Always strictly feasible.
double phase1_min_violation(const Standard& st, const QpSettings& cfg) {
    const int n = static_cast<int>(st.a.size());
    const int p = static_cast<int>(st.A.rows());
    const int m = static_cast<int>(st.C.rows());
    const int nt = m + p;
    if (nt == 0) return 0.0;

    Standard ph;
    const int nv = n + nt;
    ph.G = Mat::Zero(nv, nv);
    ph.a = Vec::Zero(nv);
    ph.a.tail(nt).setOnes();
    ph.A.resize(0, nv);
    ph.b.resize(0);

    // rows: C x - t_i <= d; +-A x - u_j <= +-b; -t <= 0
    const int rows = m + 2 * p + nt;
    ph.C = Mat::Zero(rows, nv);
    ph.d.resize(rows);
    int r = 0;
    for (int i = 0; i < m; ++i, ++r) {
        ph.C.row(r).head(n) = st.C.row(i);
        ph.C(r, n + i) = -1.0;
        ph.d[r] = st.d[i];
    }
    for (int j = 0; j < p; ++j) {
        ph.C.row(r).head(n) = st.A.row(j);
        ph.C(r, n + m + j) = -1.0;
        ph.d[r] = st.b[j];
        ++r;
        ph.C.row(r).head(n) = -st.A.row(j);
        ph.C(r, n + m + j) = -1.0;
        ph.d[r] = -st.b[j];
        ++r;
    }
    for (int i = 0; i < nt; ++i, ++r) {
        ph.C(r, n + i) = -1.0;
        ph.d[r] = 0.0;
    }

    QpSettings cfg1 = cfg;
    cfg1.regularization = std::max(cfg.regularization, 1e-10);
    IpmResult res = ipm_solve(ph, cfg1);
    if (!res.converged)
        throw NumericError("phase-1 feasibility program did not converge in " +
                           std::to_string(cfg.max_iterations) + " iterations");
    return res.x.tail(nt).cwiseMax(0.0).sum();
}

}  // namespace

bool check_feasible(const QpProblem& problem, const QpSettings& settings) {
    Standard st = to_standard(problem);
    return phase1_min_violation(st, settings) <= settings.feasibility_slack;
}

QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings) {
    Standard st = to_standard(problem);

    QpSolution sol;
    if (phase1_min_violation(st, settings) > settings.feasibility_slack) {
        sol.status = QpStatus::Infeasible;
        return sol;
    }

    IpmResult res = ipm_solve(st, settings);
    sol.x = res.x;
    sol.eq_duals = res.y;
    sol.iterations = res.iterations;
    sol.primal_residual = res.primal_residual;
    sol.dual_residual = res.dual_residual;
    sol.gap = res.gap;
    sol.objective = 0.5 * res.x.dot(problem.quadratic * res.x) + problem.linear.dot(res.x);
    sol.status = res.converged ? QpStatus::Optimal : QpStatus::MaxIter;

    // split one-sided duals back onto the two-sided rows
    const int m = static_cast<int>(problem.in_lhs.rows());
    sol.in_duals_upper = Vec::Zero(m);
    sol.in_duals_lower = Vec::Zero(m);
    if (res.z.size() > 0) {
        int r = 0;
        for (int i = 0; i < m; ++i) {
            if (problem.in_upper[i] < std::numeric_limits<double>::infinity())
                sol.in_duals_upper[i] = res.z[r++];
            if (problem.in_lower[i] > -std::numeric_limits<double>::infinity())
                sol.in_duals_lower[i] = res.z[r++];
        }
    }
    return sol;
}

}  // namespace opfproxy
