#include "opfproxy/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "opfproxy/qp.hpp"
#include "opfproxy/rng.hpp"

namespace opfproxy {

bool Polytope::contains(const Vec& y, double tol) const {
    return ((ineq_lhs * y - ineq_rhs).array() <= tol).all();
}

Vec Polytope::to_full(const Vec& y) const {
    Vec full = Vec::Zero(full_dim);
    for (size_t i = 0; i < free_index.size(); ++i) full[free_index[i]] = y[i];
    return full;
}

Vec Polytope::interior_point() const {
    // rows come in (upper, lower) pairs per coordinate for the box case
    const int d = dim();
    Vec c(d);
    for (int i = 0; i < d; ++i) c[i] = 0.5 * (ineq_rhs[2 * i] - ineq_rhs[2 * i + 1]);
    return c;
}

Polytope box_polytope(const Vec& nominal, double alpha_min, double alpha_max) {
    if ((nominal.array() < 0).any())
        throw std::invalid_argument("nominal load has a negative entry");
    if (!(alpha_min < alpha_max))
        throw std::invalid_argument("alpha_min must be strictly below alpha_max (empty interior)");

    Polytope poly;
    poly.full_dim = static_cast<int>(nominal.size());
    for (int i = 0; i < nominal.size(); ++i)
        if (nominal[i] > 0) poly.free_index.push_back(i);
    const int d = static_cast<int>(poly.free_index.size());
    if (d == 0) throw std::invalid_argument("all-zero nominal load: empty sampling space");

    poly.ineq_lhs = Mat::Zero(2 * d, d);
    poly.ineq_rhs.resize(2 * d);
    for (int i = 0; i < d; ++i) {
        double base = nominal[poly.free_index[i]];
        poly.ineq_lhs(2 * i, i) = 1.0;
        poly.ineq_rhs[2 * i] = alpha_max * base;
        poly.ineq_lhs(2 * i + 1, i) = -1.0;
        poly.ineq_rhs[2 * i + 1] = -alpha_min * base;
    }
    return poly;
}

std::pair<double, double> chord_bounds(const Polytope& poly, const Vec& point,
                                       const Vec& direction) {
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();
    Vec slack = poly.ineq_rhs - poly.ineq_lhs * point;  // > 0 strictly interior
    Vec rate = poly.ineq_lhs * direction;
    for (int r = 0; r < slack.size(); ++r) {
        if (rate[r] > 0) t_hi = std::min(t_hi, slack[r] / rate[r]);
        else if (rate[r] < 0) t_lo = std::max(t_lo, slack[r] / rate[r]);
    }
    if (!(t_hi - t_lo > 1e-12) || !(t_lo < 0 && t_hi > 0))
        throw NumericError("degenerate chord: start point is on the polytope boundary");
    return {t_lo, t_hi};
}

std::vector<Vec> hit_and_run(const Polytope& poly, const SamplerConfig& config, int n) {
    std::vector<Vec> out;
    if (n <= 0) return out;
    out.reserve(n);

    const int d = poly.dim();
    Rng rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Vec x = poly.interior_point();
    Vec dir(d);
    const long total = static_cast<long>(config.burn_in) +
                       static_cast<long>(config.thinning) * static_cast<long>(n);
    long kept_at = config.burn_in;
    for (long step = 1; step <= total; ++step) {
        double norm;
        do {
            for (int i = 0; i < d; ++i) dir[i] = gauss(rng);
            norm = dir.norm();
        } while (norm == 0.0);
        dir /= norm;
        auto [lo, hi] = chord_bounds(poly, x, dir);
        // keep a hair inside the chord so rounding never lands on the boundary
        double margin = 1e-12 * (hi - lo);
        double t = lo + unif(rng) * (hi - lo);
        x += std::clamp(t, lo + margin, hi - margin) * dir;
        if (step > config.burn_in && (step - kept_at) >= config.thinning) {
            out.push_back(poly.to_full(x));
            kept_at = step;
            if (static_cast<int>(out.size()) == n) break;
        }
    }
    return out;
}

}  // namespace opfproxy
