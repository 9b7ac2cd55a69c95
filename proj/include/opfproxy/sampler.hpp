#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "opfproxy/netcase.hpp"

namespace opfproxy {

/// {y | A y <= b} over the free (positive-nominal-load) coordinates.
/// Zero-load buses are pinned at zero and excluded from the walk; to_full
/// re-expands a sample to bus dimension.
struct Polytope {
    Mat ineq_lhs;                 // rows x dim
    Vec ineq_rhs;
    std::vector<int> free_index;  // walk coordinate -> bus index
    int full_dim = 0;             // n_bus

    int dim() const { return static_cast<int>(ineq_lhs.cols()); }
    bool contains(const Vec& y, double tol = 1e-12) const;
    Vec to_full(const Vec& y) const;
    Vec interior_point() const;   // box center for the box construction
};

struct SamplerConfig {
    uint64_t seed = 0;
    int burn_in = 1000;
    int thinning = 5;
    double alpha_min = 0.2;
    double alpha_max = 2.0;
};

/// Load box {alpha_min * L <= l <= alpha_max * L} over buses with L_i > 0.
Polytope box_polytope(const Vec& nominal, double alpha_min, double alpha_max);

/// Maximal t interval keeping point + t * direction inside the polytope.
/// point must be strictly interior; returns (t_lo, t_hi) with t_lo < 0 < t_hi.
std::pair<double, double> chord_bounds(const Polytope& poly, const Vec& point,
                                       const Vec& direction);

/// Uniform samples over the polytope, returned in full bus dimension.
std::vector<Vec> hit_and_run(const Polytope& poly, const SamplerConfig& config, int n);

}  // namespace opfproxy
