#pragma once

#include <optional>
#include <string>
#include <vector>

#include "opfproxy/opf.hpp"
#include "opfproxy/sampler.hpp"

namespace opfproxy {

struct LabeledSample {
    Vec load;
    bool feasible = false;
    std::optional<double> cost;  // present iff feasible
    double solve_time = 0.0;
};

/// Immutable after construction.
struct Dataset {
    std::vector<LabeledSample> samples;
    std::string case_name;
    SamplerConfig sampler_metadata;

    int size() const { return static_cast<int>(samples.size()); }
    int load_dim() const { return samples.empty() ? 0 : static_cast<int>(samples[0].load.size()); }
    double feasible_fraction() const;

    /// Feature matrix (n x d) and, for feasible rows, target costs.
    Mat load_matrix() const;
};

/// Sample n loads from the polytope and label each with the exact OPF.
/// Work is split into fixed-size index chunks, each with its own chain
/// seeded from (seed, chunk); output order does not depend on the worker
/// count.
Dataset generate_dataset(const DcModel& model, const Polytope& poly,
                         const SamplerConfig& config, int n, int workers,
                         const std::string& case_name = "");

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, uint64_t seed);

/// CSV with header l_1..l_nb,feasible,cost,solve_time plus a .meta sidecar.
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace opfproxy
