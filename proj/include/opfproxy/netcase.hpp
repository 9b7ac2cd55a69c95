#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace opfproxy {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Parse or semantic failure in a case file; carries line/field location
/// where known.
class CaseError : public std::runtime_error {
public:
    explicit CaseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Bus {
    int id = 0;
    double nominal_load = 0.0;  // pu, >= 0
    bool is_slack = false;
};

struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double reactance = 0.0;   // pu, > 0
    double flow_limit = 0.0;  // pu, > 0, symmetric +-
};

struct Generator {
    int bus = 0;
    double p_min = 0.0;  // pu
    double p_max = 0.0;  // pu
    double cost_quadratic = 0.0;  // $/pu^2
    double cost_linear = 0.0;     // $/pu
    double cost_constant = 0.0;   // $
};

/// Immutable after construction; safe to share read-only across workers.
struct NetworkCase {
    std::string name;
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;

    int bus_index(int bus_id) const;  // position in buses, throws CaseError if absent
    int slack_index() const;
};

/// Constant matrices of the DC-linearized network. Branch flows for a
/// balanced injection p are injection_shift * p; the slack column is zero.
/// Flow sign is positive from from_bus to to_bus.
struct DcModel {
    int n_bus = 0;
    Mat injection_shift;   // branches x buses
    Mat gen_incidence;     // buses x generators, 0/1
    Vec flow_limit;        // per branch
    Vec gen_p_min, gen_p_max;
    Vec cost_quadratic, cost_linear, cost_constant;  // per generator
};

NetworkCase parse_case(const std::string& text, const std::string& name = "");
std::string serialize_case(const NetworkCase& net);
NetworkCase load_case_file(const std::string& path);

/// Per-bus nominal demand in bus order; zero for load-free buses.
Vec nominal_load_vector(const NetworkCase& net);

/// Throws CaseError when the network is disconnected or the reduced
/// susceptance matrix is singular.
DcModel build_dc_model(const NetworkCase& net);

}  // namespace opfproxy
