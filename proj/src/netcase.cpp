#include "opfproxy/netcase.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

namespace opfproxy {

int NetworkCase::bus_index(int bus_id) const {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == bus_id) return static_cast<int>(i);
    throw CaseError("unknown bus id " + std::to_string(bus_id));
}

int NetworkCase::slack_index() const {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].is_slack) return static_cast<int>(i);
    throw CaseError("no slack bus");
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(trim(f));
    return out;
}

double parse_num(const std::string& s, int line_no, const char* field) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing chars");
        return v;
    } catch (const std::exception&) {
        throw CaseError("line " + std::to_string(line_no) + ": field '" + field +
                        "' is not a number: '" + s + "'");
    }
}

int parse_int(const std::string& s, int line_no, const char* field) {
    double v = parse_num(s, line_no, field);
    int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw CaseError("line " + std::to_string(line_no) + ": field '" + field +
                        "' must be an integer: '" + s + "'");
    return i;
}

void validate(const NetworkCase& net) {
    if (net.base_mva <= 0) throw CaseError("base_mva must be positive");
    if (net.buses.empty()) throw CaseError("case has no buses");
    std::set<int> ids;
    int n_slack = 0;
    for (const auto& b : net.buses) {
        if (!ids.insert(b.id).second)
            throw CaseError("duplicate bus id " + std::to_string(b.id));
        if (b.nominal_load < 0)
            throw CaseError("bus " + std::to_string(b.id) + ": negative nominal load");
        if (b.is_slack) ++n_slack;
    }
    if (n_slack != 1)
        throw CaseError("exactly one slack bus required, found " + std::to_string(n_slack));
    for (const auto& br : net.branches) {
        if (!ids.count(br.from_bus))
            throw CaseError("branch references nonexistent bus " + std::to_string(br.from_bus));
        if (!ids.count(br.to_bus))
            throw CaseError("branch references nonexistent bus " + std::to_string(br.to_bus));
        if (br.from_bus == br.to_bus)
            throw CaseError("branch endpoints coincide at bus " + std::to_string(br.from_bus));
        if (br.reactance <= 0)
            throw CaseError("branch " + std::to_string(br.from_bus) + "-" +
                            std::to_string(br.to_bus) + ": reactance must be positive");
        if (br.flow_limit <= 0)
            throw CaseError("branch " + std::to_string(br.from_bus) + "-" +
                            std::to_string(br.to_bus) + ": flow limit must be positive");
    }
    for (const auto& g : net.generators) {
        if (!ids.count(g.bus))
            throw CaseError("generator references nonexistent bus " + std::to_string(g.bus));
        if (g.p_min < 0 || g.p_min > g.p_max)
            throw CaseError("generator at bus " + std::to_string(g.bus) +
                            ": require 0 <= p_min <= p_max");
        if (g.cost_quadratic < 0)
            throw CaseError("generator at bus " + std::to_string(g.bus) +
                            ": negative quadratic cost breaks convexity");
    }
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

NetworkCase parse_case(const std::string& text, const std::string& name) {
    NetworkCase net;
    net.name = name;
    enum class Section { None, Buses, Branches, Generators } section = Section::None;
    std::stringstream ss(text);
    std::string raw;
    int line_no = 0;
    bool saw_base = false;
    while (std::getline(ss, raw)) {
        ++line_no;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line == "[buses]") section = Section::Buses;
            else if (line == "[branches]") section = Section::Branches;
            else if (line == "[generators]") section = Section::Generators;
            else throw CaseError("line " + std::to_string(line_no) + ": unknown section " + line);
            continue;
        }
        if (line.rfind("base_mva", 0) == 0) {
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw CaseError("line " + std::to_string(line_no) + ": expected base_mva = <value>");
            net.base_mva = parse_num(trim(line.substr(eq + 1)), line_no, "base_mva");
            saw_base = true;
            continue;
        }
        auto f = split_fields(line);
        switch (section) {
            case Section::None:
                throw CaseError("line " + std::to_string(line_no) + ": record outside any section");
            case Section::Buses: {
                if (f.size() != 3)
                    throw CaseError("line " + std::to_string(line_no) +
                                    ": bus record needs 3 fields (id, nominal_load, is_slack)");
                Bus b;
                b.id = parse_int(f[0], line_no, "id");
                b.nominal_load = parse_num(f[1], line_no, "nominal_load");
                b.is_slack = parse_int(f[2], line_no, "is_slack") != 0;
                net.buses.push_back(b);
                break;
            }
            case Section::Branches: {
                if (f.size() != 4)
                    throw CaseError("line " + std::to_string(line_no) +
                                    ": branch record needs 4 fields (from, to, reactance, flow_limit)");
                Branch br;
                br.from_bus = parse_int(f[0], line_no, "from_bus");
                br.to_bus = parse_int(f[1], line_no, "to_bus");
                br.reactance = parse_num(f[2], line_no, "reactance");
                br.flow_limit = parse_num(f[3], line_no, "flow_limit");
                net.branches.push_back(br);
                break;
            }
            case Section::Generators: {
                if (f.size() != 6)
                    throw CaseError("line " + std::to_string(line_no) +
                                    ": generator record needs 6 fields "
                                    "(bus, p_min, p_max, cost_quadratic, cost_linear, cost_constant)");
                Generator g;
                g.bus = parse_int(f[0], line_no, "bus");
                g.p_min = parse_num(f[1], line_no, "p_min");
                g.p_max = parse_num(f[2], line_no, "p_max");
                g.cost_quadratic = parse_num(f[3], line_no, "cost_quadratic");
                g.cost_linear = parse_num(f[4], line_no, "cost_linear");
                g.cost_constant = parse_num(f[5], line_no, "cost_constant");
                net.generators.push_back(g);
                break;
            }
        }
    }
    (void)saw_base;
    validate(net);
    return net;
}

std::string serialize_case(const NetworkCase& net) {
    std::string out;
    out += "base_mva = " + fmt_double(net.base_mva) + "\n";
    out += "[buses]\n";
    for (const auto& b : net.buses)
        out += std::to_string(b.id) + ", " + fmt_double(b.nominal_load) + ", " +
               (b.is_slack ? "1" : "0") + "\n";
    out += "[branches]\n";
    for (const auto& br : net.branches)
        out += std::to_string(br.from_bus) + ", " + std::to_string(br.to_bus) + ", " +
               fmt_double(br.reactance) + ", " + fmt_double(br.flow_limit) + "\n";
    out += "[generators]\n";
    for (const auto& g : net.generators)
        out += std::to_string(g.bus) + ", " + fmt_double(g.p_min) + ", " + fmt_double(g.p_max) +
               ", " + fmt_double(g.cost_quadratic) + ", " + fmt_double(g.cost_linear) + ", " +
               fmt_double(g.cost_constant) + "\n";
    return out;
}

NetworkCase load_case_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CaseError("cannot open case file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string name = path;
    auto slash = name.find_last_of('/');
    if (slash != std::string::npos) name = name.substr(slash + 1);
    auto dot = name.find_last_of('.');
    if (dot != std::string::npos) name = name.substr(0, dot);
    return parse_case(buf.str(), name);
}

Vec nominal_load_vector(const NetworkCase& net) {
    Vec l(net.buses.size());
    for (size_t i = 0; i < net.buses.size(); ++i) l[i] = net.buses[i].nominal_load;
    return l;
}

DcModel build_dc_model(const NetworkCase& net) {
    const int nb = static_cast<int>(net.buses.size());
    const int nl = static_cast<int>(net.branches.size());
    const int ng = static_cast<int>(net.generators.size());

    // connectivity check from the slack bus
    {
        std::vector<std::vector<int>> adj(nb);
        for (const auto& br : net.branches) {
            int u = net.bus_index(br.from_bus), v = net.bus_index(br.to_bus);
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        std::vector<bool> seen(nb, false);
        std::queue<int> q;
        q.push(net.slack_index());
        seen[net.slack_index()] = true;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[u])
                if (!seen[v]) { seen[v] = true; q.push(v); }
        }
        for (int i = 0; i < nb; ++i)
            if (!seen[i])
                throw CaseError("network disconnected: bus " + std::to_string(net.buses[i].id) +
                                " unreachable from slack");
    }

    // branch susceptance rows and nodal susceptance matrix
    Mat b_branch = Mat::Zero(nl, nb);
    Mat b_bus = Mat::Zero(nb, nb);
    for (int k = 0; k < nl; ++k) {
        const auto& br = net.branches[k];
        int i = net.bus_index(br.from_bus), j = net.bus_index(br.to_bus);
        double y = 1.0 / br.reactance;
        b_branch(k, i) = y;
        b_branch(k, j) = -y;
        b_bus(i, i) += y;
        b_bus(j, j) += y;
        b_bus(i, j) -= y;
        b_bus(j, i) -= y;
    }

    const int slack = net.slack_index();
    std::vector<int> keep;
    keep.reserve(nb - 1);
    for (int i = 0; i < nb; ++i)
        if (i != slack) keep.push_back(i);

    Mat b_red(nb - 1, nb - 1);
    for (int r = 0; r < nb - 1; ++r)
        for (int c = 0; c < nb - 1; ++c) b_red(r, c) = b_bus(keep[r], keep[c]);

    Eigen::FullPivLU<Mat> lu(b_red);
    if (!lu.isInvertible())
        throw CaseError("singular reduced susceptance matrix");

    // shift = B_branch(:, keep) * inv(B_red); slack column stays zero
    Mat b_branch_red(nl, nb - 1);
    for (int c = 0; c < nb - 1; ++c) b_branch_red.col(c) = b_branch.col(keep[c]);
    Mat shift_red = lu.solve(b_branch_red.transpose()).transpose();

    DcModel m;
    m.n_bus = nb;
    m.injection_shift = Mat::Zero(nl, nb);
    for (int c = 0; c < nb - 1; ++c) m.injection_shift.col(keep[c]) = shift_red.col(c);

    m.gen_incidence = Mat::Zero(nb, ng);
    m.gen_p_min.resize(ng);
    m.gen_p_max.resize(ng);
    m.cost_quadratic.resize(ng);
    m.cost_linear.resize(ng);
    m.cost_constant.resize(ng);
    for (int g = 0; g < ng; ++g) {
        const auto& gen = net.generators[g];
        m.gen_incidence(net.bus_index(gen.bus), g) = 1.0;
        m.gen_p_min[g] = gen.p_min;
        m.gen_p_max[g] = gen.p_max;
        m.cost_quadratic[g] = gen.cost_quadratic;
        m.cost_linear[g] = gen.cost_linear;
        m.cost_constant[g] = gen.cost_constant;
    }
    m.flow_limit.resize(nl);
    for (int k = 0; k < nl; ++k) m.flow_limit[k] = net.branches[k].flow_limit;
    return m;
}

}  // namespace opfproxy
