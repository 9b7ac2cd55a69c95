#include "opfproxy/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "opfproxy/rng.hpp"

namespace opfproxy {

namespace {

constexpr int kChunk = 512;  // generation chunk size, independent of worker count

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

double Dataset::feasible_fraction() const {
    if (samples.empty()) return 0.0;
    int k = 0;
    for (const auto& s : samples) k += s.feasible ? 1 : 0;
    return static_cast<double>(k) / samples.size();
}

Mat Dataset::load_matrix() const {
    Mat x(size(), load_dim());
    for (int i = 0; i < size(); ++i) x.row(i) = samples[i].load.transpose();
    return x;
}

Dataset generate_dataset(const DcModel& model, const Polytope& poly,
                         const SamplerConfig& config, int n, int workers,
                         const std::string& case_name) {
    if (n < 1) throw std::invalid_argument("sample count must be >= 1");
    if (workers < 1) throw std::invalid_argument("worker count must be >= 1");

    Dataset out;
    out.case_name = case_name;
    out.sampler_metadata = config;
    out.samples.resize(n);

    const int chunks = (n + kChunk - 1) / kChunk;
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string error_msg;
    std::mutex error_mu;

    auto run = [&] {
        for (;;) {
            int c = next.fetch_add(1);
            if (c >= chunks || failed.load()) return;
            int begin = c * kChunk;
            int count = std::min(kChunk, n - begin);
            SamplerConfig chain = config;
            chain.seed = derive_seed(config.seed, static_cast<uint64_t>(c));
            try {
                auto loads = hit_and_run(poly, chain, count);
                for (int i = 0; i < count; ++i) {
                    OpfOutcome o = solve_opf(model, loads[i]);
                    auto& s = out.samples[begin + i];
                    s.load = loads[i];
                    s.feasible = o.feasible;
                    s.cost = o.cost;
                    s.solve_time = o.solve_time;
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(error_mu);
                failed = true;
                error_msg = "sample chunk " + std::to_string(c) + " (index " +
                            std::to_string(begin) + "): " + e.what();
                return;
            }
        }
    };

    if (workers == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& t : pool) t.join();
    }
    if (failed) throw NumericError(error_msg);
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_fraction must be in (0, 1)");
    const int n = data.size();
    int n_train = static_cast<int>(std::lround(train_fraction * n));
    if (n_train == 0 || n_train == n)
        throw std::invalid_argument("split produces an empty partition");

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, 0xdeca));
    std::shuffle(idx.begin(), idx.end(), rng);

    Dataset train, test;
    train.case_name = test.case_name = data.case_name;
    train.sampler_metadata = test.sampler_metadata = data.sampler_metadata;
    for (int i = 0; i < n; ++i)
        (i < n_train ? train : test).samples.push_back(data.samples[idx[i]]);
    return {std::move(train), std::move(test)};
}

void save_dataset(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    const int d = data.load_dim();
    for (int j = 0; j < d; ++j) out << "l_" << (j + 1) << ",";
    out << "feasible,cost,solve_time\n";
    for (const auto& s : data.samples) {
        for (int j = 0; j < d; ++j) out << fmt_double(s.load[j]) << ",";
        out << (s.feasible ? 1 : 0) << ",";
        if (s.cost) out << fmt_double(*s.cost);
        out << "," << fmt_double(s.solve_time) << "\n";
    }
    std::ofstream meta(path + ".meta");
    meta << "case_name=" << data.case_name << "\n"
         << "seed=" << data.sampler_metadata.seed << "\n"
         << "burn_in=" << data.sampler_metadata.burn_in << "\n"
         << "thinning=" << data.sampler_metadata.thinning << "\n"
         << "alpha_min=" << fmt_double(data.sampler_metadata.alpha_min) << "\n"
         << "alpha_max=" << fmt_double(data.sampler_metadata.alpha_max) << "\n"
         << "rng=mt19937_64/splitmix64-derived\n";
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);

    int d = 0;
    {
        std::stringstream ss(line);
        std::string col;
        std::vector<std::string> cols;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        if (cols.size() < 4 || cols[cols.size() - 3] != "feasible" ||
            cols[cols.size() - 2] != "cost" || cols.back() != "solve_time")
            throw std::runtime_error("malformed dataset header in " + path);
        d = static_cast<int>(cols.size()) - 3;
    }

    Dataset data;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f;
        std::vector<std::string> fields;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (line.back() == ',') fields.push_back("");
        if (static_cast<int>(fields.size()) != d + 3)
            throw std::runtime_error("dataset row " + std::to_string(row) + ": expected " +
                                     std::to_string(d + 3) + " fields, got " +
                                     std::to_string(fields.size()));
        LabeledSample s;
        s.load.resize(d);
        try {
            for (int j = 0; j < d; ++j) s.load[j] = std::stod(fields[j]);
            s.feasible = std::stoi(fields[d]) != 0;
            if (!fields[d + 1].empty()) s.cost = std::stod(fields[d + 1]);
            s.solve_time = std::stod(fields[d + 2]);
        } catch (const std::exception&) {
            throw std::runtime_error("dataset row " + std::to_string(row) + ": bad numeric field");
        }
        if (s.feasible != s.cost.has_value())
            throw std::runtime_error("dataset row " + std::to_string(row) +
                                     ": cost presence must match feasibility flag");
        data.samples.push_back(std::move(s));
    }

    std::ifstream meta(path + ".meta");
    if (meta) {
        while (std::getline(meta, line)) {
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string k = line.substr(0, eq), v = line.substr(eq + 1);
            if (k == "case_name") data.case_name = v;
            else if (k == "seed") data.sampler_metadata.seed = std::stoull(v);
            else if (k == "burn_in") data.sampler_metadata.burn_in = std::stoi(v);
            else if (k == "thinning") data.sampler_metadata.thinning = std::stoi(v);
            else if (k == "alpha_min") data.sampler_metadata.alpha_min = std::stod(v);
            else if (k == "alpha_max") data.sampler_metadata.alpha_max = std::stod(v);
        }
    }
    return data;
}

}  // namespace opfproxy
