// runner.hpp — experiment specification, seed sweeps and CSV reports.
#pragma once
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rwsgd/algorithms.hpp"
#include "rwsgd/chain.hpp"
#include "rwsgd/config.hpp"
#include "rwsgd/errors.hpp"
#include "rwsgd/graph.hpp"
#include "rwsgd/objective.hpp"
#include "rwsgd/privacy.hpp"

namespace rwsgd {

// One entry of the variant list: "uniform", "weighted", "gossip",
// "private-weighted" or "private-weighted:<mechanism>".
struct VariantSpec {
    std::string label;
    Variant variant = Variant::Uniform;
    std::optional<Mechanism> mechanism;
};

inline VariantSpec parse_variant_spec(const std::string& text) {
    VariantSpec vs;
    vs.label = text;
    const auto colon = text.find(':');
    vs.variant = parse_variant(text.substr(0, colon));
    if (colon != std::string::npos) {
        if (vs.variant != Variant::PrivateWeighted)
            throw ConfigError("variant '" + text + "': only private-weighted takes a mechanism");
        vs.mechanism = parse_mechanism(text.substr(colon + 1));
    }
    return vs;
}

struct ExperimentSpec {
    // graph
    std::size_t n = 100;
    double p = 0.3;
    std::optional<std::uint64_t> graph_seed;  // unset: derived from each master seed
    std::string graph_file;
    // dataset
    std::size_t d = 5;
    std::vector<double> mu{1.0};  // one value is broadcast to all d coordinates
    double v = 10.0;
    std::optional<std::uint64_t> data_seed;  // unset: derived from each master seed
    std::string data_file;
    // runs
    double q = 0.75;
    std::uint64_t iterations = 100000;
    std::uint64_t eval_every = 100;
    double radius = 100.0;
    std::vector<std::uint64_t> seeds{1};
    std::vector<VariantSpec> variants{parse_variant_spec("uniform")};
    bool noisy_gradient_scale = false;
    unsigned jobs = 1;
    // privacy (private-weighted variants)
    PrivacySpec privacy;
    bool solve_theta = false;  // theta from (epsilon, delta) and the dataset's sup/inf L

    std::string out_dir = ".";

    Vector mu_vector() const {
        if (mu.size() == 1) return Vector::Constant(static_cast<Eigen::Index>(d), mu[0]);
        Vector out(static_cast<Eigen::Index>(mu.size()));
        for (std::size_t k = 0; k < mu.size(); ++k) out[static_cast<Eigen::Index>(k)] = mu[k];
        return out;
    }

    bool fixed_instance() const {
        return (graph_seed || !graph_file.empty()) && (data_seed || !data_file.empty());
    }

    bool has_private_variant() const {
        return std::any_of(variants.begin(), variants.end(),
                           [](const VariantSpec& v) { return v.variant == Variant::PrivateWeighted; });
    }

    void validate() const {
        if (graph_file.empty()) {
            detail::require(n >= 2, "graph.n: must be >= 2");
            detail::require(p > 0.0 && p <= 1.0, "graph.p: must lie in (0, 1]");
        }
        if (data_file.empty()) {
            detail::require(d >= 1, "data.d: must be >= 1");
            detail::require(mu.size() == 1 || mu.size() == d,
                            "data.mu: expected 1 or d=" + std::to_string(d) + " values");
            detail::require(v > 0.0, "data.v: must be positive");
        }
        detail::require(q > 0.5 && q < 1.0, "run.q: must lie in (0.5, 1)");
        detail::require(eval_every >= 1, "run.eval_every: must be >= 1");
        detail::require(radius > 0.0 && std::isfinite(radius), "run.radius: must be positive");
        detail::require(!seeds.empty(), "run.seeds: need at least one seed");
        detail::require(!variants.empty(), "run.variants: need at least one variant");
        detail::require(jobs >= 1, "run.jobs: must be >= 1");
        if (has_private_variant()) {
            if (solve_theta) {
                detail::require(privacy.delta > 0.0 && privacy.delta <= 1.0,
                                "privacy.delta: must lie in (0, 1] when solving for theta");
            } else {
                privacy.validate();
            }
        }
    }

    // Every resolved parameter, in a fixed order, for report headers.
    std::vector<std::pair<std::string, std::string>> resolved() const {
        auto num = [](double x) {
            std::ostringstream os;
            os << std::setprecision(17) << x;
            return os.str();
        };
        auto join = [&](const auto& xs, auto fmt) {
            std::string s;
            for (const auto& x : xs) s += (s.empty() ? "" : ",") + fmt(x);
            return s;
        };
        std::vector<std::pair<std::string, std::string>> out;
        out.emplace_back("graph.n", std::to_string(n));
        out.emplace_back("graph.p", num(p));
        out.emplace_back("graph.seed", graph_seed ? std::to_string(*graph_seed) : "per-master-seed");
        out.emplace_back("graph.file", graph_file.empty() ? "-" : graph_file);
        out.emplace_back("data.d", std::to_string(d));
        out.emplace_back("data.mu", join(mu, num));
        out.emplace_back("data.v", num(v));
        out.emplace_back("data.seed", data_seed ? std::to_string(*data_seed) : "per-master-seed");
        out.emplace_back("data.file", data_file.empty() ? "-" : data_file);
        out.emplace_back("run.q", num(q));
        out.emplace_back("run.T", std::to_string(iterations));
        out.emplace_back("run.eval_every", std::to_string(eval_every));
        out.emplace_back("run.radius", num(radius));
        out.emplace_back("run.seeds", join(seeds, [](std::uint64_t s) { return std::to_string(s); }));
        out.emplace_back("run.variants", join(variants, [](const VariantSpec& v) { return v.label; }));
        out.emplace_back("run.noisy_gradient_scale", noisy_gradient_scale ? "true" : "false");
        out.emplace_back("privacy.mechanism", std::string(to_string(privacy.mechanism)));
        out.emplace_back("privacy.theta", solve_theta ? "solved" : num(privacy.theta));
        out.emplace_back("privacy.epsilon", num(privacy.epsilon));
        out.emplace_back("privacy.delta", num(privacy.delta));
        out.emplace_back("privacy.l_min", num(privacy.l_min));
        out.emplace_back("privacy.l_max", num(privacy.l_max));
        return out;
    }

    static ExperimentSpec from_config(const Config& c) {
        ExperimentSpec s;
        s.n = c.get_u64("graph.n", s.n);
        s.p = c.get_double("graph.p", s.p);
        if (c.has("graph.seed")) s.graph_seed = c.get_u64("graph.seed", 0);
        s.graph_file = c.get("graph.file", "");
        s.d = c.get_u64("data.d", s.d);
        if (c.has("data.mu")) {
            s.mu.clear();
            for (const auto& x : Config::split_list(c.get("data.mu", "")))
                s.mu.push_back(Config::to_double("data.mu", x));
        }
        s.v = c.get_double("data.v", s.v);
        if (c.has("data.seed")) s.data_seed = c.get_u64("data.seed", 0);
        s.data_file = c.get("data.file", "");
        s.q = c.get_double("run.q", s.q);
        s.iterations = c.get_u64("run.T", s.iterations);
        s.eval_every = c.get_u64("run.eval_every", s.eval_every);
        s.radius = c.get_double("run.radius", s.radius);
        if (c.has("run.seeds")) {
            s.seeds.clear();
            const auto items = Config::split_list(c.get("run.seeds", ""));
            if (items.size() == 1 && items[0].find("..") == std::string::npos) {
                // a bare count N means seeds 1..N
                const std::uint64_t count = Config::to_u64("run.seeds", items[0]);
                for (std::uint64_t k = 1; k <= count; ++k) s.seeds.push_back(k);
            } else {
                for (const auto& it : items) {
                    const auto dots = it.find("..");
                    if (dots == std::string::npos) {
                        s.seeds.push_back(Config::to_u64("run.seeds", it));
                    } else {
                        const auto lo = Config::to_u64("run.seeds", it.substr(0, dots));
                        const auto hi = Config::to_u64("run.seeds", it.substr(dots + 2));
                        for (auto k = lo; k <= hi; ++k) s.seeds.push_back(k);
                    }
                }
            }
        }
        if (c.has("run.variants")) {
            s.variants.clear();
            for (const auto& it : Config::split_list(c.get("run.variants", "")))
                s.variants.push_back(parse_variant_spec(it));
        }
        s.noisy_gradient_scale = c.get_bool("run.noisy_gradient_scale", false);
        s.jobs = static_cast<unsigned>(c.get_u64("run.jobs", 1));
        if (c.has("privacy.mechanism")) s.privacy.mechanism = parse_mechanism(c.get("privacy.mechanism", ""));
        s.privacy.theta = c.get_double("privacy.theta", s.privacy.theta);
        s.privacy.epsilon = c.get_double("privacy.epsilon", s.privacy.epsilon);
        s.privacy.delta = c.get_double("privacy.delta", s.privacy.delta);
        s.privacy.l_min = c.get_double("privacy.l_min", s.privacy.l_min);
        s.privacy.l_max = c.get_double("privacy.l_max", s.privacy.l_max);
        s.solve_theta = c.get_bool("privacy.solve_theta", false);
        s.out_dir = c.get("output.dir", s.out_dir);
        s.validate();
        return s;
    }
};

// Graph, dataset and optimum for one master seed.
struct Instance {
    Graph graph;
    Dataset data;
    Optimum opt;
    std::optional<double> theta;  // resolved noise scale for private variants
};

inline std::shared_ptr<const Instance> make_instance(const ExperimentSpec& spec,
                                                     std::uint64_t master_seed) {
    auto inst = std::make_shared<Instance>();
    if (!spec.graph_file.empty()) {
        std::ifstream in(spec.graph_file);
        if (!in) throw ConfigError("graph.file: cannot open '" + spec.graph_file + "'");
        inst->graph = read_edge_list(in);
    } else {
        const std::uint64_t gs = derive_seed(spec.graph_seed.value_or(master_seed), "graph");
        inst->graph = erdos_renyi(spec.n, spec.p, gs);
    }
    if (!spec.data_file.empty()) {
        std::ifstream in(spec.data_file);
        if (!in) throw ConfigError("data.file: cannot open '" + spec.data_file + "'");
        inst->data = read_dataset_csv(in);
    } else {
        const std::uint64_t ds = derive_seed(spec.data_seed.value_or(master_seed), "data");
        inst->data = generate_dataset(inst->graph.size(), spec.d, spec.mu_vector(), spec.v, ds);
    }
    if (inst->data.size() != inst->graph.size())
        throw ConfigError("dataset has " + std::to_string(inst->data.size()) +
                          " rows but graph has " + std::to_string(inst->graph.size()) + " nodes");
    inst->opt = solve_optimal(inst->data, FeasibleSet(spec.radius));
    if (spec.has_private_variant()) {
        if (spec.solve_theta) {
            const auto l = inst->data.lipschitz();
            const double sup_l = *std::max_element(l.begin(), l.end());
            const double inf_l = *std::min_element(l.begin(), l.end());
            const auto theta = solve_theta(spec.privacy.epsilon, spec.privacy.delta, sup_l, inf_l);
            if (!theta) {
                std::ostringstream msg;
                msg << "no theta achieves (epsilon=" << spec.privacy.epsilon
                    << ", delta=" << spec.privacy.delta << ") for sup L=" << sup_l
                    << ", inf L=" << inf_l << "; smallest reachable delta is "
                    << delta_floor(spec.privacy.epsilon, sup_l, inf_l);
                throw NumericalError(msg.str());
            }
            inst->theta = *theta;
        } else {
            inst->theta = spec.privacy.theta;
        }
    }
    return inst;
}

inline RunConfig run_config_for(const ExperimentSpec& spec, const VariantSpec& vs,
                                std::uint64_t seed, const Instance& inst) {
    RunConfig cfg;
    cfg.q = spec.q;
    cfg.iterations = spec.iterations;
    cfg.seed = seed;
    cfg.variant = vs.variant;
    cfg.feasible_radius = spec.radius;
    cfg.eval_every = spec.eval_every;
    cfg.noisy_gradient_scale = spec.noisy_gradient_scale;
    if (vs.variant == Variant::PrivateWeighted) {
        PrivacySpec ps = spec.privacy;
        if (vs.mechanism) ps.mechanism = *vs.mechanism;
        ps.theta = inst.theta.value_or(ps.theta);
        cfg.privacy = ps;
    }
    return cfg;
}

struct AggregateRow {
    std::string variant;
    std::uint64_t k = 0;
    std::uint64_t comp = 0;
    double mean_gap = 0.0;
    double sd_gap = 0.0;
    std::size_t count = 0;
};

// Per-record mean and sample standard deviation of the gap across seeds.
inline std::vector<AggregateRow> aggregate(const std::string& label,
                                           const std::vector<RunTrace>& traces) {
    std::vector<AggregateRow> rows;
    if (traces.empty()) return rows;
    const std::size_t len = traces.front().records.size();
    for (const auto& t : traces)
        if (t.records.size() != len) throw NumericalError("aggregate: traces differ in length");
    const double m = static_cast<double>(traces.size());
    for (std::size_t r = 0; r < len; ++r) {
        AggregateRow row;
        row.variant = label;
        row.k = traces.front().records[r].k;
        row.comp = traces.front().records[r].comp;
        row.count = traces.size();
        double sum = 0.0;
        for (const auto& t : traces) sum += t.records[r].gap;
        row.mean_gap = sum / m;
        double ss = 0.0;
        for (const auto& t : traces) {
            const double dev = t.records[r].gap - row.mean_gap;
            ss += dev * dev;
        }
        row.sd_gap = traces.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

struct ExperimentResult {
    std::vector<VariantSpec> variants;
    std::vector<std::uint64_t> seeds;
    std::vector<std::vector<RunTrace>> traces;  // [variant][seed]
    std::vector<std::optional<double>> thetas;  // per seed
    std::vector<AggregateRow> aggregate;

    const std::vector<RunTrace>& traces_for(const std::string& label) const {
        for (std::size_t i = 0; i < variants.size(); ++i)
            if (variants[i].label == label) return traces[i];
        throw ConfigError("no variant labelled '" + label + "'");
    }

    // Mean gap of `label` at the last record whose computation count is at
    // most `comp`.
    double mean_gap_at_comp(const std::string& label, std::uint64_t comp) const {
        const AggregateRow* best = nullptr;
        for (const auto& row : aggregate)
            if (row.variant == label && row.comp <= comp && (!best || row.comp >= best->comp))
                best = &row;
        if (!best) throw ConfigError("no aggregate rows for '" + label + "'");
        return best->mean_gap;
    }

    double final_mean_gap(const std::string& label) const {
        const AggregateRow* last = nullptr;
        for (const auto& row : aggregate)
            if (row.variant == label) last = &row;
        if (!last) throw ConfigError("no aggregate rows for '" + label + "'");
        return last->mean_gap;
    }
};

namespace detail {
template <class F>
void parallel_for(std::size_t count, unsigned jobs, F&& body) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}
}  // namespace detail

// Runs every (variant, seed) pair. Output ordering is fixed by the ExperimentSpec,
// independent of completion order.
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult res;
    res.variants = spec.variants;
    res.seeds = spec.seeds;

    std::vector<std::shared_ptr<const Instance>> instances(spec.seeds.size());
    if (spec.fixed_instance()) {
        auto shared = make_instance(spec, spec.seeds.front());
        std::fill(instances.begin(), instances.end(), shared);
    } else {
        detail::parallel_for(spec.seeds.size(), spec.jobs,
                             [&](std::size_t s) { instances[s] = make_instance(spec, spec.seeds[s]); });
    }
    for (const auto& inst : instances) res.thetas.push_back(inst->theta);

    const std::size_t nv = spec.variants.size(), ns = spec.seeds.size();
    res.traces.assign(nv, std::vector<RunTrace>(ns));
    detail::parallel_for(nv * ns, spec.jobs, [&](std::size_t task) {
        const std::size_t vi = task / ns, si = task % ns;
        const Instance& inst = *instances[si];
        const RunConfig cfg = run_config_for(spec, spec.variants[vi], spec.seeds[si], inst);
        res.traces[vi][si] = run(inst.graph, inst.data, cfg, inst.opt);
    });
    for (std::size_t vi = 0; vi < nv; ++vi) {
        auto rows = aggregate(spec.variants[vi].label, res.traces[vi]);
        res.aggregate.insert(res.aggregate.end(), rows.begin(), rows.end());
    }
    return res;
}

namespace detail {
inline std::ofstream open_output(const std::filesystem::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write output file '" + path.string() + "'");
    out << std::setprecision(17);
    return out;
}

inline void write_header(std::ostream& os, const std::string& kind, const ExperimentSpec& spec) {
    os << "# rwsgd " << kind << '\n';
    for (const auto& [k, v] : spec.resolved()) os << "# " << k << " = " << v << '\n';
}

inline std::string file_label(const std::string& label) {
    std::string s = label;
    std::replace(s.begin(), s.end(), ':', '_');
    return s;
}
}  // namespace detail

inline std::filesystem::path trace_path(const std::filesystem::path& dir, const std::string& label,
                                        std::uint64_t seed) {
    return dir / ("trace_" + detail::file_label(label) + "_seed" + std::to_string(seed) + ".csv");
}

inline void write_trace_csv(std::ostream& os, const ExperimentSpec& spec, const std::string& label,
                            const RunTrace& trace, std::optional<double> theta) {
    detail::write_header(os, "trace", spec);
    os << "# variant = " << label << '\n';
    os << "# seed = " << trace.seed << '\n';
    os << "# f_star = " << trace.f_star << '\n';
    if (theta && trace.variant == Variant::PrivateWeighted) os << "# theta = " << *theta << '\n';
    os << "k,node,gap,comm,comp\n";
    for (const auto& r : trace.records)
        os << r.k << ',' << r.node << ',' << r.gap << ',' << r.comm << ',' << r.comp << '\n';
}

inline void write_aggregate_csv(std::ostream& os, const ExperimentSpec& spec,
                                const std::vector<AggregateRow>& rows) {
    detail::write_header(os, "aggregate", spec);
    os << "variant,k,comp,mean_gap,sd_gap,seeds\n";
    for (const auto& r : rows)
        os << r.variant << ',' << r.k << ',' << r.comp << ',' << r.mean_gap << ',' << r.sd_gap << ','
           << r.count << '\n';
}

inline void write_experiment(const ExperimentResult& res, const ExperimentSpec& spec,
                             const std::filesystem::path& dir) {
    for (std::size_t vi = 0; vi < res.variants.size(); ++vi)
        for (std::size_t si = 0; si < res.seeds.size(); ++si) {
            auto out = detail::open_output(trace_path(dir, res.variants[vi].label, res.seeds[si]));
            write_trace_csv(out, spec, res.variants[vi].label, res.traces[vi][si], res.thetas[si]);
        }
    auto out = detail::open_output(dir / "aggregate.csv");
    write_aggregate_csv(out, spec, res.aggregate);
}

inline ExperimentResult cmd_run(const ExperimentSpec& spec) {
    ExperimentResult res = run_experiment(spec);
    write_experiment(res, spec, spec.out_dir);
    return res;
}

// Reads back a trace CSV written by write_trace_csv.
inline std::vector<TraceRecord> read_trace_csv(std::istream& is) {
    std::vector<TraceRecord> out;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "k,node,gap,comm,comp") throw ConfigError("trace csv: unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        std::istringstream ls(line);
        TraceRecord r;
        char c1, c2, c3, c4;
        if (!(ls >> r.k >> c1 >> r.node >> c2 >> r.gap >> c3 >> r.comm >> c4 >> r.comp))
            throw ConfigError("trace csv: malformed row '" + line + "'");
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------- privacy

struct PrivacyTableRow {
    double epsilon, theta, branch_upper, branch_lower, delta;
};

struct ThetaSolveRow {
    double epsilon, target_delta;
    std::optional<double> theta;
    double delta_floor;
};

struct PrivacyTable {
    std::vector<PrivacyTableRow> rows;
    std::vector<ThetaSolveRow> solved;
};

inline PrivacyTable cmd_privacy_table(const std::vector<double>& epsilons,
                                      const std::vector<double>& thetas, double sup_l, double inf_l,
                                      const std::vector<double>& target_deltas = {}) {
    if (!(inf_l > 0.0) || !(sup_l > inf_l))
        throw ConfigError("degenerate sensitivity range: need sup L > inf L > 0");
    PrivacyTable tbl;
    for (double th : thetas)
        for (double eps : epsilons) {
            const auto b = delta_bound_branches(eps, th, sup_l, inf_l);
            tbl.rows.push_back({eps, th, b.branch_upper, b.branch_lower, b.delta});
        }
    for (double eps : epsilons)
        for (double target : target_deltas)
            tbl.solved.push_back({eps, target, solve_theta(eps, target, sup_l, inf_l),
                                  delta_floor(eps, sup_l, inf_l)});
    return tbl;
}

inline void write_privacy_table_csv(std::ostream& os, const PrivacyTable& tbl) {
    os << std::setprecision(17);
    os << "epsilon,theta,delta_branch1,delta_branch2,delta\n";
    for (const auto& r : tbl.rows)
        os << r.epsilon << ',' << r.theta << ',' << r.branch_upper << ',' << r.branch_lower << ','
           << r.delta << '\n';
}

inline void write_theta_solve_csv(std::ostream& os, const PrivacyTable& tbl) {
    os << std::setprecision(17);
    os << "epsilon,target_delta,theta,feasible,delta_floor\n";
    for (const auto& r : tbl.solved) {
        os << r.epsilon << ',' << r.target_delta << ',';
        if (r.theta) os << *r.theta; else os << "nan";
        os << ',' << (r.theta ? "true" : "false") << ',' << r.delta_floor << '\n';
    }
}

// ------------------------------------------------------------ diagnostics

struct DiagnosticRow {
    std::string quantity;
    std::uint64_t seed;
    double value;
};

inline std::vector<DiagnosticRow> cmd_diagnostics(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<DiagnosticRow> rows;
    const std::size_t seeds = spec.fixed_instance() ? 1 : spec.seeds.size();
    for (std::size_t si = 0; si < seeds; ++si) {
        const std::uint64_t seed = spec.seeds[si];
        const auto inst = make_instance(spec, seed);
        const auto l = inst->data.lipschitz();
        const double sup_l = *std::max_element(l.begin(), l.end());
        const double inf_l = *std::min_element(l.begin(), l.end());
        rows.push_back({"n", seed, static_cast<double>(inst->graph.size())});
        rows.push_back({"sup_L", seed, sup_l});
        rows.push_back({"inf_L", seed, inf_l});
        rows.push_back({"mean_L", seed, inst->data.mean_lipschitz()});
        rows.push_back({"sigma2", seed, gradient_residual(inst->opt.w, inst->data)});
        rows.push_back({"f_star", seed, inst->opt.f});
        const auto pu = build_uniform_matrix(inst->graph);
        rows.push_back({"lambda_Pu", seed, lambda_p(pu, stationary_distribution(pu))});
        const auto pw = build_weighted_matrix(inst->graph, l);
        rows.push_back({"lambda_Pw", seed, lambda_p(pw, stationary_distribution(pw))});
        if (spec.has_private_variant()) {
            PrivacySpec ps = spec.privacy;
            ps.theta = inst->theta.value_or(ps.theta);
            for (const auto& vs : spec.variants) {
                if (vs.variant != Variant::PrivateWeighted) continue;
                if (vs.mechanism) ps.mechanism = *vs.mechanism;
                for (std::uint64_t ps_seed : spec.seeds) {
                    Rng rng(ps_seed, "privacy");
                    const auto noisy = privatize_all(l, ps, rng);
                    const auto pr = build_weighted_matrix(inst->graph, noisy.values());
                    rows.push_back({"lambda_PwR[" + vs.label + "]", ps_seed,
                                    lambda_p(pr, stationary_distribution(pr))});
                }
            }
        }
    }
    return rows;
}

inline void write_diagnostics_csv(std::ostream& os, const ExperimentSpec& spec,
                                  const std::vector<DiagnosticRow>& rows) {
    os << std::setprecision(17);
    detail::write_header(os, "diagnostics", spec);
    os << "quantity,seed,value\n";
    for (const auto& r : rows) os << r.quantity << ',' << r.seed << ',' << r.value << '\n';
}

// ------------------------------------------------------------------ sweep

struct SweepRow {
    std::string value;
    std::string variant;
    double final_mean_gap;
};

// Re-runs the experiment once per value of `key`, each in its own
// subdirectory "<key>=<value>" of the output directory.
inline std::vector<SweepRow> cmd_sweep(const Config& base, const std::string& key,
                                       const std::vector<std::string>& values,
                                       const std::filesystem::path& dir) {
    detail::require(!values.empty(), "sweep: no values given");
    std::vector<SweepRow> rows;
    for (const auto& value : values) {
        Config c = base;
        c.set(key, value);
        ExperimentSpec spec = ExperimentSpec::from_config(c);
        spec.out_dir = (dir / (key + "=" + value)).string();
        const auto res = cmd_run(spec);
        for (const auto& vs : res.variants)
            rows.push_back({value, vs.label, res.final_mean_gap(vs.label)});
    }
    auto out = detail::open_output(dir / "sweep.csv");
    out << "# rwsgd sweep over " << key << '\n';
    out << "value,variant,final_mean_gap\n";
    for (const auto& r : rows) out << r.value << ',' << r.variant << ',' << r.final_mean_gap << '\n';
    return rows;
}

}  // namespace rwsgd
