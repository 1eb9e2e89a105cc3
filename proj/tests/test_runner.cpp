#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rwsgd/runner.hpp"

using namespace rwsgd;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("rwsgd_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Config parse(const std::string& text) {
    std::istringstream is(text);
    return Config::parse(is);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(RWSGD_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kTiny = R"(
# tiny fixed-seed instance
[graph]
n = 8
p = 0.5
seed = 3
[data]
d = 2
v = 4
seed = 3
[run]
T = 200
eval_every = 50
seeds = 1..3
variants = uniform, weighted, gossip, private-weighted
[privacy]
theta = 0.5
)";

}  // namespace

TEST(Config, ParsesSectionsAndComments) {
    const Config c = parse("top = 1\n[graph]\n  n = 12   # nodes\np=0.25\n\n[run]\nT = 1e5\nflag = yes\n");
    EXPECT_EQ(c.get("top", ""), "1");
    EXPECT_EQ(c.get_u64("graph.n", 0), 12u);
    EXPECT_DOUBLE_EQ(c.get_double("graph.p", 0), 0.25);
    EXPECT_EQ(c.get_u64("run.T", 0), 100000u);
    EXPECT_TRUE(c.get_bool("run.flag", false));
    EXPECT_FALSE(c.has("run.missing"));
    EXPECT_THROW(parse("[graph\nn = 1\n"), ConfigError);
    EXPECT_THROW(parse("just words\n"), ConfigError);
    EXPECT_THROW(parse("[graph]\nn = abc\n").get_u64("graph.n", 0), ConfigError);
}

TEST(Config, SpecFromConfig) {
    const auto spec = ExperimentSpec::from_config(parse(kTiny));
    EXPECT_EQ(spec.n, 8u);
    EXPECT_EQ(spec.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
    ASSERT_EQ(spec.variants.size(), 4u);
    EXPECT_EQ(spec.variants[3].variant, Variant::PrivateWeighted);
    EXPECT_TRUE(spec.fixed_instance());

    EXPECT_EQ(ExperimentSpec::from_config(parse("[run]\nseeds = 4\n")).seeds.size(), 4u);
    EXPECT_EQ(ExperimentSpec::from_config(parse("[run]\nseeds = 7, 9\n")).seeds,
              (std::vector<std::uint64_t>{7, 9}));
    const auto lap = ExperimentSpec::from_config(parse("[run]\nvariants = private-weighted:laplace\n"));
    EXPECT_EQ(lap.variants[0].mechanism, Mechanism::Laplace);
}

TEST(Config, InvalidFieldsNamed) {
    try {
        ExperimentSpec::from_config(parse("[run]\nq = 1.5\n"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("run.q"), std::string::npos);
    }
    EXPECT_THROW(ExperimentSpec::from_config(parse("[run]\nvariants = nope\n")), ConfigError);
    EXPECT_THROW(ExperimentSpec::from_config(parse("[run]\nvariants = uniform:gamma\n")), ConfigError);
    EXPECT_THROW(ExperimentSpec::from_config(parse("[data]\nd = 3\nmu = 1, 2\n")), ConfigError);
    EXPECT_THROW(ExperimentSpec::from_config(parse("[graph]\np = 0\n")), ConfigError);
}

TEST(Runner, AggregateRecomputableFromTraces) {
    auto spec = ExperimentSpec::from_config(parse(kTiny));
    const fs::path dir = scratch_dir("aggregate");
    spec.out_dir = dir.string();
    const auto res = cmd_run(spec);

    // recompute mean and sample sd per (variant, k) from the per-seed CSVs
    for (const auto& vs : spec.variants) {
        std::vector<std::vector<TraceRecord>> per_seed;
        for (auto s : spec.seeds) {
            std::ifstream in(trace_path(dir, vs.label, s));
            per_seed.push_back(read_trace_csv(in));
        }
        for (const auto& row : res.aggregate) {
            if (row.variant != vs.label) continue;
            std::vector<double> gaps;
            for (const auto& recs : per_seed)
                for (const auto& r : recs)
                    if (r.k == row.k) gaps.push_back(r.gap);
            ASSERT_EQ(gaps.size(), spec.seeds.size());
            double mean = 0.0;
            for (double g : gaps) mean += g;
            mean /= gaps.size();
            double ss = 0.0;
            for (double g : gaps) ss += (g - mean) * (g - mean);
            const double sd = std::sqrt(ss / (gaps.size() - 1));
            EXPECT_NEAR(row.mean_gap, mean, 1e-12 * std::max(1.0, mean));
            EXPECT_NEAR(row.sd_gap, sd, 1e-12 * std::max(1.0, sd));
        }
    }

    // the aggregate file agrees with the in-memory rows
    std::size_t data_rows = 0;
    for (const auto& l : lines(slurp(dir / "aggregate.csv")))
        if (!l.empty() && l[0] != '#' && l.rfind("variant,", 0) != 0) ++data_rows;
    EXPECT_EQ(data_rows, res.aggregate.size());
}

TEST(Runner, TraceCsvMatchesGolden) {
    auto spec = ExperimentSpec::from_config(parse(kTiny));
    const fs::path dir = scratch_dir("golden");
    spec.out_dir = dir.string();
    cmd_run(spec);
    const auto got = lines(slurp(trace_path(dir, "weighted", 2)));
    const auto want = lines(slurp(fs::path(RWSGD_GOLDEN_DIR) / "trace_weighted_seed2.csv"));
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        if (got[i].empty() || got[i][0] == '#' || got[i].rfind("k,", 0) == 0) {
            EXPECT_EQ(got[i], want[i]);
            continue;
        }
        // numeric rows: integers exact, gap to 1e-9 relative
        std::istringstream g(got[i]), w(want[i]);
        TraceRecord a, b;
        char c;
        g >> a.k >> c >> a.node >> c >> a.gap >> c >> a.comm >> c >> a.comp;
        w >> b.k >> c >> b.node >> c >> b.gap >> c >> b.comm >> c >> b.comp;
        EXPECT_EQ(a.k, b.k);
        EXPECT_EQ(a.node, b.node);
        EXPECT_EQ(a.comm, b.comm);
        EXPECT_EQ(a.comp, b.comp);
        EXPECT_NEAR(a.gap, b.gap, 1e-9 * std::max(1.0, std::abs(b.gap))) << "line " << i;
    }
}

TEST(Runner, HeaderEmbedsResolvedConfiguration) {
    auto spec = ExperimentSpec::from_config(parse(kTiny));
    const fs::path dir = scratch_dir("header");
    spec.out_dir = dir.string();
    cmd_run(spec);
    for (const fs::path& f : {trace_path(dir, "gossip", 1), dir / "aggregate.csv"}) {
        const std::string text = slurp(f);
        for (const auto& [k, v] : spec.resolved())
            EXPECT_NE(text.find("# " + k + " = " + v), std::string::npos) << f << ' ' << k;
    }
    EXPECT_NE(slurp(trace_path(dir, "private-weighted", 1)).find("# theta = 0.5"), std::string::npos);
}

TEST(Runner, ParallelOutputMatchesSerial) {
    auto spec = ExperimentSpec::from_config(parse(kTiny));
    spec.graph_seed.reset();
    spec.data_seed.reset();
    const auto serial = run_experiment(spec);
    spec.jobs = 4;
    const auto parallel = run_experiment(spec);
    for (std::size_t v = 0; v < serial.traces.size(); ++v)
        for (std::size_t s = 0; s < serial.traces[v].size(); ++s)
            EXPECT_EQ(serial.traces[v][s].records, parallel.traces[v][s].records);
}

TEST(Runner, ZeroIterationRun) {
    auto spec = ExperimentSpec::from_config(parse(kTiny));
    spec.iterations = 0;
    const auto res = run_experiment(spec);
    for (const auto& per_variant : res.traces)
        for (const auto& t : per_variant) {
            ASSERT_EQ(t.records.size(), 1u);
            EXPECT_EQ(t.records[0].k, 0u);
        }
}

TEST(Runner, UnwritableOutput) {
    auto spec = ExperimentSpec::from_config(parse(kTiny));
    spec.out_dir = "/proc/rwsgd-not-writable";
    EXPECT_THROW(cmd_run(spec), ConfigError);
}

TEST(Runner, PrivacyTable) {
    const std::vector<double> eps{0, 0.5, 1, 2, 3, 4, 50};
    const auto tbl = cmd_privacy_table(eps, {0.2, 1.0, 5.0}, 10.0, 1.0, {0.06, 0.08, 0.1});
    ASSERT_EQ(tbl.rows.size(), eps.size() * 3);
    for (std::size_t r = 1; r < tbl.rows.size(); ++r) {
        if (tbl.rows[r].theta == tbl.rows[r - 1].theta) {
            EXPECT_LE(tbl.rows[r].delta, tbl.rows[r - 1].delta + 1e-15);
        }
    }
    for (const auto& row : tbl.rows) {
        EXPECT_DOUBLE_EQ(row.delta, std::max(row.branch_upper, row.branch_lower));
        if (row.epsilon == 50 && row.theta == 1.0) {
            // lower branch in closed form: P(1, t) = 1 - exp(-t)
            EXPECT_NEAR(row.delta, -std::expm1(-std::exp((-50 + std::lgamma(10.0)) / 9)), 1e-12);
        }
    }
    ASSERT_EQ(tbl.solved.size(), eps.size() * 3);
    for (const auto& s : tbl.solved) {
        EXPECT_EQ(s.theta.has_value(), s.target_delta > s.delta_floor) << s.epsilon << ' ' << s.target_delta;
        if (s.theta) {
            EXPECT_LE(delta_bound(s.epsilon, *s.theta, 10.0, 1.0), s.target_delta);
        }
    }

    std::ostringstream os;
    write_privacy_table_csv(os, tbl);
    EXPECT_EQ(lines(os.str()).front(), "epsilon,theta,delta_branch1,delta_branch2,delta");
    EXPECT_THROW(cmd_privacy_table(eps, {1.0}, 2.0, 2.0), ConfigError);
}

TEST(Runner, DiagnosticsOrderingAndComplete) {
    auto spec = ExperimentSpec::from_config(parse(kTiny));
    const auto rows = cmd_diagnostics(spec);
    auto get = [&](const std::string& q) {
        for (const auto& r : rows)
            if (r.quantity == q) return r.value;
        ADD_FAILURE() << q;
        return std::nan("");
    };
    EXPECT_EQ(get("n"), 8.0);
    EXPECT_GE(get("sup_L"), get("mean_L"));
    EXPECT_GE(get("mean_L"), get("inf_L"));
    EXPECT_GE(get("sigma2"), 0.0);
    std::size_t private_rows = 0;
    for (const auto& r : rows) private_rows += r.quantity.rfind("lambda_PwR", 0) == 0;
    EXPECT_EQ(private_rows, spec.seeds.size());
}

TEST(Runner, DiagnosticsEqualLipschitzAndCompleteGraph) {
    const fs::path dir = scratch_dir("diag");
    {
        std::ofstream g(dir / "k5.txt");
        write_edge_list(g, erdos_renyi(5, 1.0, 1));
        std::ofstream d(dir / "data.csv");
        d << "y,x0,x1\n";
        for (int i = 0; i < 5; ++i) d << (i % 2 ? 1 : -1) << ",0.6,0.8\n";
    }
    auto spec = ExperimentSpec::from_config(
        parse("[graph]\nfile = " + (dir / "k5.txt").string() + "\n[data]\nfile = " +
              (dir / "data.csv").string() + "\n"));
    const auto rows = cmd_diagnostics(spec);
    double pu = NAN, pw = NAN;
    for (const auto& r : rows) {
        if (r.quantity == "lambda_Pu") pu = r.value;
        if (r.quantity == "lambda_Pw") pw = r.value;
    }
    EXPECT_EQ(pu, pw);
    EXPECT_NEAR(pu, 0.625, 1e-10);
}

TEST(Runner, SweepWritesPerValueDirectories) {
    const fs::path dir = scratch_dir("sweep");
    Config base = parse(kTiny);
    base.set("run.variants", "uniform");
    const auto rows = cmd_sweep(base, "data.v", {"1", "10"}, dir);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_TRUE(fs::exists(dir / "data.v=1" / "aggregate.csv"));
    EXPECT_TRUE(fs::exists(dir / "data.v=10" / "aggregate.csv"));
    EXPECT_TRUE(fs::exists(dir / "sweep.csv"));
}

TEST(Cli, ExitCodes) {
    const fs::path dir = scratch_dir("cli");
    EXPECT_EQ(cli("generate-graph --n 10 --p 0.5 --seed 2 --out " + (dir / "g.txt").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "g.txt"));
    EXPECT_EQ(cli("privacy-table --epsilons 0,1 --thetas 1 --sup-l 10 --inf-l 1"), 0);
    EXPECT_EQ(cli("run --n 10 --T 100 --seeds 2 --variant uniform,gossip --out " + (dir / "run").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "run" / "aggregate.csv"));
    EXPECT_EQ(cli("diagnostics --n 10 --out " + (dir / "diag.csv").string()), 0);

    EXPECT_EQ(cli("run --q 1.2 --out " + (dir / "bad").string()), 1);
    EXPECT_EQ(cli("run --variant nope"), 1);
    EXPECT_EQ(cli("run --config " + (dir / "missing.cfg").string()), 1);
    EXPECT_EQ(cli("privacy-table --sup-l 1 --inf-l 1"), 1);
    EXPECT_EQ(cli("no-such-command"), 1);
    EXPECT_EQ(cli("generate-graph --n 30 --p 0.0001"), 2);  // never connected
}
