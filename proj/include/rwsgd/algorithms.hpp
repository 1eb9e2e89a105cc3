// algorithms.hpp — random-walk SGD variants, the asynchronous gossip
// baseline and the centralised optimum used as the reference f(w*).
//
// All runs follow the projected update w <- Pi_W(w - gamma_k * g_k) with
// gamma_k = k^{-q}, and report the optimality gap of the step-size-weighted
// average of the iterates.
#pragma once
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rwsgd/chain.hpp"
#include "rwsgd/errors.hpp"
#include "rwsgd/graph.hpp"
#include "rwsgd/objective.hpp"
#include "rwsgd/privacy.hpp"
#include "rwsgd/rng.hpp"

namespace rwsgd {

enum class Variant { Uniform, Weighted, PrivateWeighted, Gossip };

inline std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::Uniform: return "uniform";
        case Variant::Weighted: return "weighted";
        case Variant::PrivateWeighted: return "private-weighted";
        case Variant::Gossip: return "gossip";
    }
    return "?";
}

inline Variant parse_variant(std::string_view s) {
    if (s == "uniform") return Variant::Uniform;
    if (s == "weighted") return Variant::Weighted;
    if (s == "private-weighted" || s == "private") return Variant::PrivateWeighted;
    if (s == "gossip") return Variant::Gossip;
    throw ConfigError("unknown variant '" + std::string(s) +
                      "' (expected uniform, weighted, private-weighted or gossip)");
}

struct RunConfig {
    double q = 0.75;
    std::uint64_t iterations = 10000;
    std::uint64_t seed = 1;
    Variant variant = Variant::Uniform;
    double feasible_radius = 100.0;
    std::optional<PrivacySpec> privacy;
    std::uint64_t eval_every = 100;
    // Private variant only: scale gradients by mean(R)/R_i instead of the
    // true Lbar/L_i. Off by default.
    bool noisy_gradient_scale = false;

    void validate() const {
        detail::require(q > 0.5 && q < 1.0, "q must lie in (0.5, 1), got " + std::to_string(q));
        detail::require(eval_every >= 1, "eval_every must be >= 1");
        detail::require(feasible_radius > 0.0 && std::isfinite(feasible_radius),
                        "feasible_radius must be positive");
        if (variant == Variant::PrivateWeighted) {
            detail::require(privacy.has_value(),
                            "variant private-weighted requires a privacy specification");
            privacy->validate();
        }
    }
};

struct TraceRecord {
    std::uint64_t k = 0;
    NodeId node = 0;
    double gap = 0.0;
    std::uint64_t comm = 0;
    std::uint64_t comp = 0;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct RunTrace {
    Variant variant = Variant::Uniform;
    std::uint64_t seed = 0;
    double f_star = 0.0;
    std::vector<TraceRecord> records;
    std::vector<std::uint64_t> visits;  // times each node was active, k = 1..T
    std::vector<double> noisy_lipschitz;  // private variant only
    Vector final_average;
};

struct Optimum {
    Vector w;
    double f = 0.0;
};

// Read-only snapshot handed to an observer after every iteration.
struct IterationView {
    std::uint64_t k;
    NodeId active;
    const Vector& model;  // global model after the update (random walks) or network mean (gossip)
    std::span<const Vector> local_models;  // gossip only
    std::span<const double> noisy_lipschitz;  // private variant only
};

using Observer = std::function<void(const IterationView&)>;

inline double step_size(std::uint64_t k, double q) {
    detail::require(k >= 1, "step_size: k must be >= 1");
    return std::pow(static_cast<double>(k), -q);
}

inline Vector sgd_update(const Vector& w, const Vector& g, double gamma, const FeasibleSet& set) {
    detail::require(w.size() == g.size(), "sgd_update: dimension mismatch");
    return project(w - gamma * g, set);
}

// Step-size-weighted running mean sum(gamma_m w_m) / sum(gamma_m).
class AveragedIterate {
public:
    explicit AveragedIterate(std::size_t d) : mean_(Vector::Zero(static_cast<Eigen::Index>(d))) {}

    void add(double gamma, const Vector& w) {
        weight_ += gamma;
        mean_ += (gamma / weight_) * (w - mean_);
        ++count_;
    }

    const Vector& value() const noexcept { return mean_; }
    double weight() const noexcept { return weight_; }
    std::uint64_t count() const noexcept { return count_; }

private:
    Vector mean_;
    double weight_ = 0.0;
    std::uint64_t count_ = 0;
};

inline constexpr long kOptimumMaxIter = 1'000'000;

// Gradient descent with backtracking line search on the global loss until
// ||grad f|| < tol. Requires the minimiser to sit well inside W.
inline Optimum solve_optimal(const Dataset& data, const FeasibleSet& set, double tol = 1e-10) {
    detail::require(data.size() >= 1, "solve_optimal: empty dataset");
    Vector w = Vector::Zero(static_cast<Eigen::Index>(data.d));
    double f = global_loss(w, data);
    Vector g = global_gradient(w, data);
    double t = 1.0;
    for (long it = 0; it < kOptimumMaxIter; ++it) {
        const double gnorm2 = g.squaredNorm();
        if (std::sqrt(gnorm2) < tol) {
            if (w.norm() >= 0.9 * set.radius)
                throw NumericalError("feasible radius too small: ||w*|| = " +
                                     std::to_string(w.norm()) + ", R = " +
                                     std::to_string(set.radius));
            return {w, f};
        }
        t *= 2.0;
        const double noise = 1e-13 * std::max(1.0, std::abs(f));
        for (;;) {
            Vector trial = w - t * g;
            const double ft = global_loss(trial, data);
            bool accept;
            Vector gt;
            if (0.5 * t * gnorm2 > noise) {
                accept = ft <= f - 0.5 * t * gnorm2;
            } else {
                // Predicted decrease is below the rounding level of f; judge
                // the step by the gradient norm instead.
                gt = global_gradient(trial, data);
                accept = ft <= f + noise && gt.squaredNorm() < gnorm2;
            }
            if (accept) {
                w = std::move(trial);
                f = ft;
                g = gt.size() ? std::move(gt) : global_gradient(w, data);
                break;
            }
            t *= 0.5;
            if (t < 1e-300) throw NumericalError("solve_optimal: line search stalled");
        }
    }
    throw NumericalError("solve_optimal: no convergence within " +
                         std::to_string(kOptimumMaxIter) + " iterations");
}

// Uniform draw from the ball of radius R: Gaussian direction times R*U^{1/d}.
inline Vector uniform_in_ball(std::size_t d, double radius, Rng& rng) {
    Vector dir(static_cast<Eigen::Index>(d));
    double norm2 = 0.0;
    do {
        for (std::size_t k = 0; k < d; ++k) dir[static_cast<Eigen::Index>(k)] = rng.normal();
        norm2 = dir.squaredNorm();
    } while (norm2 == 0.0);
    const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    return dir * (r / std::sqrt(norm2));
}

struct InitialState {
    NodeId node;
    Vector model;
};

// Shared by every variant under one seed.
inline InitialState initial_state(std::size_t n, std::size_t d, double radius, std::uint64_t seed) {
    Rng rng(seed, "init");
    InitialState s;
    s.node = static_cast<NodeId>(rng.below(n));
    s.model = uniform_in_ball(d, radius, rng);
    return s;
}

namespace detail {

inline bool record_due(std::uint64_t k, std::uint64_t total, std::uint64_t every) {
    return k % every == 0 || k == total;
}

inline void check_inputs(const Graph& g, const Dataset& data, const RunConfig& cfg, Variant expect) {
    cfg.validate();
    detail::require(cfg.variant == expect, "run: configuration variant is '" +
                                               std::string(to_string(cfg.variant)) +
                                               "', expected '" + std::string(to_string(expect)) + "'");
    detail::require(g.size() == data.size(), "graph has " + std::to_string(g.size()) +
                                                 " nodes but dataset has " +
                                                 std::to_string(data.size()));
    detail::require(g.size() >= 2, "random-walk runs need at least two nodes");
}

// Core random-walk loop shared by algorithms 1-3. `scale(i)` is the factor
// applied to grad f_i; `accept` is the MH rule used to move.
template <class Scale, class Acceptance>
RunTrace random_walk_sgd(const Graph& g, const Dataset& data, const RunConfig& cfg,
                         const Optimum& opt, Scale scale, const Acceptance& accept,
                         std::span<const double> noisy, const Observer& observer) {
    const std::size_t n = data.size();
    const FeasibleSet set(cfg.feasible_radius);
    const InitialState init = initial_state(n, data.d, cfg.feasible_radius, cfg.seed);
    Rng walk(cfg.seed, "walk");

    RunTrace trace;
    trace.variant = cfg.variant;
    trace.seed = cfg.seed;
    trace.f_star = opt.f;
    trace.visits.assign(n, 0);
    trace.noisy_lipschitz.assign(noisy.begin(), noisy.end());

    Vector w = init.model;
    NodeId node = init.node;
    AveragedIterate avg(data.d);
    Vector grad(static_cast<Eigen::Index>(data.d));
    std::uint64_t comm = 0;

    trace.records.push_back({0, node, global_loss(w, data) - opt.f, 0, 0});
    for (std::uint64_t k = 1; k <= cfg.iterations; ++k) {
        const double gamma = step_size(k, cfg.q);
        avg.add(gamma, w);
        ++trace.visits[node];
        const NodeId active = node;

        local_gradient_into(w, data.nodes[node], n, grad);
        w.noalias() -= (gamma * scale(node)) * grad;
        project_inplace(w, set);

        const NodeId next = walk_step(g, accept, node, walk);
        if (next != node) ++comm;
        node = next;

        if (observer) observer(IterationView{k, active, w, {}, noisy});
        if (record_due(k, cfg.iterations, cfg.eval_every))
            trace.records.push_back({k, active, global_loss(avg.value(), data) - opt.f, comm, k});
    }
    trace.final_average = avg.count() ? avg.value() : init.model;
    return trace;
}

}  // namespace detail

// Uniform walk: uniform stationary sampling, plain local gradients.
inline RunTrace run_uniform(const Graph& g, const Dataset& data, const RunConfig& cfg,
                            const Optimum& opt, const Observer& observer = {}) {
    detail::check_inputs(g, data, cfg, Variant::Uniform);
    return detail::random_walk_sgd(
        g, data, cfg, opt, [](NodeId) { return 1.0; }, UniformAcceptance{&g}, {}, observer);
}

// Weighted walk: stationary law proportional to L_i, gradients scaled by Lbar/L_i.
inline RunTrace run_weighted(const Graph& g, const Dataset& data, const RunConfig& cfg,
                             const Optimum& opt, const Observer& observer = {}) {
    detail::check_inputs(g, data, cfg, Variant::Weighted);
    const std::vector<double> l = data.lipschitz();
    const double lbar = data.mean_lipschitz();
    return detail::random_walk_sgd(
        g, data, cfg, opt, [&](NodeId i) { return lbar / l[i]; }, WeightedAcceptance{&g, l}, {},
        observer);
}

// Private weighted walk: walk on privatised constants R(L_i), drawn once up front.
// Gradients keep the true Lbar/L_i unless cfg.noisy_gradient_scale is set.
inline RunTrace run_private(const Graph& g, const Dataset& data, const RunConfig& cfg,
                            const Optimum& opt, const Observer& observer = {}) {
    detail::check_inputs(g, data, cfg, Variant::PrivateWeighted);
    const std::vector<double> l = data.lipschitz();
    const double lbar = data.mean_lipschitz();
    Rng privacy_rng(cfg.seed, "privacy");
    const NoisyLipschitz noisy = privatize_all(l, *cfg.privacy, privacy_rng);
    const auto r = noisy.values();
    double rbar = 0.0;
    for (double v : r) rbar += v;
    rbar /= static_cast<double>(r.size());
    auto scale = [&](NodeId i) {
        return cfg.noisy_gradient_scale ? rbar / r[i] : lbar / l[i];
    };
    return detail::random_walk_sgd(g, data, cfg, opt, scale, WeightedAcceptance{&g, r}, r,
                                   observer);
}

// Asynchronous gossip: one uniformly drawn edge per iteration; both ends take
// a local projected SGD step, then average. Tracks the weighted average of
// the network-mean model.
inline RunTrace run_gossip(const Graph& g, const Dataset& data, const RunConfig& cfg,
                           const Optimum& opt, const Observer& observer = {}) {
    detail::check_inputs(g, data, cfg, Variant::Gossip);
    const std::size_t n = data.size();
    const FeasibleSet set(cfg.feasible_radius);
    const InitialState init = initial_state(n, data.d, cfg.feasible_radius, cfg.seed);
    const auto edges = g.edges();
    Rng walk(cfg.seed, "walk");

    RunTrace trace;
    trace.variant = cfg.variant;
    trace.seed = cfg.seed;
    trace.f_star = opt.f;
    trace.visits.assign(n, 0);

    std::vector<Vector> models(n, init.model);
    Vector mean = init.model;
    AveragedIterate avg(data.d);
    Vector ga(static_cast<Eigen::Index>(data.d)), gb(static_cast<Eigen::Index>(data.d));
    const double inv_n = 1.0 / static_cast<double>(n);

    trace.records.push_back({0, init.node, global_loss(mean, data) - opt.f, 0, 0});
    for (std::uint64_t k = 1; k <= cfg.iterations; ++k) {
        const double gamma = step_size(k, cfg.q);
        avg.add(gamma, mean);

        const auto [a, b] = edges[walk.below(edges.size())];
        ++trace.visits[a];
        ++trace.visits[b];
        Vector& wa = models[a];
        Vector& wb = models[b];
        const Vector old_sum = wa + wb;
        local_gradient_into(wa, data.nodes[a], n, ga);
        local_gradient_into(wb, data.nodes[b], n, gb);
        wa.noalias() -= gamma * ga;
        wb.noalias() -= gamma * gb;
        project_inplace(wa, set);
        project_inplace(wb, set);
        const Vector merged = 0.5 * (wa + wb);
        wa = merged;
        wb = merged;
        mean += inv_n * (2.0 * merged - old_sum);

        if (observer) observer(IterationView{k, a, mean, models, {}});
        if (detail::record_due(k, cfg.iterations, cfg.eval_every))
            trace.records.push_back({k, a, global_loss(avg.value(), data) - opt.f, k, 2 * k});
    }
    trace.final_average = avg.count() ? avg.value() : init.model;
    return trace;
}

inline RunTrace run(const Graph& g, const Dataset& data, const RunConfig& cfg, const Optimum& opt,
                    const Observer& observer = {}) {
    switch (cfg.variant) {
        case Variant::Uniform: return run_uniform(g, data, cfg, opt, observer);
        case Variant::Weighted: return run_weighted(g, data, cfg, opt, observer);
        case Variant::PrivateWeighted: return run_private(g, data, cfg, opt, observer);
        case Variant::Gossip: return run_gossip(g, data, cfg, opt, observer);
    }
    throw ConfigError("unknown variant");
}

// Without a precomputed optimum.
inline RunTrace run(const Graph& g, const Dataset& data, const RunConfig& cfg) {
    return run(g, data, cfg, solve_optimal(data, FeasibleSet(cfg.feasible_radius)));
}

// Sum_i pi(i) * scale_i * grad f_i(w): the stationary mean of the gradient
// estimate for a walk with stationary law `pi`.
inline Vector stationary_gradient_mean(const Vector& w, const Dataset& data,
                                       std::span<const double> pi, std::span<const double> scale) {
    const std::size_t n = data.size();
    Vector acc = Vector::Zero(w.size());
    Vector gi(w.size());
    for (std::size_t i = 0; i < n; ++i) {
        local_gradient_into(w, data.nodes[i], n, gi);
        acc += (pi[i] * scale[i]) * gi;
    }
    return acc;
}

}  // namespace rwsgd
