// chain.hpp — Metropolis-Hastings random walks on a Graph.
//
// A walk at node i proposes a neighbour j uniformly from N(i) and accepts
// it with an acceptance probability that depends only on quantities node i
// can learn from j (degree, and for the weighted walk a per-node weight).
// Rejected proposals keep the walk at i, which is where the diagonal of
// the transition matrix comes from.
#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rwsgd/errors.hpp"
#include "rwsgd/graph.hpp"
#include "rwsgd/rng.hpp"

namespace rwsgd {

using Matrix = Eigen::MatrixXd;

inline double accept_uniform(std::size_t deg_i, std::size_t deg_j) {
    return std::min(1.0, static_cast<double>(deg_i) / static_cast<double>(deg_j));
}

inline double accept_weighted(double l_i, double l_j, std::size_t deg_i, std::size_t deg_j) {
    return std::min(1.0, (l_j / l_i) * (static_cast<double>(deg_i) / static_cast<double>(deg_j)));
}

// Acceptance rules usable by walk_step and build_matrix.
struct UniformAcceptance {
    const Graph* graph;
    double operator()(NodeId i, NodeId j) const {
        return accept_uniform(graph->degree(i), graph->degree(j));
    }
};

// Weighted MH rule with target proportional to `weights` (true or noisy
// Lipschitz constants).
struct WeightedAcceptance {
    const Graph* graph;
    std::span<const double> weights;
    double operator()(NodeId i, NodeId j) const {
        return accept_weighted(weights[i], weights[j], graph->degree(i), graph->degree(j));
    }
};

struct TransitionMatrix {
    Matrix p;
    std::size_t size() const noexcept { return static_cast<std::size_t>(p.rows()); }
};

struct StationaryDistribution {
    Eigen::VectorXd pi;
    std::size_t size() const noexcept { return static_cast<std::size_t>(pi.size()); }
};

namespace detail {
inline void require_aperiodic(const Graph& g, const Matrix& p) {
    bool lazy = false;
    for (Eigen::Index i = 0; i < p.rows() && !lazy; ++i) lazy = p(i, i) > 0.0;
    if (!lazy && g.bipartite())
        throw ConfigError(
            "chain is periodic: zero holding probability everywhere on a bipartite graph");
}
}  // namespace detail

template <class Acceptance>
TransitionMatrix build_matrix(const Graph& g, const Acceptance& accept) {
    const std::size_t n = g.size();
    TransitionMatrix tm{Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    for (NodeId i = 0; i < n; ++i) {
        const auto& nb = g.neighbors(i);
        const double propose = 1.0 / static_cast<double>(nb.size());
        double off = 0.0;
        for (NodeId j : nb) {
            const double pij = propose * accept(i, j);
            tm.p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pij;
            off += pij;
        }
        tm.p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = std::max(0.0, 1.0 - off);
    }
    detail::require_aperiodic(g, tm.p);
    return tm;
}

// Same chain as build_matrix(g, UniformAcceptance{&g}), but each edge entry is
// written as 1/max(deg_i, deg_j) so P_u is symmetric bit for bit.
inline TransitionMatrix build_uniform_matrix(const Graph& g) {
    const std::size_t n = g.size();
    TransitionMatrix tm{Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    for (NodeId i = 0; i < n; ++i) {
        double off = 0.0;
        for (NodeId j : g.neighbors(i)) {
            const double pij = 1.0 / static_cast<double>(std::max(g.degree(i), g.degree(j)));
            tm.p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pij;
            off += pij;
        }
        tm.p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = std::max(0.0, 1.0 - off);
    }
    detail::require_aperiodic(g, tm.p);
    return tm;
}

inline TransitionMatrix build_weighted_matrix(const Graph& g, std::span<const double> weights) {
    detail::require(weights.size() == g.size(), "weight vector length does not match graph size");
    for (double l : weights)
        detail::require(l > 0.0 && std::isfinite(l), "weights must be positive and finite");
    return build_matrix(g, WeightedAcceptance{&g, weights});
}

inline constexpr long kPowerIterationCap = 1'000'000;

// Left fixed point of P by power iteration from the uniform vector.
inline StationaryDistribution stationary_distribution(const TransitionMatrix& tm) {
    const Eigen::Index n = tm.p.rows();
    Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
    Eigen::RowVectorXd next(n);
    for (long it = 0; it < kPowerIterationCap; ++it) {
        next.noalias() = pi * tm.p;
        next /= next.sum();
        const double change = (next - pi).lpNorm<1>();
        pi.swap(next);
        if (change < 1e-13) return {pi.transpose()};
    }
    throw NumericalError("chain failed to mix within " + std::to_string(kPowerIterationCap) +
                         " power iterations");
}

// (max(|lambda_2|, |lambda_n|) + 1) / 2, from the spectrum of the
// symmetrised matrix D^{1/2} P D^{-1/2}, D = diag(pi).
inline double lambda_p(const TransitionMatrix& tm, const StationaryDistribution& st) {
    const Eigen::VectorXd root = st.pi.cwiseSqrt();
    const Eigen::VectorXd inv_root = root.cwiseInverse();
    const Matrix s = root.asDiagonal() * tm.p * inv_root.asDiagonal();
    const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-8)
        throw NumericalError("chain not reversible (symmetrised asymmetry " + std::to_string(asym) +
                             ")");
    const Matrix sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed");
    Eigen::VectorXd ev = solver.eigenvalues();  // ascending
    const Eigen::Index n = ev.size();
    if (n < 2) return 0.5;
    const double second = std::abs(ev[n - 2]);
    const double last = std::abs(ev[0]);
    return (std::max(second, last) + 1.0) / 2.0;
}

// One MH step straight from the graph and the acceptance rule. Consumes
// exactly one neighbour draw and one uniform draw.
template <class Acceptance>
NodeId walk_step(const Graph& g, const Acceptance& accept, NodeId current, Rng& rng) {
    const auto& nb = g.neighbors(current);
    const NodeId candidate = nb[rng.below(nb.size())];
    const double u = rng.uniform();
    return u <= accept(current, candidate) ? candidate : current;
}

inline double total_variation(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

}  // namespace rwsgd
