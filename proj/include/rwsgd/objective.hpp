// objective.hpp — regularised logistic regression split over graph nodes.
//
// Node i holds one labelled point (x_i, y_i) and the local loss
//
//     f_i(w) = n * softplus(-y_i x_i^T w) + 0.5 * ||w||^2
//
// so that the global loss f = mean_i f_i equals
// sum_i log(1 + exp(-y_i x_i^T w)) + 0.5 ||w||^2, and the gradient of f_i
// is Lipschitz with constant L_i = 1 + (n/4) ||x_i||^2.
#pragma once
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rwsgd/errors.hpp"
#include "rwsgd/rng.hpp"

namespace rwsgd {

using Vector = Eigen::VectorXd;

// max(z,0) + log1p(exp(-|z|)); finite for every finite z.
inline double softplus(double z) noexcept { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

inline double sigmoid(double z) noexcept {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double lipschitz_constant(const Vector& x, std::size_t n) {
    return 1.0 + 0.25 * static_cast<double>(n) * x.squaredNorm();
}

struct NodeData {
    Vector x;
    int y = 1;  // -1 or +1
    double lipschitz = 1.0;

    NodeData() = default;
    NodeData(Vector features, int label, std::size_t n)
        : x(std::move(features)), y(label), lipschitz(lipschitz_constant(x, n)) {
        detail::require(y == 1 || y == -1, "label must be -1 or +1, got " + std::to_string(y));
    }
};

struct Dataset {
    std::vector<NodeData> nodes;
    std::size_t d = 0;
    Vector mu;
    double v = 0.0;

    std::size_t size() const noexcept { return nodes.size(); }

    std::vector<double> lipschitz() const {
        std::vector<double> out;
        out.reserve(nodes.size());
        for (const auto& nd : nodes) out.push_back(nd.lipschitz);
        return out;
    }

    double mean_lipschitz() const {
        double s = 0.0;
        for (const auto& nd : nodes) s += nd.lipschitz;
        return s / static_cast<double>(nodes.size());
    }
};

// Closed L2 ball of the given radius about the origin.
struct FeasibleSet {
    double radius = 100.0;

    explicit FeasibleSet(double r = 100.0) : radius(r) {
        detail::require(std::isfinite(r) && r > 0.0,
                        "feasible radius must be positive and finite, got " + std::to_string(r));
    }
};

inline Vector project(const Vector& w, const FeasibleSet& set) {
    const double norm = w.norm();
    if (norm <= set.radius) return w;
    return w * (set.radius / norm);
}

inline void project_inplace(Vector& w, const FeasibleSet& set) {
    const double norm = w.norm();
    if (norm > set.radius) w *= set.radius / norm;
}

// Labels uniform on {-1,+1}; x ~ N(y*mu, v*I_d). Lipschitz constants use
// n = number of generated nodes.
inline Dataset generate_dataset(std::size_t n, std::size_t d, const Vector& mu, double v,
                                std::uint64_t seed) {
    detail::require(n >= 1, "dataset: n must be >= 1");
    detail::require(d >= 1, "dataset: d must be >= 1");
    detail::require(static_cast<std::size_t>(mu.size()) == d,
                    "dataset: mu has dimension " + std::to_string(mu.size()) + ", expected " +
                        std::to_string(d));
    detail::require(v > 0.0 && std::isfinite(v), "dataset: v must be positive");
    Rng rng(seed);
    const double sd = std::sqrt(v);
    Dataset ds;
    ds.d = d;
    ds.mu = mu;
    ds.v = v;
    ds.nodes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = rng.coin() ? 1 : -1;
        Vector x(d);
        for (std::size_t k = 0; k < d; ++k) x[k] = y * mu[k] + sd * rng.normal();
        ds.nodes.emplace_back(std::move(x), y, n);
    }
    return ds;
}

inline double local_loss(const Vector& w, const NodeData& node, std::size_t n) {
    const double margin = node.y * node.x.dot(w);
    return static_cast<double>(n) * softplus(-margin) + 0.5 * w.squaredNorm();
}

// out <- grad f_i(w). `out` may not alias `w`.
inline void local_gradient_into(const Vector& w, const NodeData& node, std::size_t n,
                                Vector& out) {
    const double margin = node.y * node.x.dot(w);
    const double coef = -static_cast<double>(n) * node.y * sigmoid(-margin);
    out = coef * node.x + w;
}

inline Vector local_gradient(const Vector& w, const NodeData& node, std::size_t n) {
    Vector g(w.size());
    local_gradient_into(w, node, n, g);
    return g;
}

inline double global_loss(const Vector& w, const Dataset& data) {
    const std::size_t n = data.size();
    double s = 0.0;
    for (const auto& nd : data.nodes) s += local_loss(w, nd, n);
    return s / static_cast<double>(n);
}

inline Vector global_gradient(const Vector& w, const Dataset& data) {
    const std::size_t n = data.size();
    Vector g = Vector::Zero(w.size());
    Vector gi(w.size());
    for (const auto& nd : data.nodes) {
        local_gradient_into(w, nd, n, gi);
        g += gi;
    }
    return g / static_cast<double>(n);
}

// Mean of ||grad f_i(w)||^2 over nodes; evaluated at w* this is the
// residual used by the convergence bounds.
inline double gradient_residual(const Vector& w, const Dataset& data) {
    const std::size_t n = data.size();
    double s = 0.0;
    for (const auto& nd : data.nodes) s += local_gradient(w, nd, n).squaredNorm();
    return s / static_cast<double>(n);
}

// CSV: header "y,x0,...,x{d-1}", one row per node. Lipschitz constants are
// recomputed on load from the row count.
inline void write_dataset_csv(std::ostream& os, const Dataset& data) {
    os << 'y';
    for (std::size_t k = 0; k < data.d; ++k) os << ",x" << k;
    os << '\n';
    os.precision(17);
    for (const auto& nd : data.nodes) {
        os << nd.y;
        for (std::size_t k = 0; k < data.d; ++k) os << ',' << nd.x[k];
        os << '\n';
    }
}

inline Dataset read_dataset_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("dataset csv: empty input");
    std::size_t d = 0;
    for (char c : line)
        if (c == ',') ++d;
    detail::require(line.rfind("y,", 0) == 0 && d >= 1, "dataset csv: bad header '" + line + "'");

    std::vector<std::pair<Vector, int>> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t used = 0;
                vals.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw ConfigError("dataset csv: bad number '" + cell + "' on line " +
                                  std::to_string(lineno));
            }
        }
        detail::require(vals.size() == d + 1,
                        "dataset csv: wrong column count on line " + std::to_string(lineno));
        Vector x(d);
        for (std::size_t k = 0; k < d; ++k) x[k] = vals[k + 1];
        rows.emplace_back(std::move(x), static_cast<int>(vals[0]));
    }
    detail::require(!rows.empty(), "dataset csv: no rows");
    Dataset ds;
    ds.d = d;
    ds.mu = Vector::Zero(d);
    const std::size_t n = rows.size();
    for (auto& [x, y] : rows) ds.nodes.emplace_back(std::move(x), y, n);
    return ds;
}

}  // namespace rwsgd
