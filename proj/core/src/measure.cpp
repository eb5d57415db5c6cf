#include "rkhs/measure.hpp"

#include <algorithm>
#include <numeric>

namespace rkhs {

DiscreteMeasure::DiscreteMeasure(std::vector<DomainPoint> nodes,
                                 std::vector<double> weights,
                                 std::vector<int> labels) {
    if (nodes.size() != weights.size())
        fail("dimension-mismatch",
             std::to_string(nodes.size()) + " nodes vs " +
                 std::to_string(weights.size()) + " weights");
    if (!labels.empty() && labels.size() != nodes.size())
        fail("dimension-mismatch",
             std::to_string(nodes.size()) + " nodes vs " +
                 std::to_string(labels.size()) + " labels");

    for (double w : weights) {
        if (!std::isfinite(w))
            fail("invalid-mass", "weights must be finite");
        if (w < 0.0)
            fail("invalid-mass", "weights must be nonnegative, got " + std::to_string(w));
    }

    const bool tagged = !labels.empty();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (weights[i] == 0.0) continue;
        nodes_.push_back(std::move(nodes[i]));
        weights_.push_back(weights[i]);
        if (tagged) labels_.push_back(labels[i]);
    }
    if (nodes_.empty())
        fail("degenerate-measure", "no nodes with positive mass");

    const std::size_t d = nodes_.front().dim();
    for (const auto& x : nodes_)
        if (x.dim() != d)
            fail("dimension-mismatch", "nodes mix dimensions " +
                                           std::to_string(d) + " and " +
                                           std::to_string(x.dim()));

    std::vector<std::size_t> order(nodes_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
        return lex_less(nodes_[a], nodes_[b]);
    });
    for (std::size_t k = 1; k < order.size(); ++k)
        if (nodes_[order[k - 1]] == nodes_[order[k]])
            fail("duplicate-node", "node " + to_string(nodes_[order[k]]) +
                                       " appears more than once");

    weight_vec_ = Eigen::Map<const Eigen::VectorXd>(
        weights_.data(), static_cast<Eigen::Index>(weights_.size()));
    total_mass_ = weight_vec_.sum();
}

DiscreteMeasure build_uniform_grid(double lo, double hi, std::size_t n) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
        fail("invalid-range", "need finite lo < hi, got [" + std::to_string(lo) +
                                  ", " + std::to_string(hi) + "]");
    if (n == 0)
        fail("invalid-count", "a grid needs at least one node");

    const double h = (hi - lo) / static_cast<double>(n);
    std::vector<DomainPoint> nodes;
    std::vector<double> weights(n, h);
    nodes.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        nodes.push_back(DomainPoint{lo + (static_cast<double>(i) + 0.5) * h});
    return DiscreteMeasure(std::move(nodes), std::move(weights));
}

DiscreteMeasure build_block_measure(const std::vector<double>& block_masses,
                                    std::size_t nodes_per_block) {
    if (block_masses.empty())
        fail("invalid-count", "need at least one block");
    if (nodes_per_block == 0)
        fail("invalid-count", "need at least one node per block");
    for (double a : block_masses)
        if (!std::isfinite(a) || a <= 0.0)
            fail("invalid-mass", "block masses must be positive and finite");

    std::vector<DomainPoint> nodes;
    std::vector<double> weights;
    std::vector<int> labels;
    const std::size_t total = block_masses.size() * nodes_per_block;
    nodes.reserve(total);
    weights.reserve(total);
    labels.reserve(total);
    const double step = 1.0 / static_cast<double>(nodes_per_block);
    for (std::size_t b = 0; b < block_masses.size(); ++b) {
        const double w = block_masses[b] * step;
        for (std::size_t i = 0; i < nodes_per_block; ++i) {
            nodes.push_back(DomainPoint{static_cast<double>(b) +
                                        (static_cast<double>(i) + 0.5) * step});
            weights.push_back(w);
            labels.push_back(static_cast<int>(b));
        }
    }
    return DiscreteMeasure(std::move(nodes), std::move(weights), std::move(labels));
}

}  // namespace rkhs
