#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rkhs/errors.hpp"
#include "rkhs/point.hpp"

namespace rkhs {

using Complex = std::complex<double>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// A finite positive measure mu = sum_i w_i delta_{x_i} on distinct nodes.
// Zero-mass nodes are dropped at construction (they carry no information for
// any integral); negative or non-finite weights are rejected. Nodes share one
// dimension and are pairwise distinct. Optional integer labels tag nodes with
// the index of a structural group (for example, the block they belong to).
class DiscreteMeasure {
public:
    DiscreteMeasure(std::vector<DomainPoint> nodes, std::vector<double> weights,
                    std::vector<int> labels = {});

    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t dim() const noexcept { return nodes_.front().dim(); }

    const std::vector<DomainPoint>& nodes() const noexcept { return nodes_; }
    const DomainPoint& node(std::size_t i) const { return nodes_[i]; }

    const std::vector<double>& weights() const noexcept { return weights_; }
    double weight(std::size_t i) const { return weights_[i]; }

    bool has_labels() const noexcept { return !labels_.empty(); }
    const std::vector<int>& labels() const noexcept { return labels_; }

    double total_mass() const noexcept { return total_mass_; }

    const Eigen::VectorXd& weight_vector() const noexcept { return weight_vec_; }
    Eigen::VectorXd sqrt_weight_vector() const { return weight_vec_.cwiseSqrt(); }

private:
    std::vector<DomainPoint> nodes_;
    std::vector<double> weights_;
    std::vector<int> labels_;
    Eigen::VectorXd weight_vec_;
    double total_mass_ = 0.0;
};

// Midpoint-rule discretization of Lebesgue measure on [lo, hi]:
// x_i = lo + (i + 1/2) (hi - lo) / n, each with weight (hi - lo) / n.
DiscreteMeasure build_uniform_grid(double lo, double hi, std::size_t n);

// Discretization of the weighted counting measure of a block structure:
// block n contributes nodes_per_block nodes at n + (i + 1/2) / nodes_per_block
// with weight block_masses[n] / nodes_per_block and label n, so each block
// keeps total mass block_masses[n] independent of the node count.
DiscreteMeasure build_block_measure(const std::vector<double>& block_masses,
                                    std::size_t nodes_per_block);

namespace detail {

inline double abs_of(double x) { return std::abs(x); }
inline double abs_of(const Complex& z) { return std::abs(z); }
inline double conj_of(double x) { return x; }
inline Complex conj_of(const Complex& z) { return std::conj(z); }
inline double real_of(double x) { return x; }
inline double real_of(const Complex& z) { return z.real(); }

}  // namespace detail

// L^p(mu) norm of node values, p in [1, inf]. p = inf is the max of |v_i|
// over nodes carrying positive mass (all stored nodes do). p = 1 and p = 2
// avoid the generic pow for exactness on simple inputs.
template <typename Scalar>
double lp_norm(const VectorX<Scalar>& values, const DiscreteMeasure& mu, double p) {
    if (static_cast<std::size_t>(values.size()) != mu.size())
        fail("dimension-mismatch",
             "value sequence has " + std::to_string(values.size()) +
                 " entries for a measure with " + std::to_string(mu.size()) + " nodes");
    if (std::isnan(p) || p < 1.0)
        fail("invalid-p", "lp_norm needs p in [1, inf], got " + std::to_string(p));

    const auto n = mu.size();
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            m = std::max(m, detail::abs_of(values[static_cast<Eigen::Index>(i)]));
        return m;
    }
    double acc = 0.0;
    if (p == 1.0) {
        for (std::size_t i = 0; i < n; ++i)
            acc += mu.weight(i) * detail::abs_of(values[static_cast<Eigen::Index>(i)]);
        return acc;
    }
    if (p == 2.0) {
        for (std::size_t i = 0; i < n; ++i) {
            const double a = detail::abs_of(values[static_cast<Eigen::Index>(i)]);
            acc += mu.weight(i) * a * a;
        }
        return std::sqrt(acc);
    }
    for (std::size_t i = 0; i < n; ++i)
        acc += mu.weight(i) *
               std::pow(detail::abs_of(values[static_cast<Eigen::Index>(i)]), p);
    return std::pow(acc, 1.0 / p);
}

// L^2(mu) inner product, linear in the first argument:
// <v, u> = sum_i w_i v_i conj(u_i).
template <typename Scalar>
Scalar weighted_inner(const VectorX<Scalar>& v, const VectorX<Scalar>& u,
                      const DiscreteMeasure& mu) {
    if (static_cast<std::size_t>(v.size()) != mu.size() ||
        static_cast<std::size_t>(u.size()) != mu.size())
        fail("dimension-mismatch", "value sequences must match the measure's node count");
    Scalar acc{};
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        acc += mu.weight(i) * v[k] * detail::conj_of(u[k]);
    }
    return acc;
}

}  // namespace rkhs
