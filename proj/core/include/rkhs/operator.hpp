#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rkhs/element.hpp"
#include "rkhs/errors.hpp"
#include "rkhs/kernel.hpp"
#include "rkhs/measure.hpp"
#include "rkhs/point.hpp"

namespace rkhs {

// Matrix realization of the kernel integral operator on L^2(mu):
// (L phi)_i = sum_j k(x_i, x_j) w_j phi_j, so entries(i, j) = k(x_i, x_j) w_j.
// L itself is not symmetric, but W^{1/2} L W^{-1/2} is Hermitian whenever the
// kernel is; symmetrized_operator() returns that similarity transform.
template <typename Scalar>
struct OperatorMatrix {
    DiscreteMeasure measure;
    MatrixX<Scalar> entries;
};

template <typename Scalar>
OperatorMatrix<Scalar> make_operator(const GramMatrix<Scalar>& g,
                                     const DiscreteMeasure& mu) {
    if (g.points.size() != mu.size() ||
        g.entries.rows() != static_cast<Eigen::Index>(mu.size()))
        fail("dimension-mismatch", "Gram matrix and measure disagree on node count");
    MatrixX<Scalar> e = g.entries;
    for (Eigen::Index j = 0; j < e.cols(); ++j)
        e.col(j) *= Scalar(mu.weight(static_cast<std::size_t>(j)));
    return OperatorMatrix<Scalar>{mu, std::move(e)};
}

template <typename Scalar>
OperatorMatrix<Scalar> make_operator(const Kernel<Scalar>& k,
                                     const DiscreteMeasure& mu) {
    return make_operator(gram(k, std::span<const DomainPoint>(mu.nodes())), mu);
}

template <typename Scalar>
VectorX<Scalar> apply_integral_operator(const OperatorMatrix<Scalar>& op,
                                        const VectorX<Scalar>& phi) {
    if (phi.size() != op.entries.cols())
        fail("dimension-mismatch", "value sequence does not match the operator size");
    return op.entries * phi;
}

// W^{1/2} K W^{1/2}, the Hermitian matrix unitarily equivalent to the
// operator. Computed from the stored entries (K W) by column/row rescaling
// and re-symmetrized to kill last-ulp drift from the divisions.
template <typename Scalar>
MatrixX<Scalar> symmetrized_operator(const OperatorMatrix<Scalar>& op) {
    const Eigen::VectorXd s = op.measure.sqrt_weight_vector();
    MatrixX<Scalar> m = op.entries;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        m.col(j) /= Scalar(s(j));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        m.row(i) *= Scalar(s(i));
    return MatrixX<Scalar>((m + MatrixX<Scalar>(m.adjoint())) / Scalar(2));
}

// The coefficient map between node-value space and kernel spans. Holds the
// Gram matrix on the nodes so factorization checks need no re-assembly.
template <typename Scalar>
struct CarrierMap {
    Kernel<Scalar> kernel;
    DiscreteMeasure measure;
    GramMatrix<Scalar> gram_on_nodes;
};

template <typename Scalar>
CarrierMap<Scalar> make_carrier_map(const Kernel<Scalar>& k, const DiscreteMeasure& mu) {
    return CarrierMap<Scalar>{k, mu, gram(k, std::span<const DomainPoint>(mu.nodes()))};
}

// Adjoint of the sampling map: node values phi become the kernel combination
// sum_i (w_i phi_i) k(., x_i), an element of the span.
template <typename Scalar>
RkhsElement<Scalar> adjoint_apply(const CarrierMap<Scalar>& cm,
                                  const VectorX<Scalar>& phi) {
    if (phi.size() != static_cast<Eigen::Index>(cm.measure.size()))
        fail("dimension-mismatch", "value sequence does not match the node count");
    VectorX<Scalar> c = phi;
    for (Eigen::Index i = 0; i < c.size(); ++i)
        c(i) *= Scalar(cm.measure.weight(static_cast<std::size_t>(i)));
    return RkhsElement<Scalar>(cm.kernel, cm.measure.nodes(), std::move(c));
}

// Sampling map: restrict an element to the nodes. Evaluates the kernel
// directly, independent of the cached Gram matrix.
template <typename Scalar>
VectorX<Scalar> forward_apply(const CarrierMap<Scalar>& cm,
                              const RkhsElement<Scalar>& f) {
    if (!(f.kernel() == cm.kernel))
        fail("kernel-mismatch", "element and carrier map use different kernels");
    VectorX<Scalar> out(static_cast<Eigen::Index>(cm.measure.size()));
    for (std::size_t i = 0; i < cm.measure.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = evaluate_element(f, cm.measure.node(i));
    return out;
}

// Largest entry of |forward(adjoint(e_j)) - K W| over all basis columns: the
// defect of the factorization (sample then re-embed) = (integral operator).
// The left side goes through kernel evaluations, the right side through the
// cached Gram matrix, so agreement checks assembly and adjoint coherently.
template <typename Scalar>
double verify_factorization(const CarrierMap<Scalar>& cm) {
    const auto n = static_cast<Eigen::Index>(cm.measure.size());
    MatrixX<Scalar> direct = cm.gram_on_nodes.entries;
    for (Eigen::Index j = 0; j < n; ++j)
        direct.col(j) *= Scalar(cm.measure.weight(static_cast<std::size_t>(j)));

    double defect = 0.0;
    VectorX<Scalar> basis = VectorX<Scalar>::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        basis(j) = Scalar(1);
        const VectorX<Scalar> col = forward_apply(cm, adjoint_apply(cm, basis));
        basis(j) = Scalar(0);
        defect = std::max(defect, (col - direct.col(j)).cwiseAbs().maxCoeff());
    }
    return defect;
}

// Frame operator on coefficient space: c -> W G c, the matrix of
// adjoint-then-sample in the coefficient basis.
template <typename Scalar>
MatrixX<Scalar> frame_operator(const CarrierMap<Scalar>& cm) {
    MatrixX<Scalar> m = cm.gram_on_nodes.entries;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        m.row(i) *= Scalar(cm.measure.weight(static_cast<std::size_t>(i)));
    return m;
}

struct HsDiagnostic {
    double trace_diag;   // sum_i w_i k(x_i, x_i)
    double eigen_sum;    // sum of eigenvalues of W^{1/2} K W^{1/2}
    double rel_defect;   // |trace_diag - eigen_sum| / (1 + |trace_diag|)
    bool summable;       // the diagonal quadrature is finite
};

// Trace consistency: the weighted kernel diagonal must match the eigenvalue
// sum of the symmetrized operator. Both sides discretize the same integral,
// through quadrature and through the spectrum.
template <typename Scalar>
HsDiagnostic hs_diagnostic(const CarrierMap<Scalar>& cm) {
    double trace = 0.0;
    for (std::size_t i = 0; i < cm.measure.size(); ++i)
        trace += cm.measure.weight(i) *
                 detail::real_of(cm.gram_on_nodes.entries(static_cast<Eigen::Index>(i),
                                                          static_cast<Eigen::Index>(i)));

    MatrixX<Scalar> s = cm.gram_on_nodes.entries;
    const Eigen::VectorXd sq = cm.measure.sqrt_weight_vector();
    for (Eigen::Index j = 0; j < s.cols(); ++j) s.col(j) *= Scalar(sq(j));
    for (Eigen::Index i = 0; i < s.rows(); ++i) s.row(i) *= Scalar(sq(i));
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(s, Eigen::EigenvaluesOnly);
    const double eigen_sum = es.eigenvalues().sum();

    const double defect = std::abs(trace - eigen_sum) / (1.0 + std::abs(trace));
    return HsDiagnostic{trace, eigen_sum, defect, std::isfinite(trace)};
}

struct OpNormEstimate {
    double p;
    double lower;
    double upper;
    std::optional<double> exact;
};

// Operator norm of L : L^p(mu) -> L^q(mu), 1/p + 1/q = 1, for p in {1, 2, inf}.
//   p = 2:   exact, the spectral radius of W^{1/2} K W^{1/2}.
//   p = inf: exact, sup_ij |k(x_i, x_j)| (the L^1 -> L^inf bound is attained
//            on point masses in the discrete setting).
//   p = 1:   bracketed. Upper bound sum_ij w_i w_j |k_ij|; lower bound from
//            random unit-modulus probes phi (signs for real scalars, phases
//            for complex), ||L phi||_1 with ||phi||_inf = 1. The constant
//            vector is always probed first.
template <typename Scalar>
OpNormEstimate opnorm_estimate(const OperatorMatrix<Scalar>& op, double p,
                               int trials = 1000, std::uint64_t seed = 0) {
    const auto n = op.entries.rows();
    const auto& mu = op.measure;

    if (p == 2.0) {
        Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(symmetrized_operator(op),
                                                          Eigen::EigenvaluesOnly);
        const Eigen::VectorXd& ev = es.eigenvalues();
        const double norm = std::max(std::abs(ev(0)), std::abs(ev(n - 1)));
        return OpNormEstimate{2.0, norm, norm, norm};
    }
    if (std::isinf(p)) {
        double m = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                m = std::max(m, detail::abs_of(op.entries(i, j)) /
                                    mu.weight(static_cast<std::size_t>(j)));
        return OpNormEstimate{p, m, m, m};
    }
    if (p != 1.0)
        fail("invalid-p", "operator norm supports p in {1, 2, inf}, got " +
                              std::to_string(p));

    if (trials < 1) fail("invalid-count", "need at least one probe");
    double upper = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            upper += mu.weight(static_cast<std::size_t>(i)) *
                     detail::abs_of(op.entries(i, j));

    const auto probe_norm = [&](const VectorX<Scalar>& phi) {
        const VectorX<Scalar> image = op.entries * phi;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            acc += mu.weight(static_cast<std::size_t>(i)) * detail::abs_of(image(i));
        return acc;
    };

    double lower = probe_norm(VectorX<Scalar>::Ones(n));
    std::mt19937_64 rng(seed);
    for (int t = 1; t < trials; ++t) {
        VectorX<Scalar> phi(n);
        if constexpr (Kernel<Scalar>::is_complex_field) {
            std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.141592653589793);
            for (Eigen::Index i = 0; i < n; ++i)
                phi(i) = std::polar(1.0, angle(rng));
        } else {
            std::bernoulli_distribution coin(0.5);
            for (Eigen::Index i = 0; i < n; ++i) phi(i) = coin(rng) ? 1.0 : -1.0;
        }
        lower = std::max(lower, probe_norm(phi));
    }
    return OpNormEstimate{1.0, lower, upper, std::nullopt};
}

struct CarlemanReport {
    double q;
    std::vector<double> row_norms;  // ||k(x_i, .)||_{L^q(mu)} per node
    double max_row_norm;
};

// Row-wise integrability diagnostic: the L^q(mu) norm of each kernel section
// sampled on the nodes. A finite max certifies the discrete analogue of the
// Carleman condition for the chosen q.
template <typename Scalar>
CarlemanReport carleman_report(const CarrierMap<Scalar>& cm, double q) {
    const auto n = static_cast<Eigen::Index>(cm.measure.size());
    CarlemanReport report;
    report.q = q;
    report.row_norms.reserve(static_cast<std::size_t>(n));
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const VectorX<Scalar> row = cm.gram_on_nodes.entries.row(i).transpose();
        const double rn = lp_norm(row, cm.measure, q);
        report.row_norms.push_back(rn);
        worst = std::max(worst, rn);
    }
    report.max_row_norm = worst;
    return report;
}

}  // namespace rkhs
