#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rkhs/errors.hpp"
#include "rkhs/kernel.hpp"
#include "rkhs/measure.hpp"
#include "rkhs/point.hpp"

namespace rkhs {

// Spectral decomposition of the kernel integral operator on L^2(mu).
// Eigenvalues are stored descending with every eigenfunction, including the
// null modes; `rank` counts the eigenvalues above rank_tol times the largest.
// The eigenfunctions phi_n (column n of eigenfunctions()) are orthonormal in
// L^2(mu): sum_i w_i phi_m(x_i) conj(phi_n(x_i)) = delta_mn, and the kernel
// reproduces as k(x_i, x_j) = sum_n lambda_n phi_n(x_i) conj(phi_n(x_j)).
template <typename Scalar>
class MercerDecomposition {
public:
    MercerDecomposition(DiscreteMeasure measure, Eigen::VectorXd eigenvalues,
                        MatrixX<Scalar> eigenfunctions, double rank_tol)
        : measure_(std::move(measure)),
          eigenvalues_(std::move(eigenvalues)),
          eigenfunctions_(std::move(eigenfunctions)),
          rank_tol_(rank_tol) {
        const auto n = static_cast<Eigen::Index>(measure_.size());
        if (!(rank_tol_ > 0.0) || !(rank_tol_ < 1.0))
            fail("invalid-rank-tol", "rank tolerance must lie in (0, 1)");
        if (eigenvalues_.size() != n || eigenfunctions_.rows() != n ||
            eigenfunctions_.cols() != n)
            fail("dimension-mismatch",
                 "decomposition needs n eigenvalues and an n x n eigenfunction table");
        for (Eigen::Index m = 0; m < n; ++m) {
            if (!std::isfinite(eigenvalues_(m)))
                fail("invalid-parameter", "eigenvalues must be finite");
            if (m > 0 && eigenvalues_(m) > eigenvalues_(m - 1))
                fail("invalid-parameter", "eigenvalues must be sorted descending");
        }
        const double top = top_eigenvalue();
        rank_ = 0;
        for (Eigen::Index m = 0; m < n; ++m)
            if (eigenvalues_(m) > rank_tol_ * top) ++rank_;
    }

    const DiscreteMeasure& measure() const noexcept { return measure_; }
    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
    const MatrixX<Scalar>& eigenfunctions() const noexcept { return eigenfunctions_; }
    double rank_tol() const noexcept { return rank_tol_; }
    int rank() const noexcept { return rank_; }
    double top_eigenvalue() const noexcept {
        return eigenvalues_.size() ? eigenvalues_(0) : 0.0;
    }

private:
    DiscreteMeasure measure_;
    Eigen::VectorXd eigenvalues_;
    MatrixX<Scalar> eigenfunctions_;
    double rank_tol_;
    int rank_;
};

// Diagonalizes W^{1/2} K W^{1/2} and rescales eigenvectors by W^{-1/2}, which
// makes them orthonormal in L^2(mu) rather than in coefficient space.
// Eigenvalues below -rank_tol * lambda_1 mean the kernel is not of positive
// type on these nodes; negative values within tolerance are clamped to zero.
template <typename Scalar>
MercerDecomposition<Scalar> decompose(const Kernel<Scalar>& kernel,
                                      const DiscreteMeasure& mu,
                                      double rank_tol = 1e-12) {
    if (!(rank_tol > 0.0) || !(rank_tol < 1.0))
        fail("invalid-rank-tol", "rank tolerance must lie in (0, 1)");

    const GramMatrix<Scalar> g = gram(kernel, std::span<const DomainPoint>(mu.nodes()));
    const auto n = static_cast<Eigen::Index>(mu.size());
    const Eigen::VectorXd sq = mu.sqrt_weight_vector();

    MatrixX<Scalar> s = g.entries;
    for (Eigen::Index j = 0; j < n; ++j) s.col(j) *= Scalar(sq(j));
    for (Eigen::Index i = 0; i < n; ++i) s.row(i) *= Scalar(sq(i));

    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(s);
    if (es.info() != Eigen::Success)
        fail("eigensolver-failure", "eigendecomposition did not converge");

    Eigen::VectorXd ev(n);
    MatrixX<Scalar> phi(n, n);
    for (Eigen::Index m = 0; m < n; ++m) {
        ev(m) = es.eigenvalues()(n - 1 - m);  // descending
        phi.col(m) = es.eigenvectors().col(n - 1 - m);
    }
    const double top = std::max(ev(0), 0.0);
    if (ev(n - 1) < -rank_tol * top)
        fail("not-positive-type",
             "most negative eigenvalue " + std::to_string(ev(n - 1)) +
                 " exceeds the tolerance for kernel positivity");
    for (Eigen::Index m = 0; m < n; ++m) ev(m) = std::max(ev(m), 0.0);

    for (Eigen::Index i = 0; i < n; ++i)
        phi.row(i) /= Scalar(sq(i));

    return MercerDecomposition<Scalar>(mu, std::move(ev), std::move(phi), rank_tol);
}

// Rank-r partial reconstruction sum_{n < r} lambda_n phi_n(x_i) conj(phi_n(x_j)).
// r = rank() reproduces the Gram matrix up to the discarded tail.
template <typename Scalar>
MatrixX<Scalar> reconstruct_kernel(const MercerDecomposition<Scalar>& dec, int r) {
    if (r < 0 || r > dec.rank())
        fail("rank-out-of-range", "r must lie in [0, " + std::to_string(dec.rank()) +
                                      "], got " + std::to_string(r));
    const auto n = dec.eigenvalues().size();
    MatrixX<Scalar> acc = MatrixX<Scalar>::Zero(n, n);
    for (int m = 0; m < r; ++m) {
        const auto col = dec.eigenfunctions().col(m);
        acc += Scalar(dec.eigenvalues()(m)) * MatrixX<Scalar>(col * col.adjoint());
    }
    return acc;
}

struct SpectralNorm {
    double norm_sq;   // sum over retained modes of |<v, phi_n>|^2 / lambda_n
    double residual;  // L^2(mu) distance from v to the retained eigenspace
};

namespace detail {

template <typename Scalar>
VectorX<Scalar> modal_coefficients(const MercerDecomposition<Scalar>& dec,
                                   const VectorX<Scalar>& v) {
    if (v.size() != dec.eigenvalues().size())
        fail("dimension-mismatch", "value sequence does not match the node count");
    const auto& mu = dec.measure();
    VectorX<Scalar> wv = v;
    for (Eigen::Index i = 0; i < wv.size(); ++i)
        wv(i) *= Scalar(mu.weight(static_cast<std::size_t>(i)));
    // <v, phi_n>_mu for every mode n (adjoint conjugates phi)
    return dec.eigenfunctions().adjoint() * wv;
}

}  // namespace detail

// Norm of v in the reproducing space through the spectral formula
// ||v||^2 = sum_n |<v, phi_n>|^2 / lambda_n over retained modes, plus the
// L^2(mu) residual of v against the retained eigenspace. A residual well
// above roundoff means v has components the space cannot represent.
template <typename Scalar>
SpectralNorm rkhs_norm_spectral(const MercerDecomposition<Scalar>& dec,
                                const VectorX<Scalar>& v) {
    const VectorX<Scalar> coeff = detail::modal_coefficients(dec, v);
    double norm_sq = 0.0;
    VectorX<Scalar> projected = VectorX<Scalar>::Zero(v.size());
    for (int m = 0; m < dec.rank(); ++m) {
        const double a = detail::abs_of(coeff(m));
        norm_sq += a * a / dec.eigenvalues()(m);
        projected += coeff(m) * dec.eigenfunctions().col(m);
    }
    VectorX<Scalar> defect = v - projected;
    const double residual = lp_norm(defect, dec.measure(), 2.0);
    return SpectralNorm{norm_sq, residual};
}

struct MembershipVerdict {
    bool member;
    double residual;                // L^2(mu) distance to the retained eigenspace
    std::optional<double> norm_sq;  // defined only for members
    bool large_norm_warning;        // norm_sq brushes the 1/(rank_tol * lambda_1) scale
};

// Membership of node values v in the (discretized) reproducing space:
// v belongs iff its residual against the retained eigenspace is at most
// tol times ||v||_{L^2(mu)}. The zero vector is always a member.
template <typename Scalar>
MembershipVerdict membership_test(const MercerDecomposition<Scalar>& dec,
                                  const VectorX<Scalar>& v, double tol = 1e-8) {
    if (!(tol >= 0.0)) fail("invalid-parameter", "tolerance must be >= 0");
    const SpectralNorm sn = rkhs_norm_spectral(dec, v);
    const double vnorm = lp_norm(v, dec.measure(), 2.0);
    const bool member = sn.residual <= tol * vnorm || vnorm == 0.0;
    MembershipVerdict verdict{member, sn.residual, std::nullopt, false};
    if (member) {
        verdict.norm_sq = sn.norm_sq;
        const double top = dec.top_eigenvalue();
        if (top > 0.0)
            verdict.large_norm_warning =
                sn.norm_sq > vnorm * vnorm / (dec.rank_tol() * top);
    }
    return verdict;
}

// Maximal runs of consecutive (descending) eigenvalues whose neighbors differ
// by at most gap_tol; returned as [first, last] index pairs.
inline std::vector<std::pair<int, int>> eigenvalue_clusters(
    const Eigen::VectorXd& descending, double gap_tol) {
    std::vector<std::pair<int, int>> clusters;
    const auto n = descending.size();
    int start = 0;
    for (Eigen::Index m = 1; m <= n; ++m) {
        if (m == n || descending(m - 1) - descending(m) > gap_tol) {
            clusters.emplace_back(start, static_cast<int>(m - 1));
            start = static_cast<int>(m);
        }
    }
    return clusters;
}

template <typename Scalar>
struct SpectralProjectorResult {
    MatrixX<Scalar> projector;  // P_ij = sum_selected phi_n(x_i) conj(phi_n(x_j)) w_j
    int basis_size;
};

// Spectral projector onto the eigenspaces with eigenvalue in (a, b], a > 0.
// Near-degenerate eigenvalues (gap <= 1e-8 * lambda_1) are clustered and
// selected as a whole by their cluster mean, so the interval boundary can
// never split a numerically multiple eigenvalue. P is idempotent and
// self-adjoint in L^2(mu) by orthonormality of the eigenfunctions.
template <typename Scalar>
SpectralProjectorResult<Scalar> spectral_projector(
    const MercerDecomposition<Scalar>& dec, double a, double b) {
    if (!(a > 0.0) || !(a < b) || std::isnan(b))
        fail("invalid-interval",
             "need 0 < a < b, got (" + std::to_string(a) + ", " + std::to_string(b) + "]");

    const auto& ev = dec.eigenvalues();
    const auto n = ev.size();
    const double gap_tol = 1e-8 * dec.top_eigenvalue();

    std::vector<int> selected;
    for (const auto& [first, last] : eigenvalue_clusters(ev, gap_tol)) {
        double mean = 0.0;
        for (int m = first; m <= last; ++m) mean += ev(m);
        mean /= static_cast<double>(last - first + 1);
        if (mean > a && mean <= b && mean > 0.0)
            for (int m = first; m <= last; ++m)
                if (ev(m) > 0.0) selected.push_back(m);
    }

    MatrixX<Scalar> p = MatrixX<Scalar>::Zero(n, n);
    for (int m : selected) {
        const auto col = dec.eigenfunctions().col(m);
        p += col * col.adjoint();
    }
    for (Eigen::Index j = 0; j < n; ++j)
        p.col(j) *= Scalar(dec.measure().weight(static_cast<std::size_t>(j)));
    return SpectralProjectorResult<Scalar>{std::move(p),
                                           static_cast<int>(selected.size())};
}

struct PointwiseMass {
    double mass;         // sum over retained modes of |phi_n(x_i)|^2
    bool in_range_of_l;  // kernel section at the node lies in the retained span
};

// Diagonal of the reproducing "density" at node i. The range test projects
// the kernel column k(., x_i) (reconstructed exactly by the full eigensystem)
// onto the discarded modes: that residual is sqrt(sum_cut lambda_n^2
// |phi_n(x_i)|^2), compared against sqrt(rank_tol) times the column's full
// L^2(mu) size. At full rank nothing is discarded and the test always passes.
template <typename Scalar>
PointwiseMass pointwise_mass(const MercerDecomposition<Scalar>& dec,
                             std::size_t node_index) {
    const auto n = dec.eigenvalues().size();
    if (node_index >= static_cast<std::size_t>(n))
        fail("index-out-of-range", "node index " + std::to_string(node_index) +
                                       " outside 0.." + std::to_string(n - 1));
    const auto i = static_cast<Eigen::Index>(node_index);

    double mass = 0.0;
    for (int m = 0; m < dec.rank(); ++m) {
        const double a = detail::abs_of(dec.eigenfunctions()(i, m));
        mass += a * a;
    }

    double kept_sq = 0.0, cut_sq = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
        const double lam = dec.eigenvalues()(m);
        const double a = detail::abs_of(dec.eigenfunctions()(i, m));
        const double term = lam * lam * a * a;
        (m < dec.rank() ? kept_sq : cut_sq) += term;
    }
    const double total = kept_sq + cut_sq;
    const bool in_range =
        total == 0.0 || std::sqrt(cut_sq) <= std::sqrt(dec.rank_tol() * total);
    return PointwiseMass{mass, in_range};
}

}  // namespace rkhs
