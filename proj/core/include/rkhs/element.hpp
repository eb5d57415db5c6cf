#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rkhs/errors.hpp"
#include "rkhs/kernel.hpp"
#include "rkhs/measure.hpp"
#include "rkhs/point.hpp"

namespace rkhs {

// A finite combination f = sum_i c_i k(., x_i) of kernel sections. These
// spans are dense in the space the kernel reproduces, so every computable
// quantity here is exact linear algebra on kernel values.
template <typename Scalar>
class RkhsElement {
public:
    RkhsElement(Kernel<Scalar> kernel, std::vector<DomainPoint> anchors,
                VectorX<Scalar> coefficients)
        : kernel_(std::move(kernel)),
          anchors_(std::move(anchors)),
          coefficients_(std::move(coefficients)) {
        if (anchors_.size() != static_cast<std::size_t>(coefficients_.size()))
            fail("dimension-mismatch",
                 std::to_string(anchors_.size()) + " anchors vs " +
                     std::to_string(coefficients_.size()) + " coefficients");
        for (Eigen::Index i = 0; i < coefficients_.size(); ++i)
            if (!std::isfinite(detail::abs_of(coefficients_(i))))
                fail("invalid-coefficient", "coefficients must be finite");
        std::vector<std::size_t> order(anchors_.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
            return lex_less(anchors_[a], anchors_[b]);
        });
        for (std::size_t k = 1; k < order.size(); ++k)
            if (anchors_[order[k - 1]] == anchors_[order[k]])
                fail("duplicate-anchor",
                     "anchor " + to_string(anchors_[order[k]]) + " repeats");
    }

    // The kernel section k(., x): the element that reproduces evaluation at x.
    static RkhsElement section(Kernel<Scalar> kernel, DomainPoint x) {
        VectorX<Scalar> one(1);
        one(0) = Scalar(1);
        return RkhsElement(std::move(kernel), {std::move(x)}, std::move(one));
    }

    const Kernel<Scalar>& kernel() const noexcept { return kernel_; }
    const std::vector<DomainPoint>& anchors() const noexcept { return anchors_; }
    const VectorX<Scalar>& coefficients() const noexcept { return coefficients_; }
    std::size_t size() const noexcept { return anchors_.size(); }

private:
    Kernel<Scalar> kernel_;
    std::vector<DomainPoint> anchors_;
    VectorX<Scalar> coefficients_;
};

// Pointwise value f(x) = sum_i c_i k(x, x_i). Zero coefficients are skipped;
// they contribute exactly zero and often dominate sparse elements.
template <typename Scalar>
Scalar evaluate_element(const RkhsElement<Scalar>& f, const DomainPoint& x) {
    Scalar acc{};
    const auto& c = f.coefficients();
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Scalar ci = c(static_cast<Eigen::Index>(i));
        if (ci == Scalar(0)) continue;
        acc += ci * f.kernel()(x, f.anchors()[i]);
    }
    return acc;
}

// Inner product of spans, <f, g> = sum_ij c_i conj(d_j) k(t_j, x_i) where f
// anchors at x with coefficients c and g anchors at t with coefficients d.
// Both elements must carry the same kernel; the value is independent of how
// either element is written as a combination.
template <typename Scalar>
Scalar rkhs_inner(const RkhsElement<Scalar>& f, const RkhsElement<Scalar>& g) {
    if (!(f.kernel() == g.kernel()))
        fail("kernel-mismatch", "inner product needs both elements on one kernel");
    Scalar acc{};
    const auto& c = f.coefficients();
    const auto& d = g.coefficients();
    for (std::size_t j = 0; j < g.size(); ++j) {
        const Scalar dj = detail::conj_of(d(static_cast<Eigen::Index>(j)));
        if (dj == Scalar(0)) continue;
        Scalar row{};
        for (std::size_t i = 0; i < f.size(); ++i) {
            const Scalar ci = c(static_cast<Eigen::Index>(i));
            if (ci == Scalar(0)) continue;
            row += ci * f.kernel()(g.anchors()[j], f.anchors()[i]);
        }
        acc += dj * row;
    }
    return acc;
}

template <typename Scalar>
double rkhs_norm(const RkhsElement<Scalar>& f) {
    return std::sqrt(std::max(0.0, detail::real_of(rkhs_inner(f, f))));
}

// Largest |f(x) - <f, k(., x)>| over the probe points. The two sides are the
// same finite sum evaluated through different code paths, so the defect
// measures floating-point noise plus any kernel asymmetry.
template <typename Scalar>
double reproducing_check(const RkhsElement<Scalar>& f,
                         std::span<const DomainPoint> probes) {
    double worst = 0.0;
    for (const auto& x : probes) {
        const Scalar direct = evaluate_element(f, x);
        const Scalar paired = rkhs_inner(f, RkhsElement<Scalar>::section(f.kernel(), x));
        worst = std::max(worst, detail::abs_of(direct - paired));
    }
    return worst;
}

template <typename Scalar>
struct Interpolant {
    RkhsElement<Scalar> element;
    double residual;     // l2 norm of G c - y on the interpolation points
    int retained_rank;   // Gram eigenvalues kept by the spectral cutoff
};

// Minimum-norm interpolation: solve G c = y through the eigendecomposition of
// the Gram matrix G, inverting only eigenvalues above rank_tol times the
// largest. Targets with components in the discarded eigenspace are fit in the
// least-squares sense and show up in the residual.
template <typename Scalar>
Interpolant<Scalar> interpolate(const Kernel<Scalar>& kernel,
                                std::vector<DomainPoint> points,
                                const VectorX<Scalar>& targets,
                                double rank_tol = 1e-12) {
    if (points.empty())
        fail("invalid-count", "interpolation needs at least one point");
    if (points.size() != static_cast<std::size_t>(targets.size()))
        fail("dimension-mismatch",
             std::to_string(points.size()) + " points vs " +
                 std::to_string(targets.size()) + " targets");
    if (!(rank_tol > 0.0) || !(rank_tol < 1.0))
        fail("invalid-rank-tol", "rank tolerance must lie in (0, 1)");
    for (Eigen::Index i = 0; i < targets.size(); ++i)
        if (!std::isfinite(detail::abs_of(targets(i))))
            fail("invalid-coefficient", "targets must be finite");
    {
        std::vector<std::size_t> order(points.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return lex_less(points[a], points[b]);
        });
        for (std::size_t k = 1; k < order.size(); ++k)
            if (points[order[k - 1]] == points[order[k]])
                fail("duplicate-point",
                     "interpolation point " + to_string(points[order[k]]) + " repeats");
    }

    const GramMatrix<Scalar> g = gram(kernel, std::span<const DomainPoint>(points));
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(g.entries);
    if (es.info() != Eigen::Success)
        fail("eigensolver-failure", "Gram eigendecomposition did not converge");
    const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
    const auto n = ev.size();
    const double top = ev(n - 1);
    if (!(top > 0.0))
        fail("all-eigenvalues-cut", "Gram matrix has no positive eigenvalues");
    const double cut = rank_tol * top;

    VectorX<Scalar> c = VectorX<Scalar>::Zero(n);
    int retained = 0;
    for (Eigen::Index m = 0; m < n; ++m) {
        if (!(ev(m) > cut)) continue;
        ++retained;
        const VectorX<Scalar> u = es.eigenvectors().col(m);
        const Scalar coeff = u.dot(targets) / Scalar(ev(m));  // dot conjugates u
        c += coeff * u;
    }
    if (retained == 0)
        fail("all-eigenvalues-cut", "every Gram eigenvalue fell below the cutoff");

    const double residual = (g.entries * c - targets).norm();
    return Interpolant<Scalar>{
        RkhsElement<Scalar>(kernel, std::move(points), std::move(c)), residual,
        retained};
}

}  // namespace rkhs
