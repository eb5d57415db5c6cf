#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "rkhs/errors.hpp"
#include "rkhs/measure.hpp"
#include "rkhs/point.hpp"

namespace rkhs {

// Closed-form kernel families. All are Hermitian by construction; positivity
// is a property to be checked, not assumed (see check_positive_type).

struct GaussianKernel {
    double sigma;  // bandwidth, > 0
    friend bool operator==(const GaussianKernel&, const GaussianKernel&) = default;
};

// min(x, t) on each coordinate, multiplied across coordinates. Positive type
// on nonnegative coordinates; the 1-d case is the covariance of standard
// Brownian motion on [0, inf).
struct BrownianKernel {
    friend bool operator==(const BrownianKernel&, const BrownianKernel&) = default;
};

struct LaplaceKernel {
    double sigma;  // length scale, > 0
    friend bool operator==(const LaplaceKernel&, const LaplaceKernel&) = default;
};

struct ConstantKernel {
    double value;  // >= 0 for positive type; arbitrary finite values evaluate fine
    friend bool operator==(const ConstantKernel&, const ConstantKernel&) = default;
};

// Block-diagonal kernel: block n is the interval [n, n+1) on the first
// coordinate. Two points in the same block n map to sigmas[n]^2 / masses[n];
// points in different blocks (or outside every block) map to 0. This is the
// Gram function of the feature map sending block n to the single unit
// direction e_n scaled by sigmas[n] / sqrt(masses[n]).
struct BlockKernel {
    std::vector<double> sigmas;  // one per block, > 0
    std::vector<double> masses;  // block masses a_n, > 0 (empty means all 1)
    friend bool operator==(const BlockKernel&, const BlockKernel&) = default;
};

// Kernel tabulated on a finite node set. Values are symmetrized at
// construction; evaluation at points that match no node is an error.
template <typename Scalar>
struct MatrixKernel {
    std::vector<DomainPoint> nodes;
    MatrixX<Scalar> values;

    friend bool operator==(const MatrixKernel& a, const MatrixKernel& b) {
        return a.nodes == b.nodes && a.values == b.values;
    }
};

template <typename Scalar>
class Kernel {
public:
    static_assert(std::is_same_v<Scalar, double> || std::is_same_v<Scalar, Complex>,
                  "Kernel supports double and std::complex<double>");
    static constexpr bool is_complex_field = std::is_same_v<Scalar, Complex>;

    using Family = std::variant<GaussianKernel, BrownianKernel, LaplaceKernel,
                                ConstantKernel, BlockKernel, MatrixKernel<Scalar>>;

    explicit Kernel(Family family) : family_(std::move(family)) { validate(); }

    static Kernel gaussian(double sigma) { return Kernel(GaussianKernel{sigma}); }
    static Kernel brownian() { return Kernel(BrownianKernel{}); }
    static Kernel laplace(double sigma) { return Kernel(LaplaceKernel{sigma}); }
    static Kernel constant(double value) { return Kernel(ConstantKernel{value}); }
    static Kernel block(std::vector<double> sigmas, std::vector<double> masses = {}) {
        return Kernel(BlockKernel{std::move(sigmas), std::move(masses)});
    }
    static Kernel matrix(std::vector<DomainPoint> nodes, MatrixX<Scalar> values) {
        return Kernel(MatrixKernel<Scalar>{std::move(nodes), std::move(values)});
    }

    Scalar operator()(const DomainPoint& x, const DomainPoint& t) const {
        return std::visit([&](const auto& k) { return eval(k, x, t); }, family_);
    }

    const Family& family() const noexcept { return family_; }

    std::string family_name() const {
        struct Namer {
            std::string operator()(const GaussianKernel&) const { return "gaussian"; }
            std::string operator()(const BrownianKernel&) const { return "brownian"; }
            std::string operator()(const LaplaceKernel&) const { return "laplace"; }
            std::string operator()(const ConstantKernel&) const { return "constant"; }
            std::string operator()(const BlockKernel&) const { return "block"; }
            std::string operator()(const MatrixKernel<Scalar>&) const { return "matrix"; }
        };
        return std::visit(Namer{}, family_);
    }

    // Largest |A_ij - conj(A_ji)| found before symmetrization; 0 for
    // closed-form families. Loaders warn when this exceeds 1e-8.
    double symmetrization_defect() const noexcept { return symmetrization_defect_; }

    friend bool operator==(const Kernel& a, const Kernel& b) {
        return a.family_ == b.family_;
    }

private:
    void validate() {
        std::visit([this](auto& k) { check(k); }, family_);
    }

    void check(GaussianKernel& k) const {
        if (!std::isfinite(k.sigma) || k.sigma <= 0.0)
            fail("invalid-parameter", "gaussian bandwidth must be positive");
    }
    void check(BrownianKernel&) const {}
    void check(LaplaceKernel& k) const {
        if (!std::isfinite(k.sigma) || k.sigma <= 0.0)
            fail("invalid-parameter", "laplace length scale must be positive");
    }
    void check(ConstantKernel& k) const {
        if (!std::isfinite(k.value))
            fail("invalid-parameter", "constant kernel value must be finite");
    }
    void check(BlockKernel& k) const {
        if (k.sigmas.empty())
            fail("invalid-parameter", "block kernel needs at least one block");
        if (k.masses.empty())
            k.masses.assign(k.sigmas.size(), 1.0);
        if (k.masses.size() != k.sigmas.size())
            fail("invalid-parameter", "block kernel needs one mass per sigma");
        for (double s : k.sigmas)
            if (!std::isfinite(s) || s <= 0.0)
                fail("invalid-parameter", "block sigmas must be positive");
        for (double a : k.masses)
            if (!std::isfinite(a) || a <= 0.0)
                fail("invalid-mass", "block masses must be positive");
    }
    void check(MatrixKernel<Scalar>& k) {
        const auto n = static_cast<Eigen::Index>(k.nodes.size());
        if (n == 0)
            fail("invalid-parameter", "matrix kernel needs at least one node");
        if (k.values.rows() != n || k.values.cols() != n)
            fail("dimension-mismatch",
                 "matrix kernel has " + std::to_string(k.nodes.size()) +
                     " nodes but a " + std::to_string(k.values.rows()) + "x" +
                     std::to_string(k.values.cols()) + " value table");
        const std::size_t d = k.nodes.front().dim();
        for (const auto& x : k.nodes)
            if (x.dim() != d)
                fail("dimension-mismatch", "matrix kernel nodes mix dimensions");
        for (std::size_t a = 0; a < k.nodes.size(); ++a)
            for (std::size_t b = a + 1; b < k.nodes.size(); ++b)
                if (approx_same_point(k.nodes[a], k.nodes[b]))
                    fail("duplicate-node", "matrix kernel node " +
                                               to_string(k.nodes[b]) + " repeats");
        double defect = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                if (!std::isfinite(detail::abs_of(k.values(i, j))))
                    fail("invalid-parameter", "matrix kernel values must be finite");
                defect = std::max(
                    defect, detail::abs_of(k.values(i, j) - detail::conj_of(k.values(j, i))));
            }
        symmetrization_defect_ = defect;
        MatrixX<Scalar> sym =
            (k.values + MatrixX<Scalar>(k.values.adjoint())) / Scalar(2);
        k.values = std::move(sym);
    }

    static Scalar eval(const GaussianKernel& k, const DomainPoint& x, const DomainPoint& t) {
        return Scalar(std::exp(-squared_distance(x, t) / (2.0 * k.sigma * k.sigma)));
    }
    static Scalar eval(const BrownianKernel&, const DomainPoint& x, const DomainPoint& t) {
        require_same_dim(x, t);
        double v = 1.0;
        for (std::size_t i = 0; i < x.dim(); ++i) v *= std::min(x[i], t[i]);
        return Scalar(v);
    }
    static Scalar eval(const LaplaceKernel& k, const DomainPoint& x, const DomainPoint& t) {
        return Scalar(std::exp(-distance(x, t) / k.sigma));
    }
    static Scalar eval(const ConstantKernel& k, const DomainPoint& x, const DomainPoint& t) {
        require_same_dim(x, t);
        return Scalar(k.value);
    }
    static Scalar eval(const BlockKernel& k, const DomainPoint& x, const DomainPoint& t) {
        require_same_dim(x, t);
        const auto block_of = [&](const DomainPoint& p) -> std::ptrdiff_t {
            const double f = std::floor(p[0]);
            if (f < 0.0 || f >= static_cast<double>(k.sigmas.size())) return -1;
            return static_cast<std::ptrdiff_t>(f);
        };
        const auto bx = block_of(x);
        if (bx < 0 || bx != block_of(t)) return Scalar(0);
        const auto b = static_cast<std::size_t>(bx);
        return Scalar(k.sigmas[b] * k.sigmas[b] / k.masses[b]);
    }
    static Scalar eval(const MatrixKernel<Scalar>& k, const DomainPoint& x,
                       const DomainPoint& t) {
        const auto find = [&](const DomainPoint& p) -> std::size_t {
            for (std::size_t i = 0; i < k.nodes.size(); ++i)
                if (approx_same_point(k.nodes[i], p)) return i;
            fail("unknown-point",
                 "point " + to_string(p) + " matches no node of the tabulated kernel");
        };
        return k.values(static_cast<Eigen::Index>(find(x)),
                        static_cast<Eigen::Index>(find(t)));
    }

    Family family_;
    double symmetrization_defect_ = 0.0;
};

template <typename Scalar>
struct GramMatrix {
    std::vector<DomainPoint> points;
    MatrixX<Scalar> entries;  // entries(i, j) = k(points[i], points[j])
};

// Assembles the Gram matrix on pairwise distinct points. Only the upper
// triangle is evaluated; the lower is its conjugate mirror, so the result is
// Hermitian to the last bit whenever the kernel is.
template <typename Scalar>
GramMatrix<Scalar> gram(const Kernel<Scalar>& k, std::span<const DomainPoint> points) {
    const auto n = static_cast<Eigen::Index>(points.size());
    MatrixX<Scalar> g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const Scalar v = k(points[static_cast<std::size_t>(i)],
                               points[static_cast<std::size_t>(j)]);
            g(i, j) = v;
            g(j, i) = detail::conj_of(v);
        }
        g(i, i) = Scalar(detail::real_of(g(i, i)));
    }
    return GramMatrix<Scalar>{std::vector<DomainPoint>(points.begin(), points.end()),
                              std::move(g)};
}

struct FeatureDistanceResult {
    double distance;        // sqrt of the clamped squared distance
    double squared;         // k(x,x) + k(t,t) - 2 Re k(x,t) before clamping
    bool negative_warning;  // squared fell below -1e-8: not a positive-type kernel
};

// Distance between the feature vectors of x and t, computed from kernel
// values alone. For positive-type kernels the discriminant is nonnegative up
// to roundoff; a markedly negative value is reported instead of hidden.
template <typename Scalar>
FeatureDistanceResult feature_distance_report(const Kernel<Scalar>& k,
                                              const DomainPoint& x,
                                              const DomainPoint& t) {
    const double sq = detail::real_of(k(x, x)) + detail::real_of(k(t, t)) -
                      2.0 * detail::real_of(k(x, t));
    return FeatureDistanceResult{std::sqrt(std::max(0.0, sq)), sq, sq < -1e-8};
}

template <typename Scalar>
double feature_distance(const Kernel<Scalar>& k, const DomainPoint& x,
                        const DomainPoint& t) {
    return feature_distance_report(k, x, t).distance;
}

// Random point generator driven by an explicit engine, so every consumer is
// reproducible from a seed.
using PointSampler = std::function<DomainPoint(std::mt19937_64&)>;

inline PointSampler uniform_box_sampler(double lo, double hi, std::size_t dim = 1) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
        fail("invalid-range", "sampler needs finite lo < hi");
    if (dim == 0) fail("invalid-count", "sampler needs dimension >= 1");
    return [lo, hi, dim](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> u(lo, hi);
        std::vector<double> c(dim);
        for (auto& v : c) v = u(rng);
        return DomainPoint(std::move(c));
    };
}

inline PointSampler node_sampler(std::vector<DomainPoint> nodes) {
    if (nodes.empty()) fail("invalid-count", "sampler needs at least one node");
    return [nodes = std::move(nodes)](std::mt19937_64& rng) {
        std::uniform_int_distribution<std::size_t> u(0, nodes.size() - 1);
        return nodes[u(rng)];
    };
}

// Natural sampling domain per family: tabulated kernels sample their own
// nodes, block kernels their block range, everything else the unit interval.
template <typename Scalar>
PointSampler default_sampler(const Kernel<Scalar>& k) {
    if (const auto* m = std::get_if<MatrixKernel<Scalar>>(&k.family()))
        return node_sampler(m->nodes);
    if (const auto* b = std::get_if<BlockKernel>(&k.family()))
        return uniform_box_sampler(0.0, static_cast<double>(b->sigmas.size()));
    return uniform_box_sampler(0.0, 1.0);
}

template <typename Scalar>
struct PositivityReport {
    bool passed = true;
    int trials = 0;
    int subset_size = 0;
    double tol = 0.0;
    // Most negative eigenvalue seen across trials, relative to the largest
    // eigenvalue magnitude of its section; <= 0, and 0 for a clean pass.
    double worst_relative_negative = 0.0;
    double worst_asymmetry = 0.0;  // largest |k(x,t) - conj(k(t,x))| sampled
    bool symmetry_ok = true;
    // Witness of a failure: a point set and coefficients whose quadratic form
    // sum_ij c_i conj(c_j) k(x_i, x_j) is negative. Re-evaluated here by
    // direct summation, independent of the eigensolver that found it.
    std::vector<DomainPoint> witness_points;
    VectorX<Scalar> witness_coefficients;
    double witness_quadratic_form = 0.0;
};

// Randomized finite-section positivity check. Draws `trials` subsets of
// `subset_size` distinct points, assembles each Gram section, and looks for
// eigenvalues below -tol times the section's spectral radius. Hermitian
// symmetry is verified on the sampled pairs as well, since for real scalars
// positivity of the quadratic form does not imply symmetry.
template <typename Scalar>
PositivityReport<Scalar> check_positive_type(const Kernel<Scalar>& k,
                                             const PointSampler& sample,
                                             int subset_size, int trials, double tol,
                                             std::uint64_t seed = 0) {
    if (subset_size < 1) fail("invalid-count", "subset size must be >= 1");
    if (trials < 1) fail("invalid-count", "trial count must be >= 1");
    if (!(tol >= 0.0)) fail("invalid-parameter", "tolerance must be >= 0");

    PositivityReport<Scalar> report;
    report.trials = trials;
    report.subset_size = subset_size;
    report.tol = tol;

    std::mt19937_64 rng(seed);
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<DomainPoint> pts;
        pts.reserve(static_cast<std::size_t>(subset_size));
        for (int attempts = 0;
             pts.size() < static_cast<std::size_t>(subset_size) &&
             attempts < 200 * subset_size;
             ++attempts) {
            DomainPoint p = sample(rng);
            const bool dup = std::any_of(pts.begin(), pts.end(), [&](const auto& q) {
                return q == p;
            });
            if (!dup) pts.push_back(std::move(p));
        }
        if (pts.empty()) continue;

        const auto n = static_cast<Eigen::Index>(pts.size());
        MatrixX<Scalar> g(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                g(i, j) = k(pts[static_cast<std::size_t>(i)],
                            pts[static_cast<std::size_t>(j)]);

        double asym = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i; j < n; ++j)
                asym = std::max(asym,
                                detail::abs_of(g(i, j) - detail::conj_of(g(j, i))));
        report.worst_asymmetry = std::max(report.worst_asymmetry, asym);

        Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(
            MatrixX<Scalar>((g + MatrixX<Scalar>(g.adjoint())) / Scalar(2)));
        const Eigen::VectorXd& ev = es.eigenvalues();
        const double radius = std::max(std::abs(ev(0)), std::abs(ev(n - 1)));
        const double rel = radius > 0.0 ? ev(0) / radius : 0.0;

        const double diag_scale =
            1.0 + g.diagonal().cwiseAbs().maxCoeff();
        if (asym > tol * diag_scale) report.symmetry_ok = false;

        const bool negative = rel < -tol;
        if ((negative || !report.symmetry_ok) && report.passed) {
            report.passed = false;
            report.witness_points = pts;
            report.witness_coefficients = es.eigenvectors().col(0);
            Scalar q{};
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j)
                    q += report.witness_coefficients(i) *
                         detail::conj_of(report.witness_coefficients(j)) *
                         k(pts[static_cast<std::size_t>(j)],
                           pts[static_cast<std::size_t>(i)]);
            report.witness_quadratic_form = detail::real_of(q);
        }
        report.worst_relative_negative =
            std::min(report.worst_relative_negative, rel);
    }
    return report;
}

struct ContinuityReport {
    std::vector<DomainPoint> base_points;
    std::vector<double> scales;       // strictly decreasing
    Eigen::MatrixXd sup_distance;     // rows: base points, cols: scales
    Eigen::VectorXd decay_exponent;   // fitted p in sup ~ C h^p (two finest scales)
    double local_bound = 0.0;         // sup of k(x, x) over base points and probes
    double tol = 0.0;
    bool diagonal_continuous = false;
};

// Probes feature-space continuity along the diagonal. For each base point and
// shrinking scale h the sup of feature_distance over perturbations within h is
// recorded. The verdict fits a power law to the two finest scales: a positive
// decay exponent means the sup vanishes as h -> 0; sups that are already below
// tol times the largest recorded one, or zero outright, pass immediately.
// Tabulated kernels are probed at their declared nodes within h instead of
// synthetic perturbations.
template <typename Scalar>
ContinuityReport continuity_probe(const Kernel<Scalar>& k,
                                  std::span<const DomainPoint> base_points,
                                  std::span<const double> scales, double tol = 1e-6) {
    if (base_points.empty()) fail("invalid-count", "need at least one base point");
    if (scales.empty()) fail("invalid-count", "need at least one scale");
    for (std::size_t s = 0; s < scales.size(); ++s) {
        if (!std::isfinite(scales[s]) || scales[s] <= 0.0)
            fail("invalid-range", "scales must be positive and finite");
        if (s > 0 && scales[s] >= scales[s - 1])
            fail("invalid-range", "scales must be strictly decreasing");
    }

    const auto* tabulated = std::get_if<MatrixKernel<Scalar>>(&k.family());
    const std::size_t nb = base_points.size();
    const std::size_t ns = scales.size();

    ContinuityReport report;
    report.base_points.assign(base_points.begin(), base_points.end());
    report.scales.assign(scales.begin(), scales.end());
    report.sup_distance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nb),
                                                static_cast<Eigen::Index>(ns));
    report.decay_exponent = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nb));
    report.tol = tol;

    static constexpr double kFractions[] = {0.25, 0.5, 0.75, 1.0};
    double local_bound = 0.0;
    const auto probe_diag = [&](const DomainPoint& p) {
        local_bound = std::max(local_bound, detail::real_of(k(p, p)));
    };

    bool all_continuous = true;
    for (std::size_t b = 0; b < nb; ++b) {
        const DomainPoint& x = base_points[b];
        probe_diag(x);
        for (std::size_t s = 0; s < ns; ++s) {
            const double h = scales[s];
            double sup = 0.0;
            if (tabulated) {
                for (const auto& t : tabulated->nodes) {
                    if (t.dim() != x.dim() || t == x) continue;
                    double dmax = 0.0;
                    for (std::size_t c = 0; c < x.dim(); ++c)
                        dmax = std::max(dmax, std::abs(t[c] - x[c]));
                    if (dmax > h) continue;
                    probe_diag(t);
                    sup = std::max(sup, feature_distance(k, x, t));
                }
            } else {
                for (std::size_t c = 0; c < x.dim(); ++c)
                    for (double f : kFractions)
                        for (double sign : {-1.0, 1.0}) {
                            std::vector<double> coords = x.coords();
                            coords[c] += sign * f * h;
                            DomainPoint t(std::move(coords));
                            probe_diag(t);
                            sup = std::max(sup, feature_distance(k, x, t));
                        }
            }
            report.sup_distance(static_cast<Eigen::Index>(b),
                                static_cast<Eigen::Index>(s)) = sup;
        }

        const auto row = report.sup_distance.row(static_cast<Eigen::Index>(b));
        const double row_max = row.maxCoeff();
        const double s_fine = row(static_cast<Eigen::Index>(ns - 1));
        bool continuous;
        if (s_fine <= tol * row_max || row_max == 0.0) {
            continuous = true;
        } else if (ns < 2) {
            continuous = false;  // one nonnegligible sample gives no decay evidence
        } else {
            const double s_prev = row(static_cast<Eigen::Index>(ns - 2));
            const double h_prev = scales[ns - 2];
            const double h_fine = scales[ns - 1];
            double alpha = 0.0;
            if (s_prev > 0.0 && s_fine > 0.0)
                alpha = std::log(s_prev / s_fine) / std::log(h_prev / h_fine);
            else if (s_fine == 0.0)
                alpha = 1.0;  // collapsed to zero between the two finest scales
            report.decay_exponent(static_cast<Eigen::Index>(b)) = alpha;
            continuous = alpha >= 0.05;
        }
        all_continuous = all_continuous && continuous;
    }

    report.local_bound = local_bound;
    report.diagonal_continuous = all_continuous;
    return report;
}

}  // namespace rkhs
