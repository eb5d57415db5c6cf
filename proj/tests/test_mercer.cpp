#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "rkhs/mercer.hpp"
#include "rkhs/operator.hpp"
#include "test_support.hpp"

using namespace rkhs;

namespace {
bool fails_with(const char* code, const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code() == code;
    }
    return false;
}

template <typename Scalar>
double orthonormality_defect(const MercerDecomposition<Scalar>& dec) {
    const auto n = dec.eigenvalues().size();
    double worst = 0.0;
    for (Eigen::Index m = 0; m < n; ++m)
        for (Eigen::Index l = 0; l < n; ++l) {
            const VectorX<Scalar> a = dec.eigenfunctions().col(m);
            const VectorX<Scalar> b = dec.eigenfunctions().col(l);
            const Scalar inner = weighted_inner(a, b, dec.measure());
            const double target = m == l ? 1.0 : 0.0;
            worst = std::max(worst, detail::abs_of(inner - Scalar(target)));
        }
    return worst;
}

Kernel<Complex> hermitian_pair_kernel() {
    MatrixX<Complex> values(2, 2);
    values << Complex(2.0, 0.0), Complex(0.0, 1.0), Complex(0.0, -1.0),
        Complex(3.0, 0.0);
    return Kernel<Complex>::matrix({DomainPoint{0.0}, DomainPoint{1.0}}, values);
}
}  // namespace

TEST_CASE("block kernels diagonalize to the squared scales") {
    const auto k = Kernel<double>::block({3.0, 2.0, 1.0});
    for (std::size_t npb : {std::size_t{1}, std::size_t{4}}) {
        const auto mu = build_block_measure({1.0, 1.0, 1.0}, npb);
        const auto dec = decompose(k, mu);
        CHECK(dec.rank() == 3);
        CHECK(dec.eigenvalues()(0) == doctest::Approx(9.0).epsilon(1e-12));
        CHECK(dec.eigenvalues()(1) == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(dec.eigenvalues()(2) == doctest::Approx(1.0).epsilon(1e-12));
        for (Eigen::Index m = 3; m < dec.eigenvalues().size(); ++m)
            CHECK(std::abs(dec.eigenvalues()(m)) <= 1e-12);
    }
}

TEST_CASE("block eigenfunctions are normalized indicators") {
    const std::size_t npb = 4;
    const auto mu = build_block_measure({1.0, 1.0, 1.0}, npb);
    const auto dec = decompose(Kernel<double>::block({3.0, 2.0, 1.0}), mu);
    // mode m lives on block m: |phi_m| = 1 there (unit block mass), 0 elsewhere
    for (int m = 0; m < 3; ++m)
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const double a = std::abs(dec.eigenfunctions()(
                static_cast<Eigen::Index>(i), m));
            if (i / npb == static_cast<std::size_t>(m))
                CHECK(a == doctest::Approx(1.0).epsilon(1e-10));
            else
                CHECK(a <= 1e-10);
        }
}

TEST_CASE("eigenfunctions are orthonormal in the weighted inner product") {
    std::mt19937_64 rng(555);
    const auto mu = testgen::random_measure(rng, 16);
    for (const auto& k : {Kernel<double>::gaussian(1.5), Kernel<double>::laplace(0.8),
                          Kernel<double>::brownian()})
        CHECK(orthonormality_defect(decompose(k, mu)) <= 1e-10);
}

TEST_CASE("each retained mode satisfies the discrete eigen relation") {
    const auto mu = build_uniform_grid(0.0, 1.0, 24);
    for (const auto& k : {Kernel<double>::gaussian(1.0), Kernel<double>::brownian()}) {
        const auto dec = decompose(k, mu);
        const auto op = make_operator(k, mu);
        for (int m = 0; m < dec.rank(); ++m) {
            const VectorX<double> phi = dec.eigenfunctions().col(m);
            const VectorX<double> image = op.entries * phi;
            const double defect =
                (image - dec.eigenvalues()(m) * phi).cwiseAbs().maxCoeff();
            CHECK(defect <= 1e-10 * dec.top_eigenvalue() *
                                (1.0 + phi.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("the full-rank reconstruction recovers the kernel table") {
    const auto mu = build_uniform_grid(0.0, 1.0, 64);
    const auto k = Kernel<double>::gaussian(1.0);
    const auto dec = decompose(k, mu);
    const auto g = gram(k, std::span<const DomainPoint>(mu.nodes()));
    const MatrixX<double> recon = reconstruct_kernel(dec, dec.rank());
    CHECK((recon - g.entries).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("diagonal truncation defects shrink as modes are added") {
    const auto mu = build_uniform_grid(0.0, 1.0, 32);
    const auto k = Kernel<double>::gaussian(1.0);
    const auto dec = decompose(k, mu);
    const auto g = gram(k, std::span<const DomainPoint>(mu.nodes()));

    double previous = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= dec.rank(); ++r) {
        const MatrixX<double> recon = reconstruct_kernel(dec, r);
        double defect = 0.0;
        for (Eigen::Index i = 0; i < g.entries.rows(); ++i)
            defect = std::max(defect, g.entries(i, i) - recon(i, i));
        CHECK(defect >= -1e-14);  // partial diagonal sums never overshoot
        CHECK(defect <= previous + 1e-14);
        previous = defect;
    }
    CHECK(previous <= 1e-10);
}

TEST_CASE("grid eigenvalues approach the first Dirichlet mode of min(s, t)") {
    const auto mu = build_uniform_grid(0.0, 1.0, 128);
    const auto dec = decompose(Kernel<double>::brownian(), mu);
    const double continuum = 4.0 / (3.141592653589793 * 3.141592653589793);
    const double rel = std::abs(dec.top_eigenvalue() - continuum) / continuum;
    CHECK(rel > 5e-6);   // the discretization bias is real
    CHECK(rel < 2e-5);   // and second order in the grid spacing
}

TEST_CASE("numerical rank counts eigenvalues above the cutoff") {
    const auto mu = build_uniform_grid(0.0, 1.0, 64);
    const auto k = Kernel<double>::gaussian(1.0);
    // the eighth eigenvalue sits at about 1e-12 of the top: pin the rank with
    // the cutoff an order of magnitude away on each side
    CHECK(decompose(k, mu, 1e-11).rank() == 7);
    const int rank_default = decompose(k, mu, 1e-12).rank();
    CHECK(rank_default >= 7);
    CHECK(rank_default <= 9);
    CHECK(decompose(k, mu, 0.5).rank() == 1);
}

TEST_CASE("indefinite kernel tables are refused") {
    MatrixX<double> values(2, 2);
    values << 0.0, 1.0, 1.0, 0.0;  // eigenvalues +1 and -1
    const auto k = Kernel<double>::matrix({DomainPoint{0.0}, DomainPoint{1.0}},
                                          std::move(values));
    const auto mu = DiscreteMeasure({DomainPoint{0.0}, DomainPoint{1.0}}, {1.0, 1.0});
    CHECK(fails_with("not-positive-type", [&] { decompose(k, mu); }));
}

TEST_CASE("round-off negatives are clamped to zero") {
    const auto mu = build_uniform_grid(0.0, 1.0, 64);
    const auto dec = decompose(Kernel<double>::gaussian(1.0), mu);
    for (Eigen::Index m = 0; m < dec.eigenvalues().size(); ++m)
        CHECK(dec.eigenvalues()(m) >= 0.0);
}

TEST_CASE("decomposition inputs are validated") {
    const auto mu = build_uniform_grid(0.0, 1.0, 4);
    const auto k = Kernel<double>::gaussian(1.0);
    CHECK(fails_with("invalid-rank-tol", [&] { decompose(k, mu, 0.0); }));
    CHECK(fails_with("invalid-rank-tol", [&] { decompose(k, mu, 1.0); }));
    const auto dec = decompose(k, mu);
    CHECK(fails_with("rank-out-of-range",
                     [&] { reconstruct_kernel(dec, dec.rank() + 1); }));
    CHECK(fails_with("rank-out-of-range", [&] { reconstruct_kernel(dec, -1); }));

    Eigen::VectorXd unsorted(4);
    unsorted << 1.0, 2.0, 0.5, 0.1;
    CHECK(fails_with("invalid-parameter", [&] {
        MercerDecomposition<double>(mu, unsorted, MatrixX<double>::Identity(4, 4),
                                    1e-12);
    }));
    CHECK(fails_with("dimension-mismatch", [&] {
        MercerDecomposition<double>(mu, Eigen::VectorXd::Ones(3),
                                    MatrixX<double>::Identity(4, 4), 1e-12);
    }));
}

TEST_CASE("spectral norms of kernel sections equal the diagonal") {
    const auto mu = build_uniform_grid(0.0, 1.0, 32);
    const auto k = Kernel<double>::brownian();
    const auto dec = decompose(k, mu);
    const auto g = gram(k, std::span<const DomainPoint>(mu.nodes()));
    for (Eigen::Index i = 0; i < 32; i += 7) {
        const VectorX<double> v = g.entries.col(i);
        const SpectralNorm sn = rkhs_norm_spectral(dec, v);
        const double diag = g.entries(i, i);
        CHECK(sn.norm_sq == doctest::Approx(diag).epsilon(1e-8));
        CHECK(sn.residual <= 1e-10 * lp_norm(v, mu, 2.0));
    }
}

TEST_CASE("spectral norms of retained combinations are explicit") {
    const auto mu = build_uniform_grid(0.0, 1.0, 24);
    const auto dec = decompose(Kernel<double>::gaussian(1.0), mu);
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        VectorX<double> v = VectorX<double>::Zero(24);
        double expected = 0.0;
        for (int m = 0; m < dec.rank(); ++m) {
            const double a = u(rng);
            v += a * dec.eigenfunctions().col(m);
            expected += a * a / dec.eigenvalues()(m);
        }
        const SpectralNorm sn = rkhs_norm_spectral(dec, v);
        CHECK(sn.norm_sq == doctest::Approx(expected).epsilon(1e-10));
        CHECK(sn.residual <= 1e-10 * (1.0 + lp_norm(v, mu, 2.0)));
    }
}

TEST_CASE("membership separates the retained span from noise") {
    const auto mu = build_uniform_grid(0.0, 1.0, 64);
    const auto dec = decompose(Kernel<double>::gaussian(1.0), mu);

    const VectorX<double> top = dec.eigenfunctions().col(0);
    const auto in = membership_test(dec, top);
    CHECK(in.member);
    REQUIRE(in.norm_sq.has_value());
    CHECK(*in.norm_sq ==
          doctest::Approx(1.0 / dec.top_eigenvalue()).epsilon(1e-10));
    CHECK_FALSE(in.large_norm_warning);

    std::mt19937_64 rng(97);
    const VectorX<double> noise = testgen::random_values<double>(rng, 64);
    const auto out = membership_test(dec, noise);
    CHECK_FALSE(out.member);
    CHECK_FALSE(out.norm_sq.has_value());
    CHECK(out.residual > 1e-4 * lp_norm(noise, mu, 2.0));

    const VectorX<double> zeros = VectorX<double>::Zero(64);
    const auto zero = membership_test(dec, zeros);
    CHECK(zero.member);
    CHECK(zero.residual == 0.0);

    CHECK(fails_with("invalid-parameter", [&] { membership_test(dec, top, -1.0); }));
}

TEST_CASE("eigenvalue clusters group near-degenerate neighbors") {
    Eigen::VectorXd ev(6);
    ev << 5.0, 5.0 - 1e-12, 3.0, 1.0, 1.0, 1.0;
    const auto clusters = eigenvalue_clusters(ev, 1e-9);
    REQUIRE(clusters.size() == 3);
    CHECK(clusters[0] == std::pair<int, int>{0, 1});
    CHECK(clusters[1] == std::pair<int, int>{2, 2});
    CHECK(clusters[2] == std::pair<int, int>{3, 5});
}

TEST_CASE("spectral projectors are idempotent and select whole eigenspaces") {
    const auto mu = build_uniform_grid(0.0, 1.0, 24);
    const auto dec = decompose(Kernel<double>::gaussian(1.0), mu);
    const double top = dec.top_eigenvalue();

    const auto pr = spectral_projector(dec, 0.5 * top, 2.0 * top);
    CHECK(pr.basis_size == 1);
    const MatrixX<double>& p = pr.projector;
    CHECK((p * p - p).cwiseAbs().maxCoeff() <= 1e-10);

    const VectorX<double> phi0 = dec.eigenfunctions().col(0);
    CHECK((p * phi0 - phi0).cwiseAbs().maxCoeff() <= 1e-10);
    const VectorX<double> phi1 = dec.eigenfunctions().col(1);
    CHECK((p * phi1).cwiseAbs().maxCoeff() <= 1e-10);

    CHECK(fails_with("invalid-interval", [&] { spectral_projector(dec, 0.0, 1.0); }));
    CHECK(fails_with("invalid-interval", [&] { spectral_projector(dec, 2.0, 1.0); }));
    CHECK(fails_with("invalid-interval", [&] { spectral_projector(dec, 1.0, 1.0); }));
}

TEST_CASE("interval boundaries cannot split a degenerate eigenvalue") {
    // two blocks share the scale 2: eigenvalues {4, 4, 1} with a double leading
    // pair that any admissible interval must take or leave as a unit
    const auto mu = build_block_measure({1.0, 1.0, 1.0}, 2);
    const auto dec = decompose(Kernel<double>::block({2.0, 2.0, 1.0}), mu);
    CHECK(dec.rank() == 3);

    const auto both = spectral_projector(dec, 4.0 - 1e-9, 4.0 + 1e-9);
    CHECK(both.basis_size == 2);

    const auto low = spectral_projector(dec, 1e-9, 3.9);
    CHECK(low.basis_size == 1);

    const auto none = spectral_projector(dec, 10.0, 20.0);
    CHECK(none.basis_size == 0);
    CHECK(none.projector.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pointwise mass matches the inverse weights at full rank") {
    const auto mu = build_uniform_grid(0.0, 1.0, 16);
    const auto dec = decompose(Kernel<double>::brownian(), mu);
    REQUIRE(dec.rank() == 16);
    for (std::size_t i = 0; i < 16; i += 5) {
        const auto pm = pointwise_mass(dec, i);
        CHECK(pm.mass == doctest::Approx(16.0).epsilon(1e-8));
        CHECK(pm.in_range_of_l);
    }
    CHECK(fails_with("index-out-of-range", [&] { pointwise_mass(dec, 16); }));
}

TEST_CASE("sections at truncated nodes are flagged as out of range") {
    const auto mu = build_block_measure({1.0, 1.0, 1.0}, 1);
    const auto dec = decompose(Kernel<double>::block({3.0, 2.0, 1.0}), mu, 0.5);
    REQUIRE(dec.rank() == 1);  // only the scale-3 block survives the cutoff

    const auto kept = pointwise_mass(dec, 0);
    CHECK(kept.mass == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(kept.in_range_of_l);

    const auto cut = pointwise_mass(dec, 1);
    CHECK(cut.mass <= 1e-10);
    CHECK_FALSE(cut.in_range_of_l);
}

TEST_CASE("complex decompositions keep the closed-form spectrum") {
    const auto mu = DiscreteMeasure({DomainPoint{0.0}, DomainPoint{1.0}}, {0.5, 2.0});
    const auto k = hermitian_pair_kernel();
    const auto dec = decompose(k, mu);
    const double root = std::sqrt(29.0);
    CHECK(dec.eigenvalues()(0) == doctest::Approx((7.0 + root) / 2.0).epsilon(1e-14));
    CHECK(dec.eigenvalues()(1) == doctest::Approx((7.0 - root) / 2.0).epsilon(1e-14));
    CHECK(orthonormality_defect(dec) <= 1e-12);

    const auto g = gram(k, std::span<const DomainPoint>(mu.nodes()));
    const MatrixX<Complex> recon = reconstruct_kernel(dec, dec.rank());
    CHECK((recon - g.entries).cwiseAbs().maxCoeff() <= 1e-12);

    const VectorX<Complex> top = dec.eigenfunctions().col(0);
    const auto verdict = membership_test(dec, top);
    CHECK(verdict.member);
    CHECK(*verdict.norm_sq ==
          doctest::Approx(1.0 / dec.top_eigenvalue()).epsilon(1e-12));
}
