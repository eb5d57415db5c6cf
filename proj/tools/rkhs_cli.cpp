// Command line front end: assembles Gram matrices, runs the positivity
// checker, computes spectral decompositions and their derived quantities, and
// writes machine-readable artifacts. All randomness is seeded (default 0) and
// artifacts are written atomically, so identical invocations produce byte
// identical files.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rkhs/element.hpp"
#include "rkhs/errors.hpp"
#include "rkhs/io.hpp"
#include "rkhs/kernel.hpp"
#include "rkhs/measure.hpp"
#include "rkhs/mercer.hpp"
#include "rkhs/operator.hpp"

namespace {

using rkhs::Complex;
using rkhs::DiscreteMeasure;
using rkhs::DomainPoint;
using rkhs::Kernel;
using rkhs::MercerDecomposition;
using rkhs::VectorX;
using json = rkhs::io::json;

struct CommonOpts {
    std::string kernel_path;
    std::string measure_path;
    std::string dec_path;
    std::string values_path;
    std::string output_path;
    std::string format = "json";
    double rank_tol = 1e-12;
    std::uint64_t seed = 0;
};

struct PsdOpts {
    int subset_size = 8;
    int trials = 50;
    double tol = 1e-10;
    std::vector<double> range;  // lo hi for the box sampler
    std::size_t dim = 1;
};

struct DiagnoseOpts {
    double p = 2.0;
    double q = 2.0;
    int trials = 1000;
};

struct NormOpts {
    double tol = 1e-8;
};

struct SpectralOpts {
    int r = -1;  // -1 means full retained rank
    std::vector<double> interval;
};

void write_artifact(const CommonOpts& opts, const std::string& content) {
    if (opts.output_path.empty()) return;
    rkhs::io::write_text_file(opts.output_path, content);
}

void write_json_artifact(const CommonOpts& opts, const json& j) {
    write_artifact(opts, j.dump(2) + "\n");
}

void require_json_format(const CommonOpts& opts, const std::string& command) {
    if (opts.format != "json")
        rkhs::fail("format-unsupported", command + " artifacts are JSON only");
}

DiscreteMeasure load_measure(const std::string& path) {
    if (path.empty()) rkhs::fail("usage", "this command needs --measure");
    if (std::filesystem::path(path).extension() == ".csv")
        return rkhs::io::measure_from_csv(rkhs::io::read_text_file(path));
    return rkhs::io::measure_from_json(rkhs::io::read_json_file(path));
}

template <typename Scalar>
Kernel<Scalar> load_kernel(const json& j) {
    Kernel<Scalar> k = rkhs::io::kernel_from_json<Scalar>(j);
    if (k.symmetrization_defect() > 1e-8)
        std::cerr << "warning: kernel table asymmetry " << k.symmetrization_defect()
                  << " exceeds 1e-8; symmetrized copy in use\n";
    return k;
}

template <typename Scalar>
VectorX<Scalar> load_values(const std::string& path) {
    if (path.empty()) rkhs::fail("usage", "this command needs --values");
    return rkhs::io::values_from_json<Scalar>(rkhs::io::read_json_file(path));
}

// gram: Gram matrix of the kernel on the measure's nodes.
template <typename Scalar>
int run_gram(const json& kernel_json, const CommonOpts& opts) {
    const Kernel<Scalar> k = load_kernel<Scalar>(kernel_json);
    const DiscreteMeasure mu = load_measure(opts.measure_path);
    const auto g = rkhs::gram(k, std::span<const DomainPoint>(mu.nodes()));

    double herm_defect = 0.0;
    for (Eigen::Index i = 0; i < g.entries.rows(); ++i)
        for (Eigen::Index j = i; j < g.entries.cols(); ++j)
            herm_defect = std::max(herm_defect,
                                   rkhs::detail::abs_of(g.entries(i, j) -
                                                        rkhs::detail::conj_of(
                                                            g.entries(j, i))));
    std::cout << "gram: " << mu.size() << " nodes, " << k.family_name()
              << " kernel, hermitian defect " << herm_defect << "\n";

    if (opts.format == "csv") {
        if constexpr (Kernel<Scalar>::is_complex_field)
            rkhs::fail("format-unsupported", "complex Gram matrices are JSON only");
        else
            write_artifact(opts, rkhs::io::gram_to_csv(g));
    } else {
        write_json_artifact(opts, rkhs::io::gram_to_json(g));
    }
    return 0;
}

// check-psd: randomized finite-section positivity test.
template <typename Scalar>
int run_check_psd(const json& kernel_json, const CommonOpts& opts, const PsdOpts& psd) {
    require_json_format(opts, "check-psd");
    const Kernel<Scalar> k = load_kernel<Scalar>(kernel_json);

    rkhs::PointSampler sampler;
    if (!opts.measure_path.empty())
        sampler = rkhs::node_sampler(load_measure(opts.measure_path).nodes());
    else if (!psd.range.empty())
        sampler = rkhs::uniform_box_sampler(psd.range[0], psd.range[1], psd.dim);
    else
        sampler = rkhs::default_sampler(k);

    const auto report = rkhs::check_positive_type(k, sampler, psd.subset_size,
                                                  psd.trials, psd.tol, opts.seed);

    json j;
    j["passed"] = report.passed;
    j["trials"] = report.trials;
    j["subset_size"] = report.subset_size;
    j["tol"] = report.tol;
    j["worst_relative_negative"] = report.worst_relative_negative;
    j["worst_asymmetry"] = report.worst_asymmetry;
    j["symmetry_ok"] = report.symmetry_ok;
    if (report.passed) {
        j["witness"] = nullptr;
        std::cout << "check-psd: pass (" << report.trials << " trials of size "
                  << report.subset_size << ", worst relative negative "
                  << report.worst_relative_negative << ")\n";
    } else {
        json w;
        json pts = json::array();
        for (const auto& p : report.witness_points) {
            json c = json::array();
            for (double x : p.coords()) c.push_back(x);
            pts.push_back(std::move(c));
        }
        w["points"] = std::move(pts);
        w["coefficients"] = rkhs::io::values_to_json(report.witness_coefficients);
        w["quadratic_form"] = report.witness_quadratic_form;
        j["witness"] = std::move(w);
        std::cout << "check-psd: FAIL (worst relative negative "
                  << report.worst_relative_negative << ", witness quadratic form "
                  << report.witness_quadratic_form << ")\n";
    }
    write_json_artifact(opts, j);
    return report.passed ? 0 : 1;
}

// mercer: spectral decomposition artifact.
template <typename Scalar>
int run_mercer(const json& kernel_json, const CommonOpts& opts) {
    const Kernel<Scalar> k = load_kernel<Scalar>(kernel_json);
    const DiscreteMeasure mu = load_measure(opts.measure_path);
    const auto dec = rkhs::decompose(k, mu, opts.rank_tol);

    double trace = 0.0;
    for (Eigen::Index m = 0; m < dec.eigenvalues().size(); ++m)
        trace += dec.eigenvalues()(m);
    std::cout << "mercer: rank " << dec.rank() << " of " << mu.size()
              << ", top eigenvalue " << dec.top_eigenvalue() << ", eigenvalue sum "
              << trace << "\n";

    if (opts.format == "csv") {
        if constexpr (Kernel<Scalar>::is_complex_field)
            rkhs::fail("format-unsupported", "complex decompositions are JSON only");
        else
            write_artifact(opts, rkhs::io::decomposition_to_csv(dec));
    } else {
        write_json_artifact(opts, rkhs::io::decomposition_to_json(dec));
    }
    return 0;
}

// diagnose: trace identity, factorization defect, operator norms, row norms.
template <typename Scalar>
int run_diagnose(const json& kernel_json, const CommonOpts& opts,
                 const DiagnoseOpts& diag) {
    require_json_format(opts, "diagnose");
    const Kernel<Scalar> k = load_kernel<Scalar>(kernel_json);
    const DiscreteMeasure mu = load_measure(opts.measure_path);
    const auto cm = rkhs::make_carrier_map(k, mu);
    const auto op = rkhs::make_operator(cm.gram_on_nodes, mu);

    const auto hs = rkhs::hs_diagnostic(cm);
    const double fact = rkhs::verify_factorization(cm);
    const auto on = rkhs::opnorm_estimate(op, diag.p, diag.trials, opts.seed);
    const auto carleman = rkhs::carleman_report(cm, diag.q);

    json j;
    j["trace_diag"] = hs.trace_diag;
    j["eigen_sum"] = hs.eigen_sum;
    j["rel_defect"] = hs.rel_defect;
    j["summable"] = hs.summable;
    j["factorization_defect"] = fact;
    json jn;
    jn["p"] = std::isinf(diag.p) ? json("inf") : json(diag.p);
    jn["lower"] = on.lower;
    jn["upper"] = on.upper;
    jn["exact"] = on.exact ? json(*on.exact) : json(nullptr);
    j["opnorm"] = std::move(jn);
    json jc;
    jc["q"] = std::isinf(diag.q) ? json("inf") : json(diag.q);
    jc["max_row_norm"] = carleman.max_row_norm;
    jc["row_norms"] = carleman.row_norms;
    j["carleman"] = std::move(jc);

    std::cout << "diagnose: trace " << hs.trace_diag << ", eigenvalue sum "
              << hs.eigen_sum << ", relative defect " << hs.rel_defect
              << ", factorization defect " << fact << "\n";
    write_json_artifact(opts, j);
    return 0;
}

// norm: spectral norm and residual of node values.
template <typename Scalar>
int run_norm(const json& dec_json, const CommonOpts& opts) {
    require_json_format(opts, "norm");
    const auto dec = rkhs::io::decomposition_from_json<Scalar>(dec_json);
    const auto v = load_values<Scalar>(opts.values_path);
    const auto sn = rkhs::rkhs_norm_spectral(dec, v);

    json j;
    j["norm_sq"] = sn.norm_sq;
    j["residual"] = sn.residual;
    std::cout << "norm: norm_sq " << sn.norm_sq << ", residual " << sn.residual
              << "\n";
    write_json_artifact(opts, j);
    return 0;
}

// member: membership verdict for node values; exit 1 when not a member.
template <typename Scalar>
int run_member(const json& dec_json, const CommonOpts& opts, const NormOpts& normo) {
    require_json_format(opts, "member");
    const auto dec = rkhs::io::decomposition_from_json<Scalar>(dec_json);
    const auto v = load_values<Scalar>(opts.values_path);
    const auto verdict = rkhs::membership_test(dec, v, normo.tol);

    json j;
    j["member"] = verdict.member;
    j["residual"] = verdict.residual;
    j["norm_sq"] = verdict.norm_sq ? json(*verdict.norm_sq) : json(nullptr);
    j["large_norm_warning"] = verdict.large_norm_warning;
    if (verdict.member) {
        std::cout << "member: yes, residual " << verdict.residual << ", norm_sq "
                  << *verdict.norm_sq << "\n";
        if (verdict.large_norm_warning)
            std::cerr << "warning: norm_sq is at the resolution limit of the "
                         "retained spectrum\n";
    } else {
        std::cout << "member: no, residual " << verdict.residual << "\n";
    }
    write_json_artifact(opts, j);
    return verdict.member ? 0 : 1;
}

// reconstruct: rank-r kernel reconstruction on the decomposition's nodes.
template <typename Scalar>
int run_reconstruct(const json& dec_json, const CommonOpts& opts,
                    const SpectralOpts& sp) {
    const auto dec = rkhs::io::decomposition_from_json<Scalar>(dec_json);
    const int r = sp.r < 0 ? dec.rank() : sp.r;
    const auto m = rkhs::reconstruct_kernel(dec, r);
    std::cout << "reconstruct: rank " << r << " of " << dec.rank() << " on "
              << dec.measure().size() << " nodes\n";

    if (opts.format == "csv") {
        if constexpr (Kernel<Scalar>::is_complex_field)
            rkhs::fail("format-unsupported", "complex reconstructions are JSON only");
        else
            write_artifact(opts, rkhs::io::matrix_to_csv(m));
    } else {
        json j;
        j["r"] = r;
        j["entries"] = rkhs::io::matrix_to_json(m);
        write_json_artifact(opts, j);
    }
    return 0;
}

// projector: spectral projector for eigenvalues in (a, b].
template <typename Scalar>
int run_projector(const json& dec_json, const CommonOpts& opts,
                  const SpectralOpts& sp) {
    if (sp.interval.size() != 2)
        rkhs::fail("invalid-interval", "projector needs --interval A B");
    const auto dec = rkhs::io::decomposition_from_json<Scalar>(dec_json);
    const auto res = rkhs::spectral_projector(dec, sp.interval[0], sp.interval[1]);
    std::cout << "projector: " << res.basis_size << " modes in ("
              << sp.interval[0] << ", " << sp.interval[1] << "]\n";

    if (opts.format == "csv") {
        if constexpr (Kernel<Scalar>::is_complex_field)
            rkhs::fail("format-unsupported", "complex projectors are JSON only");
        else
            write_artifact(opts, rkhs::io::matrix_to_csv(res.projector));
    } else {
        json j;
        j["interval"] = json::array({sp.interval[0], sp.interval[1]});
        j["basis_size"] = res.basis_size;
        j["entries"] = rkhs::io::matrix_to_json(res.projector);
        write_json_artifact(opts, j);
    }
    return 0;
}

template <typename Handler>
int dispatch_field(const json& j, Handler&& handler) {
    if (rkhs::io::field_of(j) == "complex")
        return handler.template operator()<Complex>(j);
    return handler.template operator()<double>(j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical toolkit for reproducing-kernel computations on "
                 "discretized measures"};
    app.require_subcommand(1);

    CommonOpts opts;
    PsdOpts psd;
    DiagnoseOpts diag;
    NormOpts normo;
    SpectralOpts sp;

    const auto add_common = [&](CLI::App* cmd, bool kernel, bool measure, bool dec,
                                bool values) {
        if (kernel)
            cmd->add_option("--kernel", opts.kernel_path, "kernel JSON file")
                ->required();
        if (measure)
            cmd->add_option("--measure", opts.measure_path,
                            "measure file (.json or .csv)");
        if (dec)
            cmd->add_option("--dec", opts.dec_path, "decomposition JSON file")
                ->required();
        if (values)
            cmd->add_option("--values", opts.values_path, "node values JSON file")
                ->required();
        cmd->add_option("-o,--output", opts.output_path, "artifact output path");
        cmd->add_option("--format", opts.format, "artifact format")
            ->check(CLI::IsMember({"json", "csv"}));
        cmd->add_option("--seed", opts.seed, "seed for all randomized steps");
    };

    auto* cmd_gram = app.add_subcommand("gram", "Gram matrix on the measure nodes");
    add_common(cmd_gram, true, true, false, false);

    auto* cmd_psd = app.add_subcommand("check-psd",
                                       "randomized positivity check of a kernel");
    add_common(cmd_psd, true, true, false, false);
    cmd_psd->add_option("--size", psd.subset_size, "points per finite section");
    cmd_psd->add_option("--trials", psd.trials, "number of random sections");
    cmd_psd->add_option("--tol", psd.tol, "relative eigenvalue tolerance");
    cmd_psd->add_option("--range", psd.range, "lo hi box for random points")
        ->expected(2);
    cmd_psd->add_option("--dim", psd.dim, "dimension of random points");

    auto* cmd_mercer = app.add_subcommand("mercer", "spectral decomposition");
    add_common(cmd_mercer, true, true, false, false);
    cmd_mercer->add_option("--rank-tol", opts.rank_tol,
                           "relative eigenvalue cutoff in (0, 1)");

    auto* cmd_diag = app.add_subcommand("diagnose",
                                        "trace, factorization, and norm diagnostics");
    add_common(cmd_diag, true, true, false, false);
    cmd_diag->add_option("--p", diag.p, "operator norm exponent (1, 2, or inf)");
    cmd_diag->add_option("--q", diag.q, "row norm exponent in [1, inf]");
    cmd_diag->add_option("--trials", diag.trials, "probes for the p = 1 lower bound");

    auto* cmd_norm = app.add_subcommand("norm", "spectral norm of node values");
    add_common(cmd_norm, false, false, true, true);

    auto* cmd_member = app.add_subcommand("member", "membership test of node values");
    add_common(cmd_member, false, false, true, true);
    cmd_member->add_option("--tol", normo.tol, "relative residual tolerance");

    auto* cmd_recon = app.add_subcommand("reconstruct", "rank-r kernel reconstruction");
    add_common(cmd_recon, false, false, true, false);
    cmd_recon->add_option("--r", sp.r, "number of modes (default: retained rank)");

    auto* cmd_proj = app.add_subcommand("projector", "spectral projector for (a, b]");
    add_common(cmd_proj, false, false, true, false);
    cmd_proj->add_option("--interval", sp.interval, "eigenvalue interval a b")
        ->expected(2)
        ->required();

    // "--p inf" and "--q inf" must parse; CLI11 handles "inf" for doubles.
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    }

    try {
        const auto kernel_cmd = [&](auto run) {
            if (opts.kernel_path.empty())
                rkhs::fail("usage", "this command needs --kernel");
            const json j = rkhs::io::read_json_file(opts.kernel_path);
            return dispatch_field(j, run);
        };
        const auto dec_cmd = [&](auto run) {
            const json j = rkhs::io::read_json_file(opts.dec_path);
            return dispatch_field(j, run);
        };

        if (cmd_gram->parsed())
            return kernel_cmd([&]<typename S>(const json& j) {
                return run_gram<S>(j, opts);
            });
        if (cmd_psd->parsed())
            return kernel_cmd([&]<typename S>(const json& j) {
                return run_check_psd<S>(j, opts, psd);
            });
        if (cmd_mercer->parsed())
            return kernel_cmd([&]<typename S>(const json& j) {
                return run_mercer<S>(j, opts);
            });
        if (cmd_diag->parsed())
            return kernel_cmd([&]<typename S>(const json& j) {
                return run_diagnose<S>(j, opts, diag);
            });
        if (cmd_norm->parsed())
            return dec_cmd([&]<typename S>(const json& j) {
                return run_norm<S>(j, opts);
            });
        if (cmd_member->parsed())
            return dec_cmd([&]<typename S>(const json& j) {
                return run_member<S>(j, opts, normo);
            });
        if (cmd_recon->parsed())
            return dec_cmd([&]<typename S>(const json& j) {
                return run_reconstruct<S>(j, opts, sp);
            });
        if (cmd_proj->parsed())
            return dec_cmd([&]<typename S>(const json& j) {
                return run_projector<S>(j, opts, sp);
            });
        rkhs::fail("usage", "no command selected");
    } catch (const rkhs::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 2;
    }
}
