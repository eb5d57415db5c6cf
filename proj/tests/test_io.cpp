#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <functional>
#include <string>

#include "rkhs/io.hpp"
#include "test_support.hpp"

using namespace rkhs;
using rkhs::io::json;

namespace {
bool fails_with(const char* code, const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code() == code;
    }
    return false;
}

DiscreteMeasure sample_measure() {
    return DiscreteMeasure(
        {DomainPoint{0.1}, DomainPoint{0.4}, DomainPoint{0.75}, DomainPoint{1.0 / 3.0}},
        {0.25, 1.5, 0.1, 2.0});
}
}  // namespace

TEST_CASE("measures round trip through JSON byte for byte") {
    const auto mu = sample_measure();
    const json j = io::measure_to_json(mu);
    const auto back = io::measure_from_json(j);
    REQUIRE(back.size() == mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        CHECK(back.node(i) == mu.node(i));
        CHECK(back.weight(i) == mu.weight(i));
    }
    CHECK(io::measure_to_json(back).dump() == j.dump());
}

TEST_CASE("measure labels survive the JSON round trip") {
    const auto mu = build_block_measure({1.0, 2.0}, 2);
    REQUIRE(mu.has_labels());
    const auto back = io::measure_from_json(io::measure_to_json(mu));
    REQUIRE(back.has_labels());
    for (std::size_t i = 0; i < mu.size(); ++i)
        CHECK(back.labels()[i] == mu.labels()[i]);
}

TEST_CASE("measures round trip through CSV") {
    const auto mu = sample_measure();
    const std::string csv = io::measure_to_csv(mu);
    const auto back = io::measure_from_csv(csv);
    REQUIRE(back.size() == mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        CHECK(back.node(i) == mu.node(i));  // shortest round-trip formatting
        CHECK(back.weight(i) == mu.weight(i));
    }
    CHECK(io::measure_to_csv(back) == csv);
}

TEST_CASE("measure CSV accepts multivariate nodes and rejects ragged rows") {
    const auto good = io::measure_from_csv("x0,x1,weight\n0,1,0.5\n2,3,0.5\n");
    CHECK(good.dim() == 2);
    CHECK(good.node(1).coords()[1] == 3.0);
    CHECK(fails_with("parse-error",
                     [] { io::measure_from_csv("x0,weight\n0,0.5,9\n"); }));
    CHECK(fails_with("parse-error", [] { io::measure_from_csv("x0,weight\n"); }));
    CHECK(fails_with("parse-error",
                     [] { io::measure_from_csv("x0,weight\n0,oops\n"); }));
}

TEST_CASE("kernels of every family round trip through JSON") {
    MatrixX<double> table(2, 2);
    table << 1.0, 0.25, 0.25, 2.0;
    const Kernel<double> kernels[] = {
        Kernel<double>::gaussian(0.7),
        Kernel<double>::brownian(),
        Kernel<double>::laplace(1.2),
        Kernel<double>::constant(3.0),
        Kernel<double>::block({3.0, 2.0}, {1.0, 0.5}),
        Kernel<double>::block({1.0, 2.0}),  // masses defaulted
        Kernel<double>::matrix({DomainPoint{0.0}, DomainPoint{1.0}}, table),
    };
    for (const auto& k : kernels) {
        const json j = io::kernel_to_json(k);
        CHECK(io::field_of(j) == "real");
        const auto back = io::kernel_from_json<double>(j);
        CHECK(back == k);
        CHECK(io::kernel_to_json(back).dump() == j.dump());
    }
}

TEST_CASE("complex kernels carry their field and values") {
    MatrixX<Complex> table(2, 2);
    table << Complex(2.0, 0.0), Complex(0.5, -0.25), Complex(0.5, 0.25),
        Complex(1.0, 0.0);
    const auto k =
        Kernel<Complex>::matrix({DomainPoint{0.0}, DomainPoint{2.0}}, table);
    const json j = io::kernel_to_json(k);
    CHECK(io::field_of(j) == "complex");
    const auto back = io::kernel_from_json<Complex>(j);
    CHECK(back == k);
    CHECK(io::kernel_to_json(back).dump() == j.dump());
}

TEST_CASE("kernel loaders reject a field mismatch") {
    const json real_kernel = io::kernel_to_json(Kernel<double>::gaussian(1.0));
    CHECK(fails_with("parse-error",
                     [&] { io::kernel_from_json<Complex>(real_kernel); }));
    const json complex_kernel = io::kernel_to_json(Kernel<Complex>::gaussian(1.0));
    CHECK(fails_with("parse-error",
                     [&] { io::kernel_from_json<double>(complex_kernel); }));
}

TEST_CASE("a missing field key defaults to the real scalar type") {
    json j;
    j["family"] = "laplace";
    j["params"] = {{"sigma", 2.0}};
    const auto k = io::kernel_from_json<double>(j);
    CHECK(k == Kernel<double>::laplace(2.0));
}

TEST_CASE("malformed kernel files are rejected with a parse error") {
    CHECK(fails_with("parse-error",
                     [] { io::kernel_from_json<double>(json::array()); }));
    CHECK(fails_with("parse-error",
                     [] { io::kernel_from_json<double>(json::object()); }));
    json j;
    j["family"] = "warp";
    CHECK(fails_with("parse-error", [&] { io::kernel_from_json<double>(j); }));
    json g;
    g["family"] = "gaussian";
    g["params"] = json::object();
    CHECK(fails_with("parse-error", [&] { io::kernel_from_json<double>(g); }));
    json m;
    m["family"] = "matrix";
    m["nodes"] = json::array({json::array({0.0}), json::array({1.0})});
    m["values"] = json::array({json::array({1.0, 0.0})});
    CHECK(fails_with("parse-error", [&] { io::kernel_from_json<double>(m); }));
}

TEST_CASE("value sequences round trip in both shapes") {
    VectorX<double> v(3);
    v << 0.5, -1.25, 1.0 / 3.0;
    const json plain = io::values_to_json(v);
    const VectorX<double> back = io::values_from_json<double>(plain);
    CHECK((back - v).cwiseAbs().maxCoeff() == 0.0);

    json wrapped;
    wrapped["values"] = plain;
    const VectorX<double> back2 = io::values_from_json<double>(wrapped);
    CHECK((back2 - v).cwiseAbs().maxCoeff() == 0.0);

    VectorX<Complex> c(2);
    c << Complex(1.0, -2.0), Complex(0.0, 0.5);
    const VectorX<Complex> cback = io::values_from_json<Complex>(io::values_to_json(c));
    CHECK((cback - c).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("real loaders accept [re, 0] pairs and reject true complex values") {
    const json zero_im = json::array({json::array({2.5, 0.0})});
    CHECK(io::values_from_json<double>(zero_im)(0) == 2.5);
    const json nonzero_im = json::array({json::array({2.5, 1.0})});
    CHECK(fails_with("parse-error",
                     [&] { io::values_from_json<double>(nonzero_im); }));
    CHECK(fails_with("parse-error", [] {
        io::values_from_json<double>(json::array({json("three")}));
    }));
}

TEST_CASE("elements round trip with their kernel and anchors") {
    const auto k = Kernel<double>::laplace(0.8);
    VectorX<double> coeff(2);
    coeff << 1.5, -0.75;
    const RkhsElement<double> f(k, {DomainPoint{0.2}, DomainPoint{0.9}}, coeff);
    const json j = io::element_to_json(f);
    const auto back = io::element_from_json<double>(j);
    CHECK(back.kernel() == f.kernel());
    REQUIRE(back.anchors().size() == 2);
    CHECK(back.anchors()[0] == f.anchors()[0]);
    CHECK((back.coefficients() - f.coefficients()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(io::element_to_json(back).dump() == j.dump());

    json broken = j;
    broken.erase("coefficients");
    CHECK(fails_with("parse-error", [&] { io::element_from_json<double>(broken); }));
}

TEST_CASE("decompositions round trip exactly") {
    const auto mu = build_uniform_grid(0.0, 1.0, 8);
    const auto dec = decompose(Kernel<double>::gaussian(1.0), mu);
    const json j = io::decomposition_to_json(dec);
    const auto back = io::decomposition_from_json<double>(j);
    CHECK(back.rank() == dec.rank());
    CHECK(back.rank_tol() == dec.rank_tol());
    CHECK((back.eigenvalues() - dec.eigenvalues()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.eigenfunctions() - dec.eigenfunctions()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(io::decomposition_to_json(back).dump() == j.dump());
}

TEST_CASE("a stored rank inconsistent with the eigenvalues is rejected") {
    const auto mu = build_uniform_grid(0.0, 1.0, 6);
    const auto dec = decompose(Kernel<double>::brownian(), mu);
    json j = io::decomposition_to_json(dec);
    j["rank"] = dec.rank() + 1;
    CHECK(fails_with("parse-error", [&] { io::decomposition_from_json<double>(j); }));

    json no_rank = io::decomposition_to_json(dec);
    no_rank.erase("rank");  // optional: recomputed from the eigenvalues
    CHECK(io::decomposition_from_json<double>(no_rank).rank() == dec.rank());

    json bad_field = io::decomposition_to_json(dec);
    bad_field["field"] = "complex";
    CHECK(fails_with("parse-error",
                     [&] { io::decomposition_from_json<double>(bad_field); }));
}

TEST_CASE("decomposition CSV lists coordinates and retained eigenfunctions") {
    const auto mu = build_uniform_grid(0.0, 1.0, 4);
    const auto dec = decompose(Kernel<double>::brownian(), mu);
    REQUIRE(dec.rank() == 4);
    const std::string csv = io::decomposition_to_csv(dec);
    CHECK(csv.substr(0, csv.find('\n')) == "node_index,x0,phi_1,phi_2,phi_3,phi_4");
    std::size_t lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == 5);  // header plus one row per node
    CHECK(csv.find("\n0,0.125,") != std::string::npos);
}

TEST_CASE("gram matrices serialize with their points") {
    std::vector<DomainPoint> pts{DomainPoint{0.0}, DomainPoint{0.5}};
    const auto g = gram(Kernel<double>::constant(1.0),
                        std::span<const DomainPoint>(pts));
    const json j = io::gram_to_json(g);
    CHECK(j["points"].size() == 2);
    CHECK(j["entries"][0][1] == json(1.0));
    CHECK(io::gram_to_csv(g) == "1.0,1.0\n1.0,1.0\n");

    MatrixX<double> m(2, 2);
    m << 1.0, 0.0, 0.25, -2.0;
    CHECK(io::matrix_to_csv(m) == "1.0,0.0\n0.25,-2.0\n");
}

TEST_CASE("files are written atomically and read back verbatim") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "rkhs_io_test";
    fs::create_directories(dir);
    const std::string path = (dir / "artifact.json").string();

    const std::string payload = "{\"answer\": 42}\n";
    io::write_text_file(path, payload);
    CHECK(io::read_text_file(path) == payload);
    CHECK_FALSE(fs::exists(path + ".tmp"));
    CHECK(io::read_json_file(path)["answer"] == json(42));

    io::write_text_file(path, "{}\n");  // overwrite through the same temp path
    CHECK(io::read_text_file(path) == "{}\n");

    CHECK(fails_with("io-error",
                     [&] { io::read_text_file((dir / "absent.json").string()); }));
    io::write_text_file(path, "not json");
    CHECK(fails_with("parse-error", [&] { io::read_json_file(path); }));
    fs::remove_all(dir);
}
