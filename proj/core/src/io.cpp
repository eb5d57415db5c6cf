#include "rkhs/io.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <type_traits>
#include <variant>

namespace rkhs::io {

namespace {

json number(double x) { return json(x); }

// Shortest round-trip decimal form, shared by every CSV writer so text
// artifacts are byte-stable and reload to the same doubles.
std::string num_str(double x) { return json(x).dump(); }

template <typename Scalar>
json scalar_to_json(const Scalar& v) {
    if constexpr (std::is_same_v<Scalar, Complex>)
        return json::array({v.real(), v.imag()});
    else
        return number(v);
}

template <typename Scalar>
Scalar scalar_from_json(const json& j) {
    if (j.is_number()) {
        return Scalar(j.get<double>());
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        const double re = j[0].get<double>();
        const double im = j[1].get<double>();
        if constexpr (std::is_same_v<Scalar, Complex>) {
            return Complex(re, im);
        } else {
            if (im != 0.0)
                fail("parse-error", "complex value in a real-field file");
            return re;
        }
    }
    fail("parse-error", "expected a number or an [re, im] pair");
}

const json& require_key(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end())
        fail("parse-error", std::string("missing key \"") + key + "\"");
    return *it;
}

DomainPoint point_from_json(const json& j) {
    if (j.is_number()) return DomainPoint{j.get<double>()};
    if (!j.is_array() || j.empty())
        fail("parse-error", "a node must be a coordinate array");
    std::vector<double> coords;
    coords.reserve(j.size());
    for (const auto& c : j) {
        if (!c.is_number()) fail("parse-error", "node coordinates must be numbers");
        coords.push_back(c.get<double>());
    }
    return DomainPoint(std::move(coords));
}

json point_to_json(const DomainPoint& p) {
    json a = json::array();
    for (double c : p.coords()) a.push_back(c);
    return a;
}

std::vector<DomainPoint> points_from_json(const json& j) {
    if (!j.is_array()) fail("parse-error", "expected an array of nodes");
    std::vector<DomainPoint> pts;
    pts.reserve(j.size());
    for (const auto& p : j) pts.push_back(point_from_json(p));
    return pts;
}

json points_to_json(const std::vector<DomainPoint>& pts) {
    json a = json::array();
    for (const auto& p : pts) a.push_back(point_to_json(p));
    return a;
}

template <typename Scalar>
MatrixX<Scalar> square_matrix_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.empty())
        fail("parse-error", std::string(what) + " must be a nonempty array of rows");
    const auto n = static_cast<Eigen::Index>(j.size());
    MatrixX<Scalar> m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
            fail("parse-error", std::string(what) + " rows must all have length " +
                                    std::to_string(n));
        for (Eigen::Index k = 0; k < n; ++k)
            m(i, k) = scalar_from_json<Scalar>(row[static_cast<std::size_t>(k)]);
    }
    return m;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        return pos == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

json measure_to_json(const DiscreteMeasure& mu) {
    json j;
    j["nodes"] = points_to_json(mu.nodes());
    json w = json::array();
    for (double x : mu.weights()) w.push_back(x);
    j["weights"] = std::move(w);
    if (mu.has_labels()) {
        json l = json::array();
        for (int x : mu.labels()) l.push_back(x);
        j["labels"] = std::move(l);
    }
    return j;
}

DiscreteMeasure measure_from_json(const json& j) {
    if (!j.is_object()) fail("parse-error", "a measure file must hold a JSON object");
    std::vector<DomainPoint> nodes = points_from_json(require_key(j, "nodes"));
    const json& jw = require_key(j, "weights");
    if (!jw.is_array()) fail("parse-error", "\"weights\" must be an array");
    std::vector<double> weights;
    weights.reserve(jw.size());
    for (const auto& w : jw) {
        if (!w.is_number()) fail("parse-error", "weights must be numbers");
        weights.push_back(w.get<double>());
    }
    std::vector<int> labels;
    if (const auto it = j.find("labels"); it != j.end()) {
        if (!it->is_array()) fail("parse-error", "\"labels\" must be an array");
        labels.reserve(it->size());
        for (const auto& l : *it) {
            if (!l.is_number_integer()) fail("parse-error", "labels must be integers");
            labels.push_back(l.get<int>());
        }
    }
    return DiscreteMeasure(std::move(nodes), std::move(weights), std::move(labels));
}

std::string measure_to_csv(const DiscreteMeasure& mu) {
    std::string out;
    const std::size_t d = mu.dim();
    for (std::size_t c = 0; c < d; ++c) out += "x" + std::to_string(c) + ",";
    out += "weight\n";
    for (std::size_t i = 0; i < mu.size(); ++i) {
        for (std::size_t c = 0; c < d; ++c) out += num_str(mu.node(i)[c]) + ",";
        out += num_str(mu.weight(i)) + "\n";
    }
    return out;
}

DiscreteMeasure measure_from_csv(const std::string& text) {
    std::vector<DomainPoint> nodes;
    std::vector<double> weights;
    std::stringstream ss(text);
    std::string line;
    std::size_t cols = 0;
    bool first = true;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        double probe = 0.0;
        if (first) {
            first = false;
            cols = fields.size();
            if (cols < 2)
                fail("parse-error", "measure CSV needs coordinate and weight columns");
            if (!parse_double(fields[0], probe)) continue;  // header row
        }
        if (fields.size() != cols)
            fail("parse-error", "measure CSV rows must all have " +
                                    std::to_string(cols) + " fields");
        std::vector<double> coords(cols - 1);
        for (std::size_t c = 0; c + 1 < cols; ++c)
            if (!parse_double(fields[c], coords[c]))
                fail("parse-error", "bad number in measure CSV: " + fields[c]);
        double w = 0.0;
        if (!parse_double(fields[cols - 1], w))
            fail("parse-error", "bad weight in measure CSV: " + fields[cols - 1]);
        nodes.push_back(DomainPoint(std::move(coords)));
        weights.push_back(w);
    }
    if (nodes.empty()) fail("parse-error", "measure CSV holds no data rows");
    return DiscreteMeasure(std::move(nodes), std::move(weights));
}

std::string field_of(const json& j) {
    const auto it = j.find("field");
    if (it == j.end()) return "real";
    if (!it->is_string() || (*it != "real" && *it != "complex"))
        fail("parse-error", "\"field\" must be \"real\" or \"complex\"");
    return it->get<std::string>();
}

template <typename Scalar>
json kernel_to_json(const Kernel<Scalar>& k) {
    json j;
    j["family"] = k.family_name();
    std::visit(
        [&](const auto& fam) {
            using F = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<F, GaussianKernel>) {
                j["params"] = {{"sigma", fam.sigma}};
            } else if constexpr (std::is_same_v<F, LaplaceKernel>) {
                j["params"] = {{"sigma", fam.sigma}};
            } else if constexpr (std::is_same_v<F, ConstantKernel>) {
                j["params"] = {{"value", fam.value}};
            } else if constexpr (std::is_same_v<F, BlockKernel>) {
                j["params"] = {{"sigmas", fam.sigmas}, {"masses", fam.masses}};
            } else if constexpr (std::is_same_v<F, BrownianKernel>) {
                j["params"] = json::object();
            } else {
                j["nodes"] = points_to_json(fam.nodes);
                json rows = json::array();
                for (Eigen::Index r = 0; r < fam.values.rows(); ++r) {
                    json row = json::array();
                    for (Eigen::Index c = 0; c < fam.values.cols(); ++c)
                        row.push_back(scalar_to_json(fam.values(r, c)));
                    rows.push_back(std::move(row));
                }
                j["values"] = std::move(rows);
            }
        },
        k.family());
    j["field"] = Kernel<Scalar>::is_complex_field ? "complex" : "real";
    return j;
}

template <typename Scalar>
Kernel<Scalar> kernel_from_json(const json& j) {
    if (!j.is_object()) fail("parse-error", "a kernel file must hold a JSON object");
    const std::string declared = field_of(j);
    const std::string expected = Kernel<Scalar>::is_complex_field ? "complex" : "real";
    if (declared != expected)
        fail("parse-error", "kernel file declares field \"" + declared +
                                "\" but was loaded as " + expected);

    const json& jf = require_key(j, "family");
    if (!jf.is_string()) fail("parse-error", "\"family\" must be a string");
    const std::string family = jf.get<std::string>();
    const json params = j.contains("params") ? j["params"] : json::object();

    const auto param_number = [&](const char* key) {
        const json& v = require_key(params, key);
        if (!v.is_number()) fail("parse-error", std::string(key) + " must be a number");
        return v.get<double>();
    };

    if (family == "gaussian") return Kernel<Scalar>::gaussian(param_number("sigma"));
    if (family == "brownian") return Kernel<Scalar>::brownian();
    if (family == "laplace") return Kernel<Scalar>::laplace(param_number("sigma"));
    if (family == "constant") return Kernel<Scalar>::constant(param_number("value"));
    if (family == "block") {
        const json& js = require_key(params, "sigmas");
        if (!js.is_array() || js.empty())
            fail("parse-error", "block kernel needs a nonempty \"sigmas\" array");
        std::vector<double> sigmas;
        for (const auto& s : js) {
            if (!s.is_number()) fail("parse-error", "sigmas must be numbers");
            sigmas.push_back(s.get<double>());
        }
        std::vector<double> masses;
        if (const auto it = params.find("masses"); it != params.end()) {
            if (!it->is_array()) fail("parse-error", "\"masses\" must be an array");
            for (const auto& m : *it) {
                if (!m.is_number()) fail("parse-error", "masses must be numbers");
                masses.push_back(m.get<double>());
            }
        }
        return Kernel<Scalar>::block(std::move(sigmas), std::move(masses));
    }
    if (family == "matrix") {
        std::vector<DomainPoint> nodes = points_from_json(require_key(j, "nodes"));
        MatrixX<Scalar> values =
            square_matrix_from_json<Scalar>(require_key(j, "values"), "\"values\"");
        if (values.rows() != static_cast<Eigen::Index>(nodes.size()))
            fail("parse-error", "matrix kernel node count and value table disagree");
        return Kernel<Scalar>::matrix(std::move(nodes), std::move(values));
    }
    fail("parse-error", "unknown kernel family \"" + family + "\"");
}

template <typename Scalar>
json element_to_json(const RkhsElement<Scalar>& f) {
    json j;
    j["kernel"] = kernel_to_json(f.kernel());
    j["anchors"] = points_to_json(f.anchors());
    json c = json::array();
    for (Eigen::Index i = 0; i < f.coefficients().size(); ++i)
        c.push_back(scalar_to_json(f.coefficients()(i)));
    j["coefficients"] = std::move(c);
    return j;
}

template <typename Scalar>
RkhsElement<Scalar> element_from_json(const json& j) {
    if (!j.is_object()) fail("parse-error", "an element file must hold a JSON object");
    Kernel<Scalar> kernel = kernel_from_json<Scalar>(require_key(j, "kernel"));
    std::vector<DomainPoint> anchors = points_from_json(require_key(j, "anchors"));
    const json& jc = require_key(j, "coefficients");
    if (!jc.is_array() || jc.size() != anchors.size())
        fail("parse-error", "\"coefficients\" must match the anchor count");
    VectorX<Scalar> c(static_cast<Eigen::Index>(jc.size()));
    for (Eigen::Index i = 0; i < c.size(); ++i)
        c(i) = scalar_from_json<Scalar>(jc[static_cast<std::size_t>(i)]);
    return RkhsElement<Scalar>(std::move(kernel), std::move(anchors), std::move(c));
}

template <typename Scalar>
json decomposition_to_json(const MercerDecomposition<Scalar>& dec) {
    json j;
    j["field"] = Kernel<Scalar>::is_complex_field ? "complex" : "real";
    j["measure"] = measure_to_json(dec.measure());
    json ev = json::array();
    for (Eigen::Index m = 0; m < dec.eigenvalues().size(); ++m)
        ev.push_back(dec.eigenvalues()(m));
    j["eigenvalues"] = std::move(ev);
    json rows = json::array();  // row m lists phi_m over the nodes
    for (Eigen::Index m = 0; m < dec.eigenfunctions().cols(); ++m) {
        json row = json::array();
        for (Eigen::Index i = 0; i < dec.eigenfunctions().rows(); ++i)
            row.push_back(scalar_to_json(dec.eigenfunctions()(i, m)));
        rows.push_back(std::move(row));
    }
    j["eigenfunctions"] = std::move(rows);
    j["rank_tol"] = dec.rank_tol();
    j["rank"] = dec.rank();
    return j;
}

template <typename Scalar>
MercerDecomposition<Scalar> decomposition_from_json(const json& j) {
    if (!j.is_object())
        fail("parse-error", "a decomposition file must hold a JSON object");
    const std::string declared = field_of(j);
    const std::string expected = Kernel<Scalar>::is_complex_field ? "complex" : "real";
    if (declared != expected)
        fail("parse-error", "decomposition file declares field \"" + declared +
                                "\" but was loaded as " + expected);

    DiscreteMeasure mu = measure_from_json(require_key(j, "measure"));
    const auto n = static_cast<Eigen::Index>(mu.size());

    const json& jev = require_key(j, "eigenvalues");
    if (!jev.is_array() || static_cast<Eigen::Index>(jev.size()) != n)
        fail("parse-error", "\"eigenvalues\" must list one value per node");
    Eigen::VectorXd ev(n);
    for (Eigen::Index m = 0; m < n; ++m) {
        const auto& v = jev[static_cast<std::size_t>(m)];
        if (!v.is_number()) fail("parse-error", "eigenvalues must be numbers");
        ev(m) = v.get<double>();
    }

    const json& jef = require_key(j, "eigenfunctions");
    if (!jef.is_array() || static_cast<Eigen::Index>(jef.size()) != n)
        fail("parse-error", "\"eigenfunctions\" must list one row per eigenvalue");
    MatrixX<Scalar> phi(n, n);
    for (Eigen::Index m = 0; m < n; ++m) {
        const auto& row = jef[static_cast<std::size_t>(m)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
            fail("parse-error", "eigenfunction rows must list one value per node");
        for (Eigen::Index i = 0; i < n; ++i)
            phi(i, m) = scalar_from_json<Scalar>(row[static_cast<std::size_t>(i)]);
    }

    const json& jtol = require_key(j, "rank_tol");
    if (!jtol.is_number()) fail("parse-error", "\"rank_tol\" must be a number");
    MercerDecomposition<Scalar> dec(std::move(mu), std::move(ev), std::move(phi),
                                    jtol.get<double>());

    if (const auto it = j.find("rank"); it != j.end()) {
        if (!it->is_number_integer() || it->get<int>() != dec.rank())
            fail("parse-error", "stored rank disagrees with the eigenvalues");
    }
    return dec;
}

std::string decomposition_to_csv(const MercerDecomposition<double>& dec) {
    const auto& mu = dec.measure();
    const std::size_t d = mu.dim();
    std::string out = "node_index";
    for (std::size_t c = 0; c < d; ++c) out += ",x" + std::to_string(c);
    for (int m = 1; m <= dec.rank(); ++m) out += ",phi_" + std::to_string(m);
    out += "\n";
    for (std::size_t i = 0; i < mu.size(); ++i) {
        out += std::to_string(i);
        for (std::size_t c = 0; c < d; ++c) out += "," + num_str(mu.node(i)[c]);
        for (int m = 0; m < dec.rank(); ++m)
            out += "," + num_str(dec.eigenfunctions()(static_cast<Eigen::Index>(i), m));
        out += "\n";
    }
    return out;
}

template <typename Scalar>
json values_to_json(const VectorX<Scalar>& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(scalar_to_json(v(i)));
    return a;
}

template <typename Scalar>
VectorX<Scalar> values_from_json(const json& j) {
    const json* arr = &j;
    if (j.is_object()) arr = &require_key(j, "values");
    if (!arr->is_array()) fail("parse-error", "expected an array of values");
    VectorX<Scalar> v(static_cast<Eigen::Index>(arr->size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = scalar_from_json<Scalar>((*arr)[static_cast<std::size_t>(i)]);
    return v;
}

template <typename Scalar>
json gram_to_json(const GramMatrix<Scalar>& g) {
    json j;
    j["points"] = points_to_json(g.points);
    j["entries"] = matrix_to_json(g.entries);
    return j;
}

std::string gram_to_csv(const GramMatrix<double>& g) { return matrix_to_csv(g.entries); }

template <typename Scalar>
json matrix_to_json(const MatrixX<Scalar>& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(scalar_to_json(m(i, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string matrix_to_csv(const MatrixX<double>& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out += ",";
            out += num_str(m(i, c));
        }
        out += "\n";
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io-error", "cannot open " + path + " for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) fail("io-error", "failed while reading " + path);
    return ss.str();
}

json read_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail("parse-error", path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail("io-error", "cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) fail("io-error", "failed while writing " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail("io-error", "cannot move temporary file onto " + path);
    }
}

template json kernel_to_json<double>(const Kernel<double>&);
template json kernel_to_json<Complex>(const Kernel<Complex>&);
template Kernel<double> kernel_from_json<double>(const json&);
template Kernel<Complex> kernel_from_json<Complex>(const json&);
template json element_to_json<double>(const RkhsElement<double>&);
template json element_to_json<Complex>(const RkhsElement<Complex>&);
template RkhsElement<double> element_from_json<double>(const json&);
template RkhsElement<Complex> element_from_json<Complex>(const json&);
template json decomposition_to_json<double>(const MercerDecomposition<double>&);
template json decomposition_to_json<Complex>(const MercerDecomposition<Complex>&);
template MercerDecomposition<double> decomposition_from_json<double>(const json&);
template MercerDecomposition<Complex> decomposition_from_json<Complex>(const json&);
template json values_to_json<double>(const VectorX<double>&);
template json values_to_json<Complex>(const VectorX<Complex>&);
template VectorX<double> values_from_json<double>(const json&);
template VectorX<Complex> values_from_json<Complex>(const json&);
template json gram_to_json<double>(const GramMatrix<double>&);
template json gram_to_json<Complex>(const GramMatrix<Complex>&);
template json matrix_to_json<double>(const MatrixX<double>&);
template json matrix_to_json<Complex>(const MatrixX<Complex>&);

}  // namespace rkhs::io
