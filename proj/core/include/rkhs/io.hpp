#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "rkhs/element.hpp"
#include "rkhs/kernel.hpp"
#include "rkhs/measure.hpp"
#include "rkhs/mercer.hpp"

namespace rkhs::io {

using json = nlohmann::ordered_json;

// Scalars serialize as plain numbers (real field) or [re, im] pairs (complex
// field). Kernel files carry a "field" key naming the scalar type; loaders
// dispatch on it. All writers produce key order and number formatting that is
// byte-stable across runs.

json measure_to_json(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_json(const json& j);
std::string measure_to_csv(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_csv(const std::string& text);

// "real" or "complex"; defaults to "real" when the key is absent.
std::string field_of(const json& j);

template <typename Scalar>
json kernel_to_json(const Kernel<Scalar>& k);
template <typename Scalar>
Kernel<Scalar> kernel_from_json(const json& j);

template <typename Scalar>
json element_to_json(const RkhsElement<Scalar>& f);
template <typename Scalar>
RkhsElement<Scalar> element_from_json(const json& j);

template <typename Scalar>
json decomposition_to_json(const MercerDecomposition<Scalar>& dec);
template <typename Scalar>
MercerDecomposition<Scalar> decomposition_from_json(const json& j);

// node_index, coordinates, then one column per retained eigenfunction.
// Real field only: complex columns have no portable CSV encoding.
std::string decomposition_to_csv(const MercerDecomposition<double>& dec);

template <typename Scalar>
json values_to_json(const VectorX<Scalar>& v);
template <typename Scalar>
VectorX<Scalar> values_from_json(const json& j);

template <typename Scalar>
json gram_to_json(const GramMatrix<Scalar>& g);
std::string gram_to_csv(const GramMatrix<double>& g);

template <typename Scalar>
json matrix_to_json(const MatrixX<Scalar>& m);
std::string matrix_to_csv(const MatrixX<double>& m);

std::string read_text_file(const std::string& path);
json read_json_file(const std::string& path);

// Writes via a sibling temp file and an atomic rename, so readers never see a
// partially written artifact.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace rkhs::io
