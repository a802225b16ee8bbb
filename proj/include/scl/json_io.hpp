#pragma once

#include "scl/asymptotics.hpp"
#include "scl/estimator.hpp"
#include "scl/synthetic.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>

namespace scl {

using Json = nlohmann::ordered_json;

/// {kind, m} | {kind: generic, cardinalities, cliques, feature?} |
/// {kind: boltzmann_chain, states, symbols} |
/// {kind: linear_chain_crf, states, num_obs_features, supported?}.
/// Errors name the offending field.
Model model_from_json(const Json& spec);
Json model_to_json(const Model& model);

/// {family, lambda, blocks?}.
SelectionPolicy policy_from_json(const Json& spec);
Json policy_to_json(const SelectionPolicy& policy);

Json matrix_to_json(const Matrix& m);  // {rows, cols, data (row-major)}
Json vector_to_json(const Vector& v);
Matrix matrix_from_json(const Json& j);
Vector vector_from_json(const Json& j);

Json ledger_to_json(const FlopLedger& ledger);
Json fit_to_json(const Model& model, const FitResult& fit);
Json report_to_json(const AsymReport& report);
Json robust_to_json(const RobustReport& report);
Json synthetic_to_json(const Model& model, const SyntheticData& data);
SyntheticData synthetic_from_json(const Json& j);

/// One sample per line, space-separated state indices. Boltzmann chains list
/// the labels then the symbols.
void write_dataset(std::ostream& out, const Dataset& data);
Dataset read_dataset(std::istream& in);
/// CRF data as parallel files: labels per line; observations per line with
/// positions separated by spaces and feature ids by commas.
void write_conditional(std::ostream& y_out, std::ostream& x_out, const Dataset& data);
Dataset read_conditional(std::istream& y_in, std::istream& x_in);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Shortest round-tripping decimal form of a double.
std::string format_double(double v);

}  // namespace scl
