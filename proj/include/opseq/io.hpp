#pragma once

///
/// \file io.hpp
///
/// JSON decoding of symbols, Blaschke zeros, atoms and operators, plus
/// byte-stable text encoders for traces and reports.
///
/// Wire formats
///   complex   : number, or [re, im]
///   symbol    : {"coeffs": [[k, re, im], ...], "tail_bound": x}
///   blaschke  : {"zeros": [[re, im], ...]}
///   atoms     : [[re, im, weight], ...]
///   matrix    : {"dim": n, "data": [re, im, re, im, ...]} row-major
///

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "opseq/asymptotics.hpp"
#include "opseq/distances.hpp"
#include "opseq/spectral.hpp"

namespace opseq::io {

using json = nlohmann::json;

/// Input rejected at a JSON-pointer location.
class SchemaError : public InvalidInput {
public:
  SchemaError(std::string pointer, const std::string& message);
  const std::string& pointer() const noexcept { return pointer_; }

private:
  std::string pointer_;
};

// --- decoding --------------------------------------------------------------

cplx parse_complex(const json& j, const std::string& ptr);
TrigSymbol parse_symbol(const json& j, const std::string& ptr);
BlaschkeSpec parse_blaschke(const json& j, const std::string& ptr);
MeasureAtoms parse_atoms(const json& j, const std::string& ptr);
/// Entries padded with zeros up to `dim` when `dim` > 0.
Vector parse_vector(const json& j, const std::string& ptr, Eigen::Index dim = 0);
Matrix parse_matrix(const json& j, const std::string& ptr);

/// Operator spec {"type": ..., ...} realized at dimension `dim`.  Types:
///   toeplitz {symbol}, toeplitz_product {phi, psi}, composition {symbol},
///   hankel {symbol}, rank_one {x, y}, identity {scale}, diagonal {entries},
///   dense {matrix}, shift, shift_adjoint, sum {terms}.
/// Vectors for rank_one are either a vector literal or {"basis": k}.
OperatorMatrix parse_operator(const json& j, const std::string& ptr, Eigen::Index dim);

// --- encoding --------------------------------------------------------------

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite.
std::string format_number(double v);

json to_json(cplx z);
json to_json(const TrigSymbol& s);
json to_json(const Vector& v);
json to_json(const Matrix& m);

/// Columns n, norm, increment, cesaro_norm, truncation_warning.  Missing
/// values are left empty.  The Cesaro trace may be null.
std::string trace_csv(const SequenceTrace& power, const SequenceTrace* cesaro);
/// Columns n, dist, violation (increase over the previous value, clamped at 0).
std::string distance_csv(const DistanceTrace& trace);
/// Header comment line followed by whitespace-separated (n, value) rows.
std::string gnuplot_dat(const std::string& label, const std::vector<std::pair<double, double>>& rows);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace opseq::io
