#include "opseq/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace opseq::io {

SchemaError::SchemaError(std::string pointer, const std::string& message)
    : InvalidInput((pointer.empty() ? std::string("/") : pointer) + ": " + message), pointer_(std::move(pointer)) {}

namespace {

std::string at(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
std::string at(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

double number(const json& j, const std::string& ptr) {
  if (!j.is_number()) throw SchemaError(ptr, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(ptr, "expected a finite number");
  return v;
}

int integer(const json& j, const std::string& ptr) {
  if (!j.is_number_integer()) throw SchemaError(ptr, "expected an integer");
  return j.get<int>();
}

const json& field(const json& j, const std::string& ptr, const std::string& key) {
  if (!j.is_object()) throw SchemaError(ptr, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(at(ptr, key), "missing field");
  return *it;
}

const json& array(const json& j, const std::string& ptr) {
  if (!j.is_array()) throw SchemaError(ptr, "expected an array");
  return j;
}

Vector vector_field(const json& j, const std::string& ptr, Eigen::Index dim) {
  if (j.is_object() && j.contains("basis")) {
    const int k = integer(j["basis"], at(ptr, "basis"));
    if (k < 0 || k >= dim) throw SchemaError(at(ptr, "basis"), "basis index outside [0, dim)");
    return basis_vector(dim, k);
  }
  return parse_vector(j, ptr, dim);
}

} // namespace

cplx parse_complex(const json& j, const std::string& ptr) {
  if (j.is_number()) return {number(j, ptr), 0.0};
  if (j.is_array() && j.size() == 2) return {number(j[0], at(ptr, 0)), number(j[1], at(ptr, 1))};
  throw SchemaError(ptr, "expected a number or [re, im]");
}

TrigSymbol parse_symbol(const json& j, const std::string& ptr) {
  const auto& coeffs = array(field(j, ptr, "coeffs"), at(ptr, "coeffs"));
  TrigSymbol::CoeffMap m;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const std::string p = at(at(ptr, "coeffs"), i);
    const auto& e = coeffs[i];
    if (!e.is_array() || (e.size() != 2 && e.size() != 3)) throw SchemaError(p, "expected [k, re, im] or [k, re]");
    const int k = integer(e[0], at(p, 0));
    const cplx c{number(e[1], at(p, 1)), e.size() == 3 ? number(e[2], at(p, 2)) : 0.0};
    if (!m.emplace(k, c).second) throw SchemaError(p, "duplicate index " + std::to_string(k));
  }
  double tail = 0.0;
  if (j.contains("tail_bound")) {
    tail = number(j["tail_bound"], at(ptr, "tail_bound"));
    if (tail < 0.0) throw SchemaError(at(ptr, "tail_bound"), "must be nonnegative");
  }
  try {
    return TrigSymbol(std::move(m), 0, tail);
  } catch (const InvalidInput& e) {
    throw SchemaError(ptr, e.what());
  }
}

BlaschkeSpec parse_blaschke(const json& j, const std::string& ptr) {
  const auto& zeros = array(field(j, ptr, "zeros"), at(ptr, "zeros"));
  BlaschkeSpec s;
  for (std::size_t i = 0; i < zeros.size(); ++i) {
    const cplx z = parse_complex(zeros[i], at(at(ptr, "zeros"), i));
    if (!(std::abs(z) < 1.0)) throw SchemaError(at(at(ptr, "zeros"), i), "zero must lie in the open unit disk");
    s.zeros.push_back(z);
  }
  return s;
}

MeasureAtoms parse_atoms(const json& j, const std::string& ptr) {
  array(j, ptr);
  MeasureAtoms atoms;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = at(ptr, i);
    const auto& e = j[i];
    if (!e.is_array() || (e.size() != 2 && e.size() != 3)) throw SchemaError(p, "expected [re, im, weight]");
    const double w = e.size() == 3 ? number(e[2], at(p, 2)) : 1.0;
    if (w < 0.0) throw SchemaError(at(p, 2), "weight must be nonnegative");
    atoms.atoms.push_back({{number(e[0], at(p, 0)), number(e[1], at(p, 1))}, w});
  }
  return atoms;
}

Vector parse_vector(const json& j, const std::string& ptr, Eigen::Index dim) {
  array(j, ptr);
  const auto n = static_cast<Eigen::Index>(j.size());
  if (dim > 0 && n > dim) throw SchemaError(ptr, "vector longer than the dimension " + std::to_string(dim));
  Vector v = Vector::Zero(std::max(n, dim));
  for (Eigen::Index i = 0; i < n; ++i) v(i) = parse_complex(j[static_cast<std::size_t>(i)], at(ptr, static_cast<std::size_t>(i)));
  return v;
}

Matrix parse_matrix(const json& j, const std::string& ptr) {
  const int n = integer(field(j, ptr, "dim"), at(ptr, "dim"));
  if (n < 1) throw SchemaError(at(ptr, "dim"), "must be at least 1");
  const auto& data = array(field(j, ptr, "data"), at(ptr, "data"));
  if (data.size() != 2 * static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
    throw SchemaError(at(ptr, "data"), "expected 2 * dim^2 numbers (re, im row-major)");
  Matrix m(n, n);
  std::size_t idx = 0;
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c, idx += 2)
      m(r, c) = cplx{number(data[idx], at(at(ptr, "data"), idx)), number(data[idx + 1], at(at(ptr, "data"), idx + 1))};
  return m;
}

OperatorMatrix parse_operator(const json& j, const std::string& ptr, Eigen::Index dim) {
  const auto& type_j = field(j, ptr, "type");
  if (!type_j.is_string()) throw SchemaError(at(ptr, "type"), "expected a string");
  const std::string type = type_j.get<std::string>();
  try {
    if (type == "toeplitz") return toeplitz_matrix(parse_symbol(field(j, ptr, "symbol"), at(ptr, "symbol")), dim);
    if (type == "hankel") return hankel_matrix(parse_symbol(field(j, ptr, "symbol"), at(ptr, "symbol")), dim);
    if (type == "composition")
      return composition_matrix(parse_symbol(field(j, ptr, "symbol"), at(ptr, "symbol")), dim);
    if (type == "toeplitz_product") {
      const auto phi = parse_symbol(field(j, ptr, "phi"), at(ptr, "phi"));
      const auto psi = parse_symbol(field(j, ptr, "psi"), at(ptr, "psi"));
      // pad so the truncation corner stays outside the reported block
      const Eigen::Index pad = dim + phi.max_index() + psi.negative_extent() + phi.negative_extent() + psi.max_index();
      Matrix p = toeplitz_matrix(phi, pad).entries() * toeplitz_matrix(psi, pad).entries();
      return OperatorMatrix(Matrix(p.topLeftCorner(dim, dim)), HardyTruncation{}, "toeplitz_product");
    }
    if (type == "rank_one")
      return rank_one_matrix(vector_field(field(j, ptr, "x"), at(ptr, "x"), dim),
                             vector_field(field(j, ptr, "y"), at(ptr, "y"), dim));
    if (type == "identity")
      return identity_matrix(dim, j.contains("scale") ? parse_complex(j["scale"], at(ptr, "scale")) : cplx{1.0});
    if (type == "diagonal") {
      const Vector d = parse_vector(field(j, ptr, "entries"), at(ptr, "entries"), dim);
      return OperatorMatrix(Matrix(d.asDiagonal()), HardyTruncation{}, "diagonal");
    }
    if (type == "dense") {
      const Matrix m = parse_matrix(field(j, ptr, "matrix"), at(ptr, "matrix"));
      if (m.rows() > dim) throw SchemaError(at(ptr, "matrix"), "matrix larger than the dimension");
      return embed(OperatorMatrix(m), dim);
    }
    if (type == "shift") return shift_matrix(dim);
    if (type == "shift_adjoint") return OperatorMatrix(Matrix(shift_matrix(dim).entries().adjoint()));
    if (type == "sum") {
      const auto& terms = array(field(j, ptr, "terms"), at(ptr, "terms"));
      if (terms.empty()) throw SchemaError(at(ptr, "terms"), "needs at least one term");
      Matrix acc = Matrix::Zero(dim, dim);
      for (std::size_t i = 0; i < terms.size(); ++i)
        acc += parse_operator(terms[i], at(at(ptr, "terms"), i), dim).entries();
      return OperatorMatrix(std::move(acc), HardyTruncation{}, "sum");
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw SchemaError(ptr, e.what());
  }
  throw SchemaError(at(ptr, "type"), "unknown operator type '" + type + "'");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json to_json(const TrigSymbol& s) {
  json coeffs = json::array();
  for (const auto& [k, c] : s.coeffs()) coeffs.push_back(json::array({k, c.real(), c.imag()}));
  return {{"coeffs", coeffs}, {"tail_bound", s.tail_bound()}};
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

json to_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      data.push_back(m(r, c).real());
      data.push_back(m(r, c).imag());
    }
  return {{"dim", m.rows()}, {"data", data}};
}

std::string trace_csv(const SequenceTrace& power, const SequenceTrace* cesaro) {
  std::ostringstream os;
  os << "n,norm,increment,cesaro_norm,truncation_warning\n";
  for (const auto& s : power.steps) {
    os << s.n << ',' << format_number(s.norm) << ',';
    if (s.increment) os << format_number(*s.increment);
    os << ',';
    // Cesaro step n (stored at index n - 1) averages power steps 0..n-1
    if (cesaro && s.n >= 1 && s.n <= cesaro->steps.size()) os << format_number(cesaro->steps[s.n - 1].norm);
    os << ',' << (power.truncation_warning ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string distance_csv(const DistanceTrace& trace) {
  std::ostringstream os;
  os << "n,dist,violation\n";
  for (std::size_t i = 0; i < trace.per_n.size(); ++i) {
    const double v = i == 0 ? 0.0 : std::max(0.0, trace.per_n[i].second - trace.per_n[i - 1].second);
    os << trace.per_n[i].first << ',' << format_number(trace.per_n[i].second) << ',' << format_number(v) << '\n';
  }
  return os.str();
}

std::string gnuplot_dat(const std::string& label, const std::vector<std::pair<double, double>>& rows) {
  std::ostringstream os;
  os << "# n " << label << '\n';
  for (const auto& [x, y] : rows) os << format_number(x) << ' ' << format_number(y) << '\n';
  return os.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

} // namespace opseq::io
