#include "opseq/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace opseq {

std::vector<cplx> MeasureAtoms::closed_support() const {
  std::vector<cplx> out;
  for (const auto& a : atoms)
    if (a.weight > 0.0) out.push_back(a.z);
  return out;
}

double MeasureAtoms::total_mass() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

std::vector<cplx> MeasureAtoms::locations() const {
  std::vector<cplx> out;
  out.reserve(atoms.size());
  for (const auto& a : atoms) out.push_back(a.z);
  return out;
}

MeasureAtoms MeasureAtoms::from_locations(std::vector<cplx> z, double weight) {
  MeasureAtoms m;
  for (auto v : z) m.atoms.push_back({v, weight});
  return m;
}

std::string basis_name(const BasisTag& tag) {
  return std::visit(
      [](const auto& t) -> std::string {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, HardyTruncation>) return "hardy_truncation";
        else if constexpr (std::is_same_v<T, ModelSpaceBasis>) return "model_space";
        else return "atomic";
      },
      tag);
}

OperatorMatrix::OperatorMatrix(Matrix entries, BasisTag basis, std::string meta)
    : entries_(std::move(entries)), basis_(std::move(basis)), meta_(std::move(meta)) {
  if (entries_.rows() != entries_.cols()) throw InvalidInput("operator matrix must be square");
  if (!entries_.allFinite()) throw InvalidInput("operator matrix has non-finite entries");
  const auto n = static_cast<std::size_t>(entries_.rows());
  if (const auto* m = std::get_if<ModelSpaceBasis>(&basis_); m && m->theta.degree() != n)
    throw InvalidInput("model-space matrix dimension must equal the Blaschke degree");
  if (const auto* a = std::get_if<AtomicBasis>(&basis_); a && a->atoms.size() != n)
    throw InvalidInput("atomic matrix dimension must equal the atom count");
}

namespace {

void require_dim(Eigen::Index n) {
  if (n < 1) throw InvalidInput("matrix dimension must be at least 1");
}

// coefficients phi_k for k in [lo, lo + len)
std::vector<cplx> coeff_window(const TrigSymbol& phi, long lo, long len) {
  std::vector<cplx> out(static_cast<std::size_t>(len));
  auto it = phi.coeffs().lower_bound(static_cast<int>(std::max<long>(lo, INT32_MIN)));
  for (; it != phi.coeffs().end() && it->first < lo + len; ++it)
    out[static_cast<std::size_t>(it->first - lo)] = it->second;
  return out;
}

std::string describe(const char* what, const TrigSymbol& phi, Eigen::Index n) {
  std::ostringstream os;
  os << what << "[support " << phi.min_index() << ".." << phi.max_index() << ", N=" << n << "]";
  return os.str();
}

} // namespace

OperatorMatrix toeplitz_matrix(const TrigSymbol& phi, Eigen::Index n) {
  require_dim(n);
  const auto c = coeff_window(phi, -(n - 1), 2 * n - 1);
  Matrix t(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) t(i, j) = c[static_cast<std::size_t>(i - j + n - 1)];
  return OperatorMatrix(std::move(t), HardyTruncation{}, describe("toeplitz", phi, n));
}

OperatorMatrix hankel_matrix(const TrigSymbol& phi, Eigen::Index n) {
  require_dim(n);
  // entry (i, j) reads phi_{-(i+j+1)}, i.e. indices -(2n-1) .. -1
  const auto c = coeff_window(phi, -(2 * n - 1), 2 * n - 1);
  Matrix h(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) h(i, j) = c[static_cast<std::size_t>(2 * n - 1 - (i + j + 1))];
  return OperatorMatrix(std::move(h), HardyTruncation{}, describe("hankel", phi, n));
}

OperatorMatrix composition_matrix(const TrigSymbol& phi, Eigen::Index n) {
  require_dim(n);
  if (!phi.is_analytic()) throw InvalidInput("composition symbol must be analytic");
  const auto grid = std::max<std::size_t>(kDefaultSupGrid, 4 * static_cast<std::size_t>(phi.max_index()));
  if (sup_norm_grid(phi, grid) > 1.0 + 1e-12)
    throw InvalidInput("composition symbol is not certified as a self-map of the disk (sup norm > 1)");

  const auto c = coeff_window(phi, 0, n);
  Matrix m = Matrix::Zero(n, n);
  std::vector<cplx> power(static_cast<std::size_t>(n), cplx{});
  std::vector<cplx> next(static_cast<std::size_t>(n));
  power[0] = 1.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) m(i, k) = power[static_cast<std::size_t>(i)];
    std::fill(next.begin(), next.end(), cplx{});
    for (Eigen::Index i = 0; i < n; ++i) {
      const cplx p = power[static_cast<std::size_t>(i)];
      if (p == cplx{}) continue;
      for (Eigen::Index d = 0; i + d < n; ++d) next[static_cast<std::size_t>(i + d)] += p * c[static_cast<std::size_t>(d)];
    }
    power.swap(next);
  }
  return OperatorMatrix(std::move(m), HardyTruncation{}, describe("composition", phi, n));
}

namespace {

// In-place multiplication of a truncated Taylor series by 1/(1 - conj(a) z).
void divide_by_kernel_denominator(std::vector<cplx>& x, cplx a) {
  const cplx ab = std::conj(a);
  for (std::size_t k = 1; k < x.size(); ++k) x[k] += ab * x[k - 1];
}

// In-place multiplication by the Blaschke factor (a - z)/(1 - conj(a) z).
void multiply_by_factor(std::vector<cplx>& x, cplx a) {
  for (std::size_t k = x.size(); k-- > 0;) x[k] = a * x[k] - (k > 0 ? x[k - 1] : cplx{});
  divide_by_kernel_denominator(x, a);
}

double column_tail(const BlaschkeSpec& theta, std::size_t j, int order) {
  BlaschkeSpec prefix{{theta.zeros.begin(), theta.zeros.begin() + static_cast<long>(j)}};
  const cplx a = theta.zeros[j];
  return blaschke_tail_bound(prefix, order, std::abs(a), std::sqrt(1.0 - std::norm(a)));
}

} // namespace

int tm_required_order(const BlaschkeSpec& theta, double tol) {
  theta.validate();
  int order = static_cast<int>(theta.degree());
  for (std::size_t j = 0; j < theta.degree(); ++j) {
    BlaschkeSpec prefix{{theta.zeros.begin(), theta.zeros.begin() + static_cast<long>(j)}};
    const cplx a = theta.zeros[j];
    order = std::max(order, blaschke_required_order(prefix, tol, std::abs(a), std::sqrt(1.0 - std::norm(a))));
  }
  return order;
}

ModelBasis tm_basis(const BlaschkeSpec& theta, int order) {
  theta.validate();
  const auto d = theta.degree();
  if (d < 1) throw InvalidInput("model space needs a Blaschke product of degree >= 1");
  if (order < static_cast<int>(d)) throw InvalidInput("TM truncation order must be at least the degree");

  double tail = 0.0;
  for (std::size_t j = 0; j < d; ++j) tail = std::max(tail, column_tail(theta, j, order));
  if (tail > kModelTailTol) {
    throw InvalidInput("TM basis tail " + std::to_string(tail) + " exceeds tolerance at order " +
                       std::to_string(order) + "; required order is " +
                       std::to_string(tm_required_order(theta, kModelTailTol)));
  }

  const auto len = static_cast<std::size_t>(order) + 1;
  ModelBasis basis;
  basis.theta = theta;
  basis.tail_bound = tail;
  basis.coeff_matrix.resize(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(d));

  std::vector<cplx> product(len, cplx{});
  product[0] = 1.0;
  for (std::size_t j = 0; j < d; ++j) {
    const cplx a = theta.zeros[j];
    auto column = product;
    divide_by_kernel_denominator(column, a);
    const double scale = std::sqrt(1.0 - std::norm(a));
    for (std::size_t k = 0; k < len; ++k) basis.coeff_matrix(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = scale * column[k];
    multiply_by_factor(product, a);
  }

  const Matrix gram = basis.coeff_matrix.adjoint() * basis.coeff_matrix;
  basis.ortho_residual = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  return basis;
}

OperatorMatrix model_compression(const ModelBasis& basis, const TrigSymbol& f) {
  if (!f.is_analytic()) throw InvalidInput("model compression needs an analytic symbol (no negative indices)");
  const Matrix& v = basis.coeff_matrix;
  const Eigen::Index len = v.rows();
  Matrix fv = Matrix::Zero(len, v.cols());
  for (const auto& [k, c] : f.coeffs()) {
    if (k >= len) break;
    fv.bottomRows(len - k) += c * v.topRows(len - k);
  }
  Matrix m = v.adjoint() * fv;
  return OperatorMatrix(std::move(m), ModelSpaceBasis{basis.theta}, "model_compression");
}

OperatorMatrix rank_one_matrix(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw InvalidInput("rank-one factors must have equal length");
  return OperatorMatrix(x * y.adjoint(), HardyTruncation{}, "rank_one");
}

OperatorMatrix diagonal_from_atoms(const MeasureAtoms& atoms) {
  if (atoms.size() < 1) throw InvalidInput("need at least one atom");
  Vector d(static_cast<Eigen::Index>(atoms.size()));
  for (std::size_t j = 0; j < atoms.size(); ++j) d(static_cast<Eigen::Index>(j)) = atoms.atoms[j].z;
  return OperatorMatrix(d.asDiagonal().toDenseMatrix(), AtomicBasis{atoms}, "diagonal");
}

Vector basis_vector(Eigen::Index dim, Eigen::Index k) {
  Vector e = Vector::Zero(dim);
  e(k) = 1.0;
  return e;
}

OperatorMatrix identity_matrix(Eigen::Index n, cplx scale) {
  require_dim(n);
  return OperatorMatrix(scale * Matrix::Identity(n, n), HardyTruncation{}, "identity");
}

OperatorMatrix shift_matrix(Eigen::Index n) {
  require_dim(n);
  Matrix s = Matrix::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) s(i, i - 1) = 1.0;
  return OperatorMatrix(std::move(s), HardyTruncation{}, "shift");
}

OperatorMatrix embed(const OperatorMatrix& op, Eigen::Index dim) {
  if (dim < op.dim()) throw InvalidInput("embedding dimension smaller than the operator");
  Matrix m = Matrix::Zero(dim, dim);
  m.topLeftCorner(op.dim(), op.dim()) = op.entries();
  return OperatorMatrix(std::move(m), HardyTruncation{}, "embed(" + op.meta() + ")");
}

} // namespace opseq
