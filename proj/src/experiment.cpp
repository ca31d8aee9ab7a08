#include "opseq/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace opseq {

using io::json;
using io::SchemaError;

namespace {

const std::map<std::string, std::string>& statements() {
  static const std::map<std::string, std::string> m = {
      {"toeplitz_asymptotics", "Brown-Halmos: T is Toeplitz iff S* T S = T, so shift windows of a Toeplitz matrix never move"},
      {"feintuch_decompose", "Feintuch: S*^n T S^n converges in norm iff T = T0 + K with T0 Toeplitz and K compact"},
      {"ess_norm", "essential norm: ||T + K(H)|| = lim ||A^n T B^n|| for the shift pair"},
      {"nehari", "Nehari: dist(phi, H^inf) = ||H_phi||"},
      {"hsc_distance", "dist(phi, H^inf + C) = lim_n dist(phi, conj(z)^n H^inf)"},
      {"hartman_sarason", "Hartman-Sarason: ||f(S_theta) + K|| = dist(conj(theta) f, H^inf + C)"},
      {"sigma_u", "Lipschitz-Moeller: sigma(S_theta) on the circle is Sigma_u(theta) = {xi : liminf |theta(z)| = 0 as z -> xi}"},
      {"composition_dichotomy", "composition operators: if the Cesaro means of S*^n C_phi S^n converge, C_phi is compact or the identity"},
      {"peripheral_sup", "peripheral supremum: lim ||T^n Q|| = sup |Q^(xi)| over the peripheral spectrum"},
      {"normal_cesaro", "mean ergodic limit for normal contractions: (1/n) sum N^i x -> P({1}) x; N^n x converges iff P(T minus {1}) x = 0"},
      {"tauberian", "Tauberian step: ||X_{n+1} - X_n|| -> 0 with Cesaro convergence gives convergence to the same limit"},
      {"averaged_power", "averaged contractions: S = (I + T + ... + T^{k-1}) / k has norm-convergent powers S^n x"},
      {"gap_check", "compact perturbation gap: ||K + T0|| >= ||K|| / 2 for fixed points T0, and the bound is sharp"},
  };
  return m;
}

std::string at(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }

// Typed access to "params" that records every value used, defaults included.
class Params {
public:
  Params(const json& p, std::string ptr) : p_(p), ptr_(std::move(ptr)) {
    if (!p_.is_object()) throw SchemaError(ptr_, "expected an object");
  }

  int integer(const std::string& key, int def, int min) {
    int v = def;
    if (p_.contains(key)) {
      if (!p_[key].is_number_integer()) throw SchemaError(at(ptr_, key), "expected an integer");
      v = p_[key].get<int>();
    }
    if (v < min) throw SchemaError(at(ptr_, key), "must be at least " + std::to_string(min));
    echo[key] = v;
    return v;
  }

  double positive(const std::string& key, double def) {
    double v = def;
    if (p_.contains(key)) {
      if (!p_[key].is_number()) throw SchemaError(at(ptr_, key), "expected a number");
      v = p_[key].get<double>();
    }
    if (!(v > 0.0) || !std::isfinite(v)) throw SchemaError(at(ptr_, key), "must be a positive finite number");
    echo[key] = v;
    return v;
  }

  unsigned long long seed() {
    unsigned long long v = Defaults::seed;
    if (p_.contains("seed")) {
      if (!p_["seed"].is_number_unsigned()) throw SchemaError(at(ptr_, "seed"), "expected a nonnegative integer");
      v = p_["seed"].get<unsigned long long>();
    }
    echo["seed"] = v;
    return v;
  }

  bool has(const std::string& key) const { return p_.contains(key); }

  const json& raw(const std::string& key) {
    if (!p_.contains(key)) throw SchemaError(at(ptr_, key), "missing field");
    echo[key] = p_[key];
    return p_[key];
  }

  std::string path(const std::string& key) const { return at(ptr_, key); }

  json echo = json::object();

private:
  const json& p_;
  std::string ptr_;
};

json complex_list(const std::vector<cplx>& zs) {
  json out = json::array();
  for (auto z : zs) out.push_back(io::to_json(z));
  return out;
}

json norms_of(const SequenceTrace& t) {
  json out = json::array();
  for (const auto& s : t.steps) out.push_back(s.norm);
  return out;
}

std::vector<std::pair<double, double>> norm_rows(const SequenceTrace& t) {
  std::vector<std::pair<double, double>> rows;
  for (const auto& s : t.steps) rows.emplace_back(static_cast<double>(s.n), s.norm);
  return rows;
}

json verdict_json(const ConvergenceVerdict& v, const NormOptions& norm) {
  json j = {{"status", to_string(v.status)},
            {"tol", v.tol},
            {"window", v.window_w},
            {"max_pairwise_deviation", v.evidence.max_pairwise_deviation},
            {"deviation_exact", v.evidence.deviation_exact},
            {"min_increment", v.evidence.min_increment},
            {"persistent_fraction", v.evidence.persistent_fraction}};
  j["cauchy_gap"] = v.evidence.cauchy_gap ? json(*v.evidence.cauchy_gap) : json(nullptr);
  j["limit_norm"] = v.limit ? json(operator_norm(*v.limit, norm)) : json(nullptr);
  return j;
}

std::vector<Artifact> trace_artifacts(const SequenceTrace& power, const SequenceTrace* cesaro) {
  return {{".trace.csv", io::trace_csv(power, cesaro)},
          {".dat", io::gnuplot_dat(cesaro ? "cesaro_norm" : "norm", norm_rows(cesaro ? *cesaro : power))}};
}

TraceOptions trace_options(const NormOptions& norm, std::size_t retain) {
  TraceOptions o;
  o.norm = norm;
  o.retain = retain;
  return o;
}

// --- kinds -------------------------------------------------------------------

using Runner = std::function<ExperimentOutput()>;

Runner toeplitz_asymptotics(Params& p) {
  const auto phi = io::parse_symbol(p.raw("symbol"), p.path("symbol"));
  const int n = p.integer("N", Defaults::n, 1);
  const int n_max = p.integer("n_max", Defaults::n_max, 1);
  const double tol = p.positive("tol", Defaults::tol);
  const int w = p.integer("window", Defaults::window, 1);
  if (n_max + 1 < 2 * w) throw SchemaError(p.path("n_max"), "needs n_max + 1 >= 2 * window");
  const NormOptions norm{1e-10, 5000, p.seed()};
  return [=] {
    const auto trace = window_sequence(toeplitz_matrix(phi, n + n_max + 1), n, static_cast<std::size_t>(n_max),
                                       trace_options(norm, TraceOptions::kRetainAll));
    const Matrix ref = toeplitz_matrix(phi, n).entries();
    double dev = 0.0;
    double max_inc = 0.0;
    for (const auto& s : trace.steps) {
      dev = std::max(dev, (*s.matrix - ref).cwiseAbs().maxCoeff());
      if (s.increment) max_inc = std::max(max_inc, *s.increment);
    }
    const auto v = detect_convergence(trace, tol, static_cast<std::size_t>(w), norm);
    json r = {{"verdict", verdict_json(v, norm)},
              {"status", to_string(v.status)},
              {"window_deviation", dev},
              {"max_increment", max_inc},
              {"norm", trace.steps.back().norm},
              {"sup_norm", sup_norm_grid(phi, std::max<std::size_t>(kDefaultSupGrid, 4 * static_cast<std::size_t>(phi.max_index() - phi.min_index() + 1)))}};
    return ExperimentOutput{r, trace_artifacts(trace, nullptr)};
  };
}

Runner feintuch_decompose(Params& p) {
  const int n = p.integer("N", Defaults::n, 2);
  const int n_max = p.integer("n_max", Defaults::n_max, 1);
  const double tol = p.positive("tol", Defaults::tol);
  const int w = p.integer("window", Defaults::window, 1);
  if (n_max + 1 < 2 * w) throw SchemaError(p.path("n_max"), "needs n_max + 1 >= 2 * window");
  const NormOptions norm{1e-10, 5000, p.seed()};
  const auto t = io::parse_operator(p.raw("operator"), p.path("operator"), n + n_max + 1);
  return [=] {
    const auto trace = window_sequence(t, n, static_cast<std::size_t>(n_max), trace_options(norm, TraceOptions::kRetainAll));
    const auto v = detect_convergence(trace, tol, static_cast<std::size_t>(w), norm);
    json r = {{"verdict", verdict_json(v, norm)}, {"status", to_string(v.status)}};
    if (v.status == ConvergenceStatus::converged) {
      const auto d = asymptotic_decomposition_shift(v, t, norm);
      r["fixed_point_residual"] = d.fixed_point_residual;
      r["compactness_score"] = d.compactness_score;
      r["k_norm"] = operator_norm(d.k, norm);
      r["k_00"] = io::to_json(d.k(0, 0));
      r["t0_first_column"] = io::to_json(Vector(d.t0.col(0).head(std::min<Eigen::Index>(8, n))));
      r["t0_first_row"] = io::to_json(Vector(d.t0.row(0).head(std::min<Eigen::Index>(8, n)).transpose()));
      const Eigen::Index lead = std::min<Eigen::Index>(8, n);
      r["k_leading_block"] = io::to_json(Matrix(d.k.topLeftCorner(lead, lead)));
    }
    return ExperimentOutput{r, trace_artifacts(trace, nullptr)};
  };
}

Runner ess_norm(Params& p) {
  const int n = p.integer("N", Defaults::n, 1);
  const int n_max = p.integer("n_max", Defaults::n_max, 1);
  const NormOptions norm{1e-10, 5000, p.seed()};
  const auto t = io::parse_operator(p.raw("operator"), p.path("operator"), n + n_max);
  std::optional<TrigSymbol> oracle;
  if (p.has("sup_symbol")) oracle = io::parse_symbol(p.raw("sup_symbol"), p.path("sup_symbol"));
  return [=] {
    const auto r = ess_norm_estimate(t, n, static_cast<std::size_t>(n_max), trace_options(norm, 1));
    json j = {{"estimate", r.estimate}, {"tail_mean", r.tail_mean}, {"tail_spread", r.tail_spread}, {"monotone", r.monotone}};
    if (oracle) {
      const double sup = sup_norm_grid(*oracle);
      j["sup_norm"] = sup;
      j["gap_to_sup"] = std::abs(r.estimate - sup);
    }
    return ExperimentOutput{j, trace_artifacts(r.trace, nullptr)};
  };
}

Runner nehari(Params& p) {
  const auto phi = io::parse_symbol(p.raw("symbol"), p.path("symbol"));
  const int n = p.integer("N", std::max(Defaults::n, phi.negative_extent()), 1);
  const NormOptions norm{1e-10, 5000, p.seed()};
  if (phi.is_exact() && n < phi.negative_extent())
    throw SchemaError(p.path("N"), "must cover the negative support " + std::to_string(phi.negative_extent()));
  return [=] {
    json j = {{"dist", dist_hinf(phi, n, norm)}, {"tail_bound", hankel_tail_bound(phi, n)}, {"hankel_dim", n}};
    return ExperimentOutput{j, {}};
  };
}

TrigSymbol symbol_or_theta(Params& p) {
  if (p.has("symbol")) return io::parse_symbol(p.raw("symbol"), p.path("symbol"));
  const auto theta = io::parse_blaschke(p.raw("theta"), p.path("theta"));
  const auto f = io::parse_symbol(p.raw("f"), p.path("f"));
  if (!f.is_analytic()) throw SchemaError(p.path("f"), "f must be analytic");
  const int order = std::max(64, blaschke_required_order(theta, 1e-13));
  return symbol_mul(symbol_conj_reflect(blaschke_symbol(theta, order)), f);
}

Runner hsc_distance(Params& p) {
  const auto phi = symbol_or_theta(p);
  const int n = p.integer("N", Defaults::n, 1);
  const int n_max = p.integer("n_max", Defaults::n_max, 1);
  const NormOptions norm{1e-10, 5000, p.seed()};
  if (phi.is_exact() && n < phi.negative_extent())
    throw SchemaError(p.path("N"), "must cover the negative support " + std::to_string(phi.negative_extent()));
  return [=] {
    const auto tr = dist_hinf_plus_c(phi, n, n_max, norm);
    json per_n = json::array();
    std::vector<std::pair<double, double>> rows;
    for (const auto& [k, d] : tr.per_n) {
      per_n.push_back(d);
      rows.emplace_back(k, d);
    }
    json j = {{"limit_estimate", tr.limit_estimate},
              {"monotone_violation", tr.monotone_violation},
              {"slow_decay", tr.slow_decay},
              {"tail_bound", hankel_tail_bound(phi, n)},
              {"per_n", per_n}};
    return ExperimentOutput{j, {{".distance.csv", io::distance_csv(tr)}, {".dat", io::gnuplot_dat("dist", rows)}}};
  };
}

Runner hartman_sarason(Params& p) {
  const auto theta = io::parse_blaschke(p.raw("theta"), p.path("theta"));
  if (theta.degree() < 1) throw SchemaError(p.path("theta"), "needs at least one zero");
  const auto f = io::parse_symbol(p.raw("f"), p.path("f"));
  if (!f.is_analytic()) throw SchemaError(p.path("f"), "f must be analytic");
  const int n_max = p.integer("n_max", Defaults::n_max, 0);
  const int order = p.integer("order", 0, 0);
  const NormOptions norm{1e-10, 5000, p.seed()};
  return [=] {
    const auto r = hartman_sarason_report(theta, f, n_max, order, norm);
    std::vector<std::pair<double, double>> rows;
    for (std::size_t i = 0; i < r.model_chain.size(); ++i) rows.emplace_back(static_cast<double>(i), r.model_chain[i]);
    json j = {{"model_norm", r.model_norm},
              {"nehari_norm", r.nehari_norm},
              {"model_chain", r.model_chain},
              {"hankel_chain", r.hankel_chain},
              {"max_discrepancy", r.max_discrepancy},
              {"limit_estimate", r.limit_estimate},
              {"finite_rank_limit_ok", r.finite_rank_limit_ok},
              {"order", r.order},
              {"hankel_dim", r.hankel_dim},
              {"tail_bound", r.tail_bound}};
    return ExperimentOutput{j, {{".dat", io::gnuplot_dat("model_chain", rows)}}};
  };
}

Runner sigma_u(Params& p) {
  const auto theta = io::parse_blaschke(p.raw("theta"), p.path("theta"));
  if (theta.degree() < 1) throw SchemaError(p.path("theta"), "needs at least one zero");
  const int grid = p.integer("grid", 256, 1);
  const int m0 = static_cast<int>(std::ceil(std::log2(static_cast<double>(theta.degree())))) + 4;
  const int m_max = p.integer("m_max", std::max(40, m0), m0);
  const double threshold = p.positive("threshold", kSigmaUThreshold);
  return [=] {
    const auto r = sigma_u_estimate(theta, static_cast<std::size_t>(grid), m_max, threshold);
    json profiles = json::array();
    for (const auto& row : r.radial_profile) profiles.push_back(row);
    json j = {{"flagged", complex_list(r.flagged_points)},
              {"flagged_count", r.flagged_points.size()},
              {"m0", r.m0},
              {"threshold", r.threshold},
              {"radii", r.radii},
              {"tail_minimum", r.tail_minimum},
              {"radial_profile", profiles}};
    std::vector<std::pair<double, double>> rows;
    for (std::size_t g = 0; g < r.grid.size(); ++g) rows.emplace_back(std::arg(r.grid[g]), r.tail_minimum[g]);
    return ExperimentOutput{j, {{".dat", io::gnuplot_dat("tail_minimum", rows)}}};
  };
}

Runner composition_dichotomy(Params& p) {
  const auto phi = io::parse_symbol(p.raw("symbol"), p.path("symbol"));
  if (!phi.is_analytic()) throw SchemaError(p.path("symbol"), "symbol must be analytic");
  const int n = p.integer("N", Defaults::n, 1);
  const int n_max = p.integer("n_max", Defaults::n_max, 1);
  const double tol = p.positive("tol", Defaults::tol);
  const int w = p.integer("window", Defaults::window, 1);
  if (n_max + 1 < 2 * w) throw SchemaError(p.path("n_max"), "needs n_max + 1 >= 2 * window");
  const NormOptions norm{1e-10, 5000, p.seed()};
  const auto c = [&] {
    try {
      return composition_matrix(phi, n + n_max);
    } catch (const InvalidInput& e) {
      throw SchemaError(p.path("symbol"), e.what());
    }
  }();
  return [=] {
    const auto power = window_sequence(c, n, static_cast<std::size_t>(n_max), trace_options(norm, TraceOptions::kRetainAll));
    const auto cesaro = cesaro_trace(power, norm);
    // offsets n >= N see only the zero tail of the window, so the power
    // verdict is taken on the offsets below N
    SequenceTrace reliable = power;
    std::erase_if(reliable.steps, [&](const TraceStep& s) { return s.n >= static_cast<std::size_t>(n); });
    const bool power_checkable = reliable.steps.size() >= 2 * static_cast<std::size_t>(w);
    const auto pv = detect_convergence(power_checkable ? reliable : power, tol, static_cast<std::size_t>(w), norm);
    const auto cv = detect_convergence(cesaro, tol, static_cast<std::size_t>(w), norm);
    // a norm-convergent sequence has Cesaro means converging to the same limit
    const auto& decided = power_checkable && pv.status == ConvergenceStatus::converged ? pv : cv;
    json j = {{"verdict", to_string(decided.status)},
              {"power", verdict_json(pv, norm)},
              {"power_offsets_checked", reliable.steps.size()},
              {"cesaro", verdict_json(cv, norm)},
              {"power_norms", norms_of(power)},
              {"cesaro_norms", norms_of(cesaro)}};
    j["limit_norm"] = decided.limit ? json(operator_norm(*decided.limit, norm)) : json(nullptr);
    return ExperimentOutput{j, trace_artifacts(power, &cesaro)};
  };
}

Runner peripheral_sup(Params& p) {
  const auto poly = io::parse_symbol(p.raw("p"), p.path("p"));
  if (!poly.is_analytic() || !poly.is_exact()) throw SchemaError(p.path("p"), "p must be an analytic polynomial");
  const int n_max = p.integer("n_max", Defaults::n_max, 0);
  const NormOptions norm{1e-10, 5000, p.seed()};
  std::optional<OperatorMatrix> diag;
  int n = 0;
  if (p.has("diagonal")) {
    const Vector d = io::parse_vector(p.raw("diagonal"), p.path("diagonal"));
    if (d.size() == 0) throw SchemaError(p.path("diagonal"), "needs at least one entry");
    diag = OperatorMatrix(Matrix(d.asDiagonal()));
  } else {
    n = p.integer("N", Defaults::n, 1);
  }
  return [=] {
    const auto r = diag ? peripheral_sup_check(*diag, poly, n_max, norm) : peripheral_sup_check_shift(poly, n, n_max, norm);
    std::vector<std::pair<double, double>> rows;
    for (std::size_t i = 0; i < r.trace.size(); ++i) rows.emplace_back(static_cast<double>(i), r.trace[i]);
    json j = {{"path", diag ? "diagonal" : "shift"},
              {"peripheral_sup", r.peripheral_sup},
              {"limit_estimate", r.limit_estimate},
              {"discrepancy", r.discrepancy},
              {"trace_min", *std::min_element(r.trace.begin(), r.trace.end())},
              {"trace_max", *std::max_element(r.trace.begin(), r.trace.end())},
              {"peripheral_spectrum", complex_list(r.peripheral_spectrum)}};
    return ExperimentOutput{j, {{".dat", io::gnuplot_dat("norm", rows)}}};
  };
}

std::pair<MeasureAtoms, VectorOnAtoms> atoms_and_vector(Params& p) {
  const auto atoms = io::parse_atoms(p.raw("atoms"), p.path("atoms"));
  if (atoms.size() == 0) throw SchemaError(p.path("atoms"), "needs at least one atom");
  const Vector x = io::parse_vector(p.raw("x"), p.path("x"));
  if (static_cast<std::size_t>(x.size()) != atoms.size()) throw SchemaError(p.path("x"), "length must match the atom count");
  for (std::size_t j = 0; j < atoms.size(); ++j)
    if (std::abs(atoms.atoms[j].z) > 1.0 + kOnCircleTol)
      throw SchemaError(p.path("atoms") + "/" + std::to_string(j), "atom outside the closed unit disk");
  return {atoms, VectorOnAtoms{x}};
}

Runner normal_cesaro(Params& p) {
  const auto [atoms, x] = atoms_and_vector(p);
  const double tol = p.positive("tol", 1e-12);
  return [=] {
    const auto mu = mu_from_atoms(atoms, x);
    json weights = json::array();
    for (const auto& a : mu.atoms) weights.push_back(a.weight);
    const auto c = cesaro_limit_atoms(atoms, x);
    const auto v = power_convergence_verdict(atoms, x, tol);
    const auto ls = local_spectrum_support(atoms, x);
    json j = {{"mu_weights", weights},
              {"mu_mass", mu.total_mass()},
              {"cesaro_limit", io::to_json(c.limit.values)},
              {"cesaro_crosscheck_gap", c.crosscheck_gap},
              {"converges", v.converges},
              {"circle_weight", v.circle_weight},
              {"power_limit", io::to_json(v.limit.values)},
              {"iteration_agrees", v.iteration_agrees},
              {"iterations", v.iterations},
              {"support", complex_list(ls.support)},
              {"orbit_bounded", ls.orbit_bounded}};
    return ExperimentOutput{j, {}};
  };
}

Runner tauberian(Params& p) {
  const int dim = p.integer("dim", 4, 1);
  const int n_max = p.integer("n_max", Defaults::n_max, 1);
  const double tol = p.positive("tol", Defaults::tol);
  const int w = p.integer("window", Defaults::window, 1);
  if (n_max + 1 < 2 * w) throw SchemaError(p.path("n_max"), "needs n_max + 1 >= 2 * window");
  const NormOptions norm{1e-10, 5000, p.seed()};
  const auto a = io::parse_operator(p.raw("A"), p.path("A"), dim);
  const auto t = io::parse_operator(p.raw("T"), p.path("T"), dim);
  const auto b = io::parse_operator(p.raw("B"), p.path("B"), dim);
  return [=] {
    const auto power = conjugation_sequence(a, t, b, dim, static_cast<std::size_t>(n_max),
                                            trace_options(norm, TraceOptions::kRetainAll));
    const auto cesaro = cesaro_trace(power, norm);
    const auto r = tauberian_report(power, cesaro, tol, static_cast<std::size_t>(w), &a, &b);
    json j = {{"increments_vanish", r.increments_vanish},
              {"cesaro_converged", r.cesaro_converged},
              {"power_converged", r.power_converged},
              {"last_increment", r.last_increment},
              {"limit_gap", r.limit_gap},
              {"hypotheses_hold", r.hypotheses_hold},
              {"conclusion_holds", r.conclusion_holds},
              {"defect", r.defect},
              {"summary", r.summary}};
    j["region"] = r.region ? json(to_string(*r.region)) : json(nullptr);
    j["cesaro_limit"] = r.cesaro_limit ? io::to_json(*r.cesaro_limit) : json(nullptr);
    return ExperimentOutput{j, trace_artifacts(power, &cesaro)};
  };
}

Runner averaged_power(Params& p) {
  const auto [atoms, x] = atoms_and_vector(p);
  const int k = p.integer("k", 2, 2);
  const double tol = p.positive("tol", 1e-12);
  return [=] {
    const Vector s = averaged_operator(diagonal_from_atoms(atoms), k).entries().diagonal();
    MeasureAtoms avg;
    for (Eigen::Index j = 0; j < s.size(); ++j) avg.atoms.push_back({s(j), atoms.atoms[static_cast<std::size_t>(j)].weight});
    const auto v = power_convergence_verdict(avg, x, tol);
    const auto c = cesaro_limit_atoms(avg, x);
    json j = {{"averaged_atoms", io::to_json(s)},
              {"converges", v.converges},
              {"power_limit", io::to_json(v.limit.values)},
              {"cesaro_limit", io::to_json(c.limit.values)},
              {"limit_gap", (v.limit.values - c.limit.values).norm()},
              {"iteration_agrees", v.iteration_agrees}};
    return ExperimentOutput{j, {}};
  };
}

Runner gap_check(Params& p) {
  const int dim = p.integer("dim", 16, 2);
  const NormOptions norm{1e-10, 5000, p.seed()};
  const auto k = io::parse_operator(p.raw("K"), p.path("K"), dim);
  const auto t0 = io::parse_operator(p.raw("T0"), p.path("T0"), dim);
  std::optional<OperatorMatrix> a;
  std::optional<OperatorMatrix> b;
  if (p.has("A") || p.has("B")) {
    a = io::parse_operator(p.raw("A"), p.path("A"), dim);
    b = io::parse_operator(p.raw("B"), p.path("B"), dim);
  }
  return [=] {
    double resid = 0.0;
    if (a) {
      resid = operator_norm(Matrix(a->entries() * t0.entries() * b->entries() - t0.entries()), norm);
    } else {
      // shift pair: T0 is a fixed point iff it is constant along diagonals
      const Matrix& m = t0.entries();
      resid = operator_norm(Matrix(m.bottomRightCorner(dim - 1, dim - 1) - m.topLeftCorner(dim - 1, dim - 1)), norm);
    }
    const auto r = perturbation_gap_check(k, t0, resid, 1e-12, norm);
    json j = {{"fixed_point_residual", resid},
              {"norm_k", r.norm_k},
              {"norm_sum", r.norm_sum},
              {"vacuous", r.vacuous},
              {"holds", r.holds}};
    j["ratio"] = r.ratio ? json(*r.ratio) : json(nullptr);
    return ExperimentOutput{j, {}};
  };
}

const std::map<std::string, std::function<Runner(Params&)>>& builders() {
  static const std::map<std::string, std::function<Runner(Params&)>> m = {
      {"toeplitz_asymptotics", toeplitz_asymptotics},
      {"feintuch_decompose", feintuch_decompose},
      {"ess_norm", ess_norm},
      {"nehari", nehari},
      {"hsc_distance", hsc_distance},
      {"hartman_sarason", hartman_sarason},
      {"sigma_u", sigma_u},
      {"composition_dichotomy", composition_dichotomy},
      {"peripheral_sup", peripheral_sup},
      {"normal_cesaro", normal_cesaro},
      {"tauberian", tauberian},
      {"averaged_power", averaged_power},
      {"gap_check", gap_check},
  };
  return m;
}

const std::vector<std::string> kFormats = {"json", "csv", "gnuplot-dat"};

std::vector<std::string> parse_formats(const json& config) {
  if (!config.contains("formats")) return kFormats;
  const auto& f = config["formats"];
  if (!f.is_array()) throw SchemaError("/formats", "expected an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!f[i].is_string() || std::find(kFormats.begin(), kFormats.end(), f[i].get<std::string>()) == kFormats.end())
      throw SchemaError("/formats/" + std::to_string(i), "expected one of json, csv, gnuplot-dat");
    out.push_back(f[i].get<std::string>());
  }
  return out;
}

void validate_expect(const json& config) {
  if (!config.contains("expect")) return;
  const auto& e = config["expect"];
  if (!e.is_object()) throw SchemaError("/expect", "expected an object");
  for (const auto& [key, spec] : e.items()) {
    std::string escaped;
    for (char c : key) escaped += c == '~' ? "~0" : c == '/' ? "~1" : std::string(1, c);
    const std::string ptr = "/expect/" + escaped;
    try {
      (void)json::json_pointer(key);
    } catch (const json::exception&) {
      throw SchemaError(ptr, "not a JSON pointer");
    }
    if (spec.is_object()) {
      if (!spec.contains("value")) throw SchemaError(ptr + "/value", "missing field");
      if (spec.contains("tol") && !(spec["tol"].is_number() && spec["tol"].get<double>() > 0.0))
        throw SchemaError(ptr + "/tol", "must be a positive number");
    }
  }
}

bool approx_equal(const json& got, const json& want, double tol) {
  if (want.is_number() && got.is_number()) return std::abs(got.get<double>() - want.get<double>()) <= tol;
  if (want.is_array() && got.is_array()) {
    if (want.size() != got.size()) return false;
    for (std::size_t i = 0; i < want.size(); ++i)
      if (!approx_equal(got[i], want[i], tol)) return false;
    return true;
  }
  return got == want;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("malformed JSON: ") + e.what());
  }
}

} // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : statements()) k.push_back(name);
    return k;
  }();
  return kinds;
}

std::string statement_for(const std::string& kind) {
  const auto it = statements().find(kind);
  if (it == statements().end()) throw InvalidInput("unknown experiment kind '" + kind + "'");
  return it->second;
}

PreparedExperiment prepare_experiment(const json& config) {
  if (!config.is_object()) throw SchemaError("", "config must be a JSON object");
  if (!config.contains("kind")) throw SchemaError("/kind", "missing field");
  if (!config["kind"].is_string()) throw SchemaError("/kind", "expected a string");
  const std::string kind = config["kind"].get<std::string>();
  const auto it = builders().find(kind);
  if (it == builders().end()) throw SchemaError("/kind", "unknown experiment kind '" + kind + "'");
  if (config.contains("output_dir") && !config["output_dir"].is_string())
    throw SchemaError("/output_dir", "expected a string");
  (void)parse_formats(config);
  validate_expect(config);

  static const json empty = json::object();
  Params params(config.contains("params") ? config["params"] : empty, "/params");
  PreparedExperiment prep;
  prep.kind = kind;
  try {
    prep.run = it->second(params);
  } catch (const SchemaError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw SchemaError("/params", e.what());
  }
  prep.params = params.echo;
  return prep;
}

std::vector<std::string> check_expect(const json& result, const json& expect) {
  std::vector<std::string> bad;
  if (!expect.is_object()) return bad;
  for (const auto& [key, spec] : expect.items()) {
    const json::json_pointer ptr(key);
    const json want = spec.is_object() && spec.contains("value") ? spec["value"] : spec;
    const double tol = spec.is_object() && spec.contains("tol") ? spec["tol"].get<double>() : 1e-9;
    if (!result.contains(ptr)) {
      bad.push_back(key + ": missing from result");
      continue;
    }
    const json& got = result[ptr];
    if (!approx_equal(got, want, tol)) bad.push_back(key + ": expected " + want.dump() + ", got " + got.dump());
  }
  return bad;
}

RunOutcome validate_config_file(const std::filesystem::path& path) {
  RunOutcome out;
  try {
    const auto prep = prepare_experiment(load_json(path));
    out.message = path.string() + ": valid " + prep.kind + " config";
  } catch (const SchemaError& e) {
    out.code = ExitCode::input_error;
    out.message = path.string() + ": " + e.what();
  }
  return out;
}

RunOutcome run_config_file(const std::filesystem::path& path, const std::optional<std::filesystem::path>& out_dir) {
  RunOutcome out;
  json config;
  PreparedExperiment prep;
  try {
    config = load_json(path);
    prep = prepare_experiment(config);
  } catch (const SchemaError& e) {
    out.code = ExitCode::input_error;
    out.message = path.string() + ": " + e.what();
    return out;
  }

  ExperimentOutput result;
  try {
    result = prep.run();
  } catch (const std::exception& e) {
    out.code = ExitCode::input_error;
    out.message = path.string() + ": " + e.what();
    return out;
  }

  const json expect = config.contains("expect") ? config["expect"] : json::object();
  const auto mismatches = check_expect(result.report, expect);
  json report = {{"kind", prep.kind},
                 {"statement", statement_for(prep.kind)},
                 {"params", prep.params},
                 {"result", result.report},
                 {"expect", {{"checked", expect.size()}, {"mismatches", mismatches}, {"passed", mismatches.empty()}}}};

  std::filesystem::path dir = path.parent_path();
  if (config.contains("output_dir")) {
    const std::filesystem::path od = config["output_dir"].get<std::string>();
    dir = od.is_absolute() ? od : path.parent_path() / od;
  }
  if (out_dir) dir = *out_dir;
  const std::string stem = path.stem().string();
  const auto formats = parse_formats(config);
  const auto wants = [&](const std::string& f) { return std::find(formats.begin(), formats.end(), f) != formats.end(); };

  try {
    if (wants("json")) {
      const auto p = dir / (stem + ".report.json");
      io::write_atomic(p, report.dump(2) + "\n");
      out.written.push_back(p);
    }
    for (const auto& a : result.artifacts) {
      const bool csv = a.suffix.size() >= 4 && a.suffix.compare(a.suffix.size() - 4, 4, ".csv") == 0;
      if ((csv && !wants("csv")) || (!csv && !wants("gnuplot-dat"))) continue;
      const auto p = dir / (stem + a.suffix);
      io::write_atomic(p, a.content);
      out.written.push_back(p);
    }
  } catch (const std::exception& e) {
    out.code = ExitCode::input_error;
    out.message = path.string() + ": " + e.what();
    return out;
  }

  if (mismatches.empty()) {
    out.message = path.string() + ": pass (" + prep.kind + ", " + std::to_string(expect.size()) + " expectations)";
  } else {
    out.code = ExitCode::mismatch;
    std::string msg = path.string() + ": mismatch (" + prep.kind + ")";
    for (const auto& m : mismatches) msg += "\n  " + m;
    out.message = msg;
  }
  return out;
}

} // namespace opseq
