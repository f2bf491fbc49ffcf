#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <random>

#include "ikern/dual.hpp"
#include "ikern/local_zeta.hpp"
#include "ikern/padic_osc.hpp"

using namespace ikern;
using json = nlohmann::ordered_json;

namespace {

constexpr int exit_pass = 0, exit_fail = 1, exit_usage = 2, exit_budget = 3;

json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json mat(const IntMat2& m) { return json::array({m[0], m[1], m[2], m[3]}); }

struct Checks {
  json list = json::array();
  std::string first_failure;
  void add(const std::string& name, bool ok, json detail = json::object()) {
    json c;
    c["name"] = name;
    c["pass"] = ok;
    if (!detail.empty()) c["detail"] = std::move(detail);
    list.push_back(std::move(c));
    if (!ok && first_failure.empty()) first_failure = name;
  }
  bool pass() const { return first_failure.empty(); }
};

// required top-level keys per subcommand
void validate(const std::string& sub, const json& rep) {
  std::vector<std::string> keys{"subcommand", "config", "checks", "pass"};
  if (sub == "compare-sigma")
    for (const char* k : {"direct", "delta_inserted", "poisson_side", "error_budget", "truncation_report"}) keys.push_back(k);
  if (sub == "eval-main-rhs")
    for (const char* k : {"main_rhs", "reference", "error_budget", "truncation_report"}) keys.push_back(k);
  for (const auto& k : keys)
    if (!rep.contains(k)) throw std::logic_error("report for " + sub + " lacks key " + k);
}

struct Output {
  std::string out, csv;
  bool verbose = false;
};

int finish(const std::string& sub, json config, Checks checks, json body, const Output& o) {
  json rep;
  rep["subcommand"] = sub;
  rep["config"] = std::move(config);
  for (auto& [k, v] : body.items()) rep[k] = v;
  rep["checks"] = checks.list;
  rep["pass"] = checks.pass();
  if (!checks.pass()) rep["first_failure"] = checks.first_failure;
  validate(sub, rep);
  const std::string text = rep.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("cannot open " + o.out);
    f << text;
  }
  if (!checks.pass()) {
    std::cerr << sub << ": FAIL (" << checks.first_failure << ")\n";
    return exit_fail;
  }
  if (o.verbose) std::cerr << sub << ": PASS\n";
  return exit_pass;
}

void write_csv(const std::string& path, const std::string& header, const std::vector<std::string>& rows) {
  if (path.empty()) return;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << header << "\n";
  for (const auto& r : rows) f << r << "\n";
}

PlaceSet parse_places(const std::string& s) {
  if (s == "inf") return PlaceSet::archimedean;
  if (s == "inf,2" || s == "inf2") return PlaceSet::archimedean_and_2;
  throw CLI::ValidationError("--s-places", "expected inf or inf,2");
}

std::string places_name(PlaceSet s) { return s == PlaceSet::archimedean ? "inf" : "inf,2"; }

struct DeltaOpts {
  std::vector<double> q{30, 60, 120};
  double qmin = 0, qmax = 0;
  std::int64_t mmax = 5000;
  std::string places = "inf";
  double tol = 1e-12;
  double cq_q0 = 40;
  int cq_steps = 4;
};

int run_delta(const DeltaOpts& a, unsigned workers, const Output& o) {
  const PlaceSet s = parse_places(a.places);
  std::vector<double> Qs = a.q;
  if (a.qmin > 0 || a.qmax > 0) {
    if (!(a.qmin > 0 && a.qmax >= a.qmin)) throw CLI::ValidationError("--qmin/--qmax", "need 0 < qmin <= qmax");
    Qs.clear();
    for (double Q = a.qmin; Q <= a.qmax; Q *= 2) Qs.push_back(Q);
  }
  if (Qs.empty() || a.mmax < 1 || a.cq_steps < 2) throw CLI::ValidationError("verify-delta", "empty Q list, mmax or cq-steps");
  json cfg{{"q", Qs}, {"mmax", a.mmax}, {"s_places", places_name(s)}, {"tol", a.tol}, {"cq_q0", a.cq_q0},
           {"cq_steps", a.cq_steps}};
  const auto r = verify_delta(Qs, a.mmax, s, a.tol, workers);
  Checks ch;
  ch.add("delta_expansion(m) = [m = 0] over |m| <= mmax", r.max_offdiag <= a.tol && r.max_diag_error <= a.tol,
         {{"max_offdiag", num(r.max_offdiag)}, {"max_diag_error", num(r.max_diag_error)}, {"worst_m", r.worst_m},
          {"worst_q", r.worst_Q}});
  ch.add("telescoping witness multisets agree", r.witness_ok);
  json rows = json::array();
  bool cq_ok = true;
  for (const auto& row : c_q_convergence(a.cq_q0, a.cq_steps, s)) {
    rows.push_back({{"q", row.Q}, {"deviation", num(static_cast<double>(row.deviation))},
                    {"ratio_to_previous", num(row.ratio_to_previous)}});
    if (row.ratio_to_previous != 0 && !(row.ratio_to_previous <= 0.125)) cq_ok = false;
  }
  ch.add("|c_Q(2Q) - 1| <= |c_Q(Q) - 1| / 8", cq_ok, {{"rows", rows}});
  return finish("verify-delta", cfg, ch, json::object(), o);
}

struct LocalOpts {
  std::int64_t p = 3;
  int n = 2;
  int cases = 50;
  std::uint64_t seed = 1;
  std::int64_t budget = default_enumeration_budget;
};

int run_local(const LocalOpts& a, unsigned workers, const Output& o) {
  if (!is_prime(a.p) || a.p == 2) throw CLI::ValidationError("--p", "need an odd prime");
  if (a.n < 1 || a.cases < 1) throw CLI::ValidationError("verify-local", "need n >= 1 and cases >= 1");
  json cfg{{"p", a.p}, {"n", a.n}, {"cases", a.cases}, {"seed", a.seed}, {"budget", a.budget}};
  PAdicContext ctx(a.p, a.n);
  std::mt19937_64 rng(a.seed);
  std::uniform_int_distribution<std::int64_t> e(0, ctx.pn - 1);
  Checks ch;
  json cases = json::array();
  std::vector<std::string> csv;
  for (int t = 1; t <= a.n; ++t) {
    bool all = true;
    for (int i = 0; i < a.cases; ++i) {
      const ResidueMat2 g(ctx, e(rng), e(rng), e(rng), e(rng));
      std::int64_t x;
      do x = e(rng);
      while (!ctx.is_unit(x));
      const PhaseData ph(ctx, g, x, t);
      const auto bf = brute_force_integral(ph, a.budget, workers), cf = closed_form_integral(ph);
      const bool eq = bf == cf;
      all = all && eq;
      cases.push_back({{"t_exp", t}, {"x", x}, {"gamma0", mat(g.entries())}, {"equal", eq}, {"value", cf.str()}});
      csv.push_back(std::to_string(t) + "," + std::to_string(x) + "," + (eq ? "1" : "0") + ",\"" + cf.str() + "\"");
    }
    ch.add("brute force = closed form at tExp = " + std::to_string(t), all);
  }
  const CycloRational one(1, mpq_class(1));
  ch.add("Gauss factor = 1", gauss_factor(PAdicContext(a.p, 1), 1) == one);
  const std::int64_t p = a.p, sc = singular_count(p);
  ch.add("singular count = p^4 - (p^2 - 1)(p^2 - p)", sc == p * p * p * p - (p * p - 1) * (p * p - p), {{"count", sc}});
  write_csv(o.csv, "t_exp,x,equal,value", csv);
  return finish("verify-local", cfg, ch, {{"cases", cases}}, o);
}

struct ZetaOpts {
  std::int64_t p = 3;
  int m = 2;
  std::string method = "closed";
  int cases = 4;
  std::int64_t b1 = 1, b2 = 2;
  std::uint64_t seed = 1;
  std::int64_t budget = default_enumeration_budget;
};

int run_zeta(const ZetaOpts& a, unsigned workers, const Output& o) {
  if (!is_prime(a.p) || a.p == 2) throw CLI::ValidationError("--p", "need an odd prime");
  if (a.m < 1 || a.cases < 0) throw CLI::ValidationError("verify-zeta", "need m >= 1 and cases >= 0");
  LhsMethod method;
  if (a.method == "closed")
    method = LhsMethod::closed_form;
  else if (a.method == "fiber")
    method = LhsMethod::fiber;
  else if (a.method == "brute")
    method = LhsMethod::brute_force;
  else
    throw CLI::ValidationError("--method", "expected closed, fiber or brute");
  json cfg{{"p", a.p}, {"m", a.m}, {"method", a.method}, {"cases", a.cases}, {"b1", a.b1}, {"b2", a.b2},
           {"seed", a.seed}, {"budget", a.budget}};
  const PAdicContext ctx(a.p, 2 * a.m);
  auto make = [&](std::int64_t b1, std::int64_t b2, const IntMat2& g1, const IntMat2& g2) {
    return LocalInput(ctx, b1, b2, ResidueMat2(ctx, g1[0], g1[1], g1[2], g1[3]), ResidueMat2(ctx, g2[0], g2[1], g2[2], g2[3]));
  };
  const std::int64_t p = a.p;
  const IntMat2 I{1, 0, 0, 1}, pI{p, 0, 0, p};
  struct Case {
    std::string label;
    std::int64_t b1, b2;
    IntMat2 g1, g2;
  };
  std::vector<Case> cs{{"(I, I)", a.b1, a.b2, I, I}, {"(I, pI)", a.b1, a.b2, I, pI}, {"(pI, pI)", a.b1, a.b2, pI, pI},
                       {"P = 0", 2, 2, {1, 1, 0, 1}, I}};
  std::mt19937_64 rng(a.seed);
  std::uniform_int_distribution<std::int64_t> e(-50, 50);
  for (int i = 0; i < a.cases; ++i)
    cs.push_back({"random " + std::to_string(i), a.b1, a.b2, {e(rng), e(rng), e(rng), e(rng)}, {e(rng), e(rng), e(rng), e(rng)}});
  Checks ch;
  json rows = json::array();
  std::vector<std::string> csv;
  for (const auto& c : cs) {
    const auto inp = make(c.b1, c.b2, c.g1, c.g2);
    const auto r = compare_local_series(inp, a.m, method, a.budget, workers);
    json d{{"b", {c.b1, c.b2}}, {"gamma1", mat(c.g1)}, {"gamma2", mat(c.g2)}};
    if (!r.mismatches.empty())
      d["first_mismatch"] = {{"n", r.mismatches[0].n}, {"lhs", r.mismatches[0].lhs}, {"rhs", r.mismatches[0].rhs}};
    ch.add("lhs series = rhs series, " + c.label, r.equal, d);
    for (int n = 0; n <= a.m; ++n)
      for (const auto& [w, v] : r.lhs.row(n)) {
        rows.push_back({{"case", c.label}, {"n", n}, {"omega_degree", w}, {"coefficient", v.str()}});
        csv.push_back("\"" + c.label + "\"," + std::to_string(n) + "," + std::to_string(w) + ",\"" + v.str() + "\"");
      }
  }
  // the P = 0 row is the full geometric factor (1 - q^-5 u) / (1 - q^-4 u) up to the order
  {
    const auto r = rhs_series(make(2, 2, {1, 1, 0, 1}, I), a.m);
    const mpq_class q4 = inverse_power(p, 4), q5 = inverse_power(p, 5);
    bool ok = r.coeff(0, 0) == CycloRational(1, mpq_class(1));
    mpq_class w = q4;
    for (int n = 1; n <= a.m; ++n, w *= q4) ok = ok && r.coeff(n, n) == CycloRational(1, mpq_class(w - w / q4 * q5));
    ch.add("P = 0 reproduces the geometric factor", ok);
  }
  {
    const int M = std::min(a.m, 2);
    const PAdicContext c2(p, M);
    bool ok = true;
    for (std::int64_t k = 1; k < p - 1; ++k) {
      const auto s = lhs_series(make(a.b1, a.b2, I, {1, 1, 0, 2}), M, LhsMethod::fiber, FiniteCharacter::ramified(c2, k),
                                a.budget, workers);
      for (int n = 0; n <= M; ++n) ok = ok && s.row(n).empty();
    }
    ch.add("ramified character gives the zero series", ok);
  }
  write_csv(o.csv, "case,n,omega_degree,coefficient", csv);
  return finish("verify-zeta", cfg, ch, {{"coefficients", rows}}, o);
}

struct VanishOpts {
  int m = 6;
  int scan_radius = 25, scan_arg = 20, scan_phi = 20;
  double scan_delta = 0.05;
};

int run_vanishing(const VanishOpts& a, unsigned workers, const Output& o) {
  if (a.m < 3) throw CLI::ValidationError("--m", "histogram precision must be at least 3");
  json cfg{{"m", a.m}, {"scan", {a.scan_radius, a.scan_arg, a.scan_phi}}, {"scan_delta", a.scan_delta}};
  Checks ch;
  json body;
  const auto f = GlobalTestFunction::standard();
  std::vector<mpq_class> b2;
  for (int j = -2; j <= 4; ++j)
    for (int s : {1, -1}) b2.push_back(power_of_two(j) * s);
  std::vector<int> vt;
  for (int v = -2; v <= 3; ++v) vt.push_back(v);
  const auto s0 = sigma0_vanishing_check(f, b2, vt, a.m);
  std::int64_t nonempty = 0;
  for (const auto& r : s0.weighted) nonempty += !r.empty;
  ch.add("Sigma_0 local integrals vanish exactly", s0.pass,
         {{"plain", s0.plain.get_str()}, {"weighted_rows", s0.weighted.size()}, {"nonempty_rows", nonempty}});
  for (std::int64_t p : {2, 3}) {
    const auto h = hecke_mass_check(hecke_A_function(p));
    ch.add("Hecke function mass zero and bi-invariant at p = " + std::to_string(p), h.pass,
           {{"coset_count", h.coset_count}, {"coset_formula", h.coset_formula}, {"support_count", h.support_count},
            {"signed_sum", h.signed_sum}, {"bi_invariant", h.bi_invariant}});
  }
  ch.add("coset count at p = 2 is 7", hecke_coset_count(2, 2) == 7);
  for (double q : {2.0, 3.0}) {
    const auto s = eigenvalue_nonvanishing_scan(q, a.scan_radius, a.scan_arg, a.scan_phi, a.scan_delta);
    ch.add("eigenvalue nonvanishing on the generic grid, q = " + std::to_string(static_cast<int>(q)), s.pass,
           {{"points", s.points}, {"min_abs", num(s.min_abs)}});
  }
  const auto sv = support_vanishing_check(3, 1, 1, {1, 0, 0, 1}, {1, 1, 0, 2}, 1, 3, 1, 1, workers);
  ch.add("local integral vanishes beyond the support radius", sv.pass,
         {{"support_k", sv.support_k}, {"radius", sv.radius}, {"ramified_zero", sv.ramified_zero}});
  return finish("verify-vanishing", cfg, ch, json::object(), o);
}

struct DecayOpts {
  double eps = 0.5;
  double n_test = 6;
  std::int64_t budget = 1 << 22;
  bool lattice = false;
};

int run_decay(const DecayOpts& a, unsigned workers, const Output& o) {
  if (!(a.eps > 0 && a.eps < 1) || a.budget < 1) throw CLI::ValidationError("decay-report", "need 0 < eps < 1, budget >= 1");
  json cfg{{"eps", a.eps}, {"n_test", a.n_test}, {"budget", a.budget}, {"lattice", a.lattice}};
  const CriticalExample ex;
  DecayConfig dc;
  dc.eps = a.eps;
  dc.N_test = a.n_test;
  QuadratureSpec qs;
  qs.budget = a.budget;
  qs.workers = workers;
  if (a.lattice) qs.method = QuadratureSpec::Method::low_discrepancy;
  const auto r = decay_report(ex.f, DeltaConfig::standard(1).W, ex.b, ex.gamma, dc, qs);
  auto rows = [](const std::vector<DecayRow>& v, const std::string& tag, std::vector<std::string>& csv) {
    json out = json::array();
    for (const auto& d : v) {
      out.push_back({{"parameter", d.parameter}, {"magnitude", num(d.magnitude)}, {"error", num(d.error)},
                     {"usable", d.usable}, {"exact_zero", d.exact_zero}});
      std::ostringstream s;
      s.precision(17);
      s << tag << "," << d.parameter << "," << d.magnitude << "," << d.error << "," << d.usable << "," << d.exact_zero;
      csv.push_back(s.str());
    }
    return out;
  };
  std::vector<std::string> csv;
  json body{{"small_t", rows(r.small_t, "small_t", csv)},
            {"large_t", rows(r.large_t, "large_t", csv)},
            {"large_gamma", rows(r.large_gamma, "large_gamma", csv)},
            {"support_radius", num(r.support_radius)}};
  Checks ch;
  ch.add("small-|t| exponent >= 4 - eps", r.small_t_exponent >= 4 - a.eps, {{"exponent", num(r.small_t_exponent)}});
  ch.add("exact vanishing beyond the support radius", r.large_t_pass, {{"exponent", num(r.large_t_exponent)}});
  ch.add("large-|gamma| exponent >= N_test", r.large_gamma_pass, {{"exponent", num(r.large_gamma_exponent)}});
  write_csv(o.csv, "series,parameter,magnitude,error,usable,exact_zero", csv);
  return finish("decay-report", cfg, ch, body, o);
}

struct SigmaOpts {
  double x = 50;
  std::int64_t budget = 20'000'000;
  int trunc_gamma = 2;
  int trunc_c = 5;
  int ratio_gamma = 0;
  double tolerance = 0.05;
};

int run_compare(const SigmaOpts& a, unsigned, const Output& o) {
  if (!(a.x >= 1) || a.budget < 1 || a.trunc_gamma < 0 || a.trunc_c < 2 || a.ratio_gamma < 0)
    throw CLI::ValidationError("compare-sigma", "need x >= 1, budget >= 1, trunc-gamma >= 0, trunc-c >= 2");
  json cfg{{"x", a.x}, {"budget", a.budget}, {"trunc_gamma", a.trunc_gamma}, {"trunc_c", a.trunc_c},
           {"ratio_gamma", a.ratio_gamma}, {"tolerance", a.tolerance}};
  const auto f = GlobalTestFunction::standard();
  const auto sp = SigmaParams::standard(a.x, f);
  const auto d = direct_sigma(sp, f, a.budget), e = delta_inserted_sigma(sp, f, false, a.budget);
  PoissonTruncation tr;
  tr.gamma_radius = a.trunc_gamma;
  tr.ratio_gamma_radius = a.ratio_gamma;
  tr.max_dyadic = a.trunc_c;
  tr.tolerance = a.tolerance;
  tr.budget = a.budget;
  const auto p = poisson_side_sigma(sp, f, tr);
  const double gap_de = std::abs(d.value - e.value), gap_dp = std::abs(d.value - p.value);
  Checks ch;
  ch.add("nonempty support", !p.empty_support && d.det_pairs > 0);
  ch.add("|direct - delta_inserted| <= 1e-9 (1 + |direct|)", gap_de <= 1e-9 * (1 + std::abs(d.value)),
         {{"difference", num(gap_de)}});
  ch.add("poisson_side within its declared budget", !p.flagged, {{"error_budget", num(p.error_budget)}});
  ch.add("|direct - poisson_side| <= tolerance |direct|", gap_dp <= a.tolerance * std::abs(d.value),
         {{"difference", num(gap_dp)}, {"relative", num(gap_dp / std::abs(d.value))}});
  json body{
      {"direct", {{"value", num(d.value)}, {"lattice_points", d.lattice_points}, {"det_pairs", d.det_pairs}}},
      {"delta_inserted", {{"value", num(e.value)}, {"error", num(e.error)}}},
      {"poisson_side",
       {{"value", num(p.value)}, {"weight_of_t_part", num(p.part_weight_of_t)}, {"ratio_part", num(p.part_ratio)},
        {"flagged", p.flagged}}},
      {"error_budget",
       {{"total", num(p.error_budget)}, {"quadrature", num(p.quadrature_error)}, {"tail_weight_of_t", num(p.tail_weight_of_t)},
        {"tail_ratio", num(p.tail_ratio)}, {"omitted_moduli", num(p.omitted_bound)}}},
      {"truncation_report",
       {{"gamma_radius", a.trunc_gamma}, {"ratio_gamma_radius", a.ratio_gamma}, {"max_dyadic_valuation", a.trunc_c},
        {"decay_exponent", tr.decay_exponent}, {"moduli_weight_of_t", p.d_weight_of_t}, {"moduli_ratio", p.d_ratio},
        {"moduli_omitted", p.d_omitted}, {"dual_terms", p.dual_terms}, {"c_q_minus_1", num(p.c_q_minus_1)},
        {"Q", sp.Q}}}};
  return finish("compare-sigma", cfg, ch, body, o);
}

struct MainOpts {
  double x = 100;
  double trunc_gamma = 0.5;
  std::int64_t trunc_c = 3;
  std::int64_t max_ratio_terms = 4;
  int max_shell = 5;
  int t_nodes = 6;
  std::int64_t budget = 5'000'000;
  double tolerance = 0.10;
};

int run_main_rhs(const MainOpts& a, unsigned, const Output& o) {
  if (!(a.x >= 1) || a.trunc_gamma < 0 || a.trunc_c < 1 || a.max_ratio_terms < 0 || a.max_shell < 3 || a.t_nodes < 1)
    throw CLI::ValidationError("eval-main-rhs", "invalid truncation");
  json cfg{{"x", a.x},           {"trunc_gamma", a.trunc_gamma}, {"trunc_c", a.trunc_c}, {"max_ratio_terms", a.max_ratio_terms},
           {"max_shell", a.max_shell}, {"t_nodes", a.t_nodes}, {"budget", a.budget},   {"tolerance", a.tolerance}};
  const auto f = GlobalTestFunction::standard();
  MainTruncation tr;
  tr.gamma_radius = a.trunc_gamma;
  tr.c_max = a.trunc_c;
  tr.max_ratio_terms = a.max_ratio_terms;
  tr.budget = a.budget;
  tr.tolerance = a.tolerance;
  tr.integral.max_shell = a.max_shell;
  tr.integral.t_nodes = a.t_nodes;
  const auto m = main_theorem_rhs(SigmaParams::standard(1, f), f, tr);
  const auto d = direct_sigma(SigmaParams::standard(a.x, f), f);
  const double ref = m.normalization * d.value, gap = std::abs(m.value - ref);
  Checks ch;
  ch.add("main-term sum within its declared budget", !m.flagged, {{"error_budget", num(m.error_budget)}});
  ch.add("|rhs - normalization direct| <= tolerance |normalization direct|", gap <= a.tolerance * std::abs(ref),
         {{"difference", num(gap)}, {"relative", num(gap / std::abs(ref))}});
  json body{{"label", "truncated desk-scale consistency check"},
            {"main_rhs", {{"value", num(m.value)}, {"flagged", m.flagged}}},
            {"reference",
             {{"direct", num(d.value)}, {"zeta_S_2", num(m.zeta_S_2)}, {"V1_mellin_at_1", num(m.V1_mellin)},
              {"normalization", num(m.normalization)}, {"value", num(ref)}}},
            {"error_budget",
             {{"total", num(m.error_budget)}, {"quadrature", num(m.quadrature_error)}, {"tail", num(m.tail)},
              {"omitted_ratio_terms", num(m.omitted)}}},
            {"truncation_report",
             {{"gamma_radius", a.trunc_gamma}, {"c_max", a.trunc_c}, {"gamma_pairs", m.gamma_pairs}, {"terms", m.terms},
              {"ratio_terms", m.ratio_terms}, {"ratio_omitted", m.ratio_omitted}, {"decay_exponent", tr.decay_exponent}}}};
  return finish("eval-main-rhs", cfg, ch, body, o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification harness for the kernel-function identities"};
  app.set_config("--config", "", "TOML or INI parameter file");
  app.require_subcommand(1);
  Output out;
  unsigned workers = 0;
  app.add_option("--workers", workers, "worker threads (0: IKERN_WORKERS or hardware)");
  app.add_flag("-v,--verbose", out.verbose);
  auto common = [&](CLI::App* s) {
    s->add_option("--out", out.out, "JSON report path (default stdout)");
    s->add_option("--csv", out.csv, "CSV table path");
  };

  DeltaOpts da;
  auto* sd = app.add_subcommand("verify-delta", "delta-symbol exactness and c_Q convergence");
  sd->add_option("--q", da.q, "Q values")->delimiter(',');
  sd->add_option("--qmin", da.qmin);
  sd->add_option("--qmax", da.qmax);
  sd->add_option("--mmax", da.mmax);
  sd->add_option("--s-places", da.places, "inf or inf,2");
  sd->add_option("--tol", da.tol);
  sd->add_option("--cq-q0", da.cq_q0);
  sd->add_option("--cq-steps", da.cq_steps);
  common(sd);

  LocalOpts la;
  auto* sl = app.add_subcommand("verify-local", "p-adic stationary phase against brute force");
  sl->add_option("--p", la.p);
  sl->add_option("--n", la.n, "largest tExp");
  sl->add_option("--cases", la.cases, "random cases per tExp");
  sl->add_option("--seed", la.seed);
  sl->add_option("--budget", la.budget);
  common(sl);

  ZetaOpts za;
  auto* sz = app.add_subcommand("verify-zeta", "local zeta series identity");
  sz->add_option("--p", za.p);
  sz->add_option("--m", za.m, "truncation order");
  sz->add_option("--method", za.method, "closed, fiber or brute");
  sz->add_option("--cases", za.cases, "random cases");
  sz->add_option("--b1", za.b1);
  sz->add_option("--b2", za.b2);
  sz->add_option("--seed", za.seed);
  sz->add_option("--budget", za.budget);
  common(sz);

  VanishOpts va;
  auto* sv = app.add_subcommand("verify-vanishing", "Sigma_0, Hecke and support vanishing checks");
  sv->add_option("--m", va.m, "dyadic histogram precision");
  sv->add_option("--scan-radius", va.scan_radius);
  sv->add_option("--scan-arg", va.scan_arg);
  sv->add_option("--scan-phi", va.scan_phi);
  sv->add_option("--scan-delta", va.scan_delta);
  common(sv);

  DecayOpts ka;
  auto* sk = app.add_subcommand("decay-report", "archimedean decay exponents");
  sk->add_option("--eps", ka.eps);
  sk->add_option("--n-test", ka.n_test);
  sk->add_option("--budget", ka.budget, "lattice-rule points");
  sk->add_flag("--lattice", ka.lattice, "use the lattice rule instead of the factored route");
  common(sk);

  SigmaOpts ca;
  auto* sc = app.add_subcommand("compare-sigma", "direct, delta-inserted and Poisson-side Sigma(X)");
  sc->add_option("--x", ca.x);
  sc->add_option("--budget", ca.budget);
  sc->add_option("--trunc-gamma", ca.trunc_gamma, "dual radius of the W(d/Q) part");
  sc->add_option("--trunc-c", ca.trunc_c, "largest 2-adic valuation of the modulus in the ratio part");
  sc->add_option("--ratio-gamma", ca.ratio_gamma, "dual radius of the ratio part");
  sc->add_option("--tolerance", ca.tolerance);
  common(sc);

  MainOpts ma;
  auto* sm = app.add_subcommand("eval-main-rhs", "truncated main-term sum against Sigma(X)");
  sm->add_option("--x", ma.x);
  sm->add_option("--trunc-gamma", ma.trunc_gamma, "radius of c gamma");
  sm->add_option("--trunc-c", ma.trunc_c, "largest odd c");
  sm->add_option("--max-ratio-terms", ma.max_ratio_terms);
  sm->add_option("--max-shell", ma.max_shell);
  sm->add_option("--t-nodes", ma.t_nodes);
  sm->add_option("--budget", ma.budget);
  sm->add_option("--tolerance", ma.tolerance);
  common(sm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (*sd) return run_delta(da, workers, out);
    if (*sl) return run_local(la, workers, out);
    if (*sz) return run_zeta(za, workers, out);
    if (*sv) return run_vanishing(va, workers, out);
    if (*sk) return run_decay(ka, workers, out);
    if (*sc) return run_compare(ca, workers, out);
    if (*sm) return run_main_rhs(ma, workers, out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const precondition_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const budget_exceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return exit_budget;
  }
  return exit_usage;
}
