#include "strataform/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "strataform/models.hpp"
#include "strataform/moser.hpp"
#include "strataform/report.hpp"

namespace strataform {
namespace io {

namespace {

unsigned default_seed() {
  if (const char* env = std::getenv("STRATAFORM_SEED")) return static_cast<unsigned>(std::atol(env));
  return 1;
}

Manifest load_input(const std::string& model, const std::string& manifest_path) {
  if (!model.empty() && !manifest_path.empty())
    throw std::invalid_argument("pass either --model or --manifest, not both");
  if (!model.empty()) return models::load(model);
  if (!manifest_path.empty()) {
    std::ifstream in(manifest_path);
    if (!in) throw std::invalid_argument("cannot open manifest file '" + manifest_path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
  }
  throw std::invalid_argument("a --model or --manifest input is required");
}

RatVec point_of(const Manifest& m, const std::string& override_csv, const ChartPtr& chart) {
  if (!override_csv.empty()) {
    RatVec x(chart->dim());
    std::stringstream ss(override_csv);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
      if (i >= chart->dim()) throw std::invalid_argument("too many point coordinates");
      x(i++) = Rat::parse(tok);
    }
    if (i != chart->dim()) throw std::invalid_argument("too few point coordinates");
    return x;
  }
  for (auto& [name, entry] : m.points)
    if (*m.chart(entry.first) == *chart) return entry.second;
  return rat_zero(chart->dim(), 1).col(0);
}

// The polarization of the model built from its declared frame (or from the
// null distribution on the unit box when no frame is declared).
foliation::Polarization model_polarization(const Manifest& m, const std::string& form_name) {
  stratify::FormField w = m.form_field(form_name);
  foliation::FrameDistribution F;
  bool have = false;
  for (auto& [name, entry] : m.frames) {
    if (!(*m.chart(entry.first) == *w.chart())) continue;
    F.chart = w.chart();
    F.frame = entry.second;
    F.rank = static_cast<int>(entry.second.size());
    have = true;
    break;
  }
  if (!have) F = foliation::null_distribution(w, stratify::Box::cube(w.dim(), -1, 1));
  RatVec base = point_of(m, "", w.chart());
  return foliation::polarization_complement(w, F, base);
}

std::string first_form_name(const Manifest& m) {
  if (m.forms.empty()) throw std::invalid_argument("manifest declares no forms");
  return m.forms.begin()->first;
}

int cmd_dims(int N, std::ostream& out) {
  Report rep("dims");
  rep.set("N", N);
  auto bounds = skew::admissible_bounds(N);
  rep.set("printed_radical_bound", bounds.printed_radical);
  rep.set("codim_radical_bound", bounds.codim_radical);
  for (int m = 0; m <= N; ++m) {
    rep.section("m" + std::to_string(m));
    auto d = skew::stratum_dim(N, m);
    rep.set("dim", d.value);
    rep.set("codim", skew::stratum_codim(N, m));
    rep.set("empty", d.empty);
    rep.set("admissible", skew::nullity_admissible(N, m));
  }
  out << rep.text();
  return 0;
}

int cmd_stratify(const Manifest& m, const std::string& form, double box_lo, double box_hi,
                 int samples, unsigned seed, std::ostream& out) {
  stratify::FormField w = m.form_field(form.empty() ? first_form_name(m) : form);
  auto box = stratify::Box::cube(w.dim(), box_lo, box_hi);
  stratify::NicenessReport rep = stratify::niceness_report(w, box, samples, seed);
  Report r("stratify");
  r.set("form", form.empty() ? first_form_name(m) : form);
  r.set("samples", samples);
  r.set("seed", static_cast<long>(seed));
  r.set("nice", rep.nice);
  for (auto& e : rep.strata) {
    r.section("stratum_m" + std::to_string(e.m));
    r.set("count", e.count);
    r.set("admissible", e.admissible);
    r.set("expected_dim", e.expected_dim);
    r.set("measured_local_dim", e.measured_local_dim);
    r.set("transversal_points", e.transversal_points);
    r.set("checked_points", e.checked_points);
    r.set("frontier_evidence", e.frontier_evidence);
  }
  for (auto& wmsg : rep.warnings) r.warn(wmsg);
  out << r.text();
  return 0;
}

int cmd_whitney(const std::string& model, double tol, unsigned seed, std::ostream& out) {
  Report r("whitney");
  r.set("model", model);
  r.set("tol", tol);
  r.set("seed", static_cast<long>(seed));
  stratify::WhitneyConfig cfg;
  cfg.tol = tol;
  cfg.seed = seed;
  stratify::WhitneyReport rep;
  if (model == "cusp") {
    auto amb = Chart::make({"x", "y", "t"});
    auto par2 = Chart::make({"s", "t"});
    auto par1 = Chart::make({"u"});
    Poly s = Poly::variable(2, 0), t = Poly::variable(2, 1);
    PolyMap surf{par2, amb, {s * s - t * t, s * s * s - s * t * t, t}};
    PolyMap axis{par1, amb, {Poly(1), Poly(1), Poly::variable(1, 0)}};
    stratify::ExplicitStratum lower{axis, Eigen::VectorXd::Zero(1), {}};
    stratify::ExplicitStratum higher{surf, Eigen::VectorXd::Zero(2), {}};
    rep = stratify::whitney_check(lower, higher, Eigen::VectorXd::Zero(3), cfg);
  } else {
    Manifest m = models::load(model);
    stratify::FormField w = m.form_field(first_form_name(m));
    Eigen::VectorXd y(4);
    y << 0.0, 0.25, 0.125, -0.375;
    if (w.dim() != 4) throw std::invalid_argument("whitney: expected a 4-dimensional model");
    stratify::ImplicitStratum lower{&w, 2};
    stratify::ImplicitStratum higher{&w, 0};
    rep = stratify::whitney_check(lower, higher, y, cfg);
  }
  r.set("condition_a", stratify::verdict_str(rep.condition_a));
  r.set("condition_b", stratify::verdict_str(rep.condition_b));
  r.set("sequences", rep.records.size());
  out << r.text();
  return 0;
}

int cmd_realize(int N, int count, unsigned seed, std::ostream& out) {
  std::mt19937_64 rng(seed);
  int ok = 0;
  for (int i = 0; i < count; ++i) {
    skew::SkewForm q = skew::random_skew(rng, N);
    RatVec x0(N);
    for (int j = 0; j < N; ++j) x0(j) = skew::random_rat(rng);
    stratify::FormField f = stratify::realize_form_at_point(q, x0);
    if (f.closed() && f.eval(x0) == q.matrix()) ++ok;
  }
  Report r("realize");
  r.set("N", N);
  r.set("count", count);
  r.set("seed", static_cast<long>(seed));
  r.set("exact_realizations", ok);
  r.set("pass", ok == count);
  out << r.text();
  return ok == count ? 0 : 1;
}

int cmd_gotay(const std::string& model, int fiber_order, std::ostream& out) {
  Manifest m = models::load(model);
  foliation::Polarization P = model_polarization(m, first_form_name(m));
  foliation::GotayForm g = foliation::gotay_form(P, fiber_order);
  Report r("gotay");
  r.set("model", model);
  r.set("split_chart_dim", g.split_chart->dim());
  r.set("fiber_count", g.split_chart->fiber_count());
  r.set("form", print_form(g.form.form()));
  r.set("closed", g.form.closed());
  r.set("nondegenerate_at_base", true);
  out << r.text();
  return 0;
}

int cmd_linf_verify(const std::string& model, int arity, int trials, unsigned seed, int d_base,
                    int d_fiber, std::ostream& out) {
  Manifest m = models::load(model);
  foliation::Polarization P = model_polarization(m, first_form_name(m));
  linf::VData V = linf::build_vdata(foliation::gotay_form(P, d_fiber), d_base, d_fiber);
  linf::LinfStructure L = linf::make_structure(V);
  linf::VerifyReport rep = linf::linf_verify(L, arity, trials, seed);
  bool strict = linf::strictness_check(L);
  Report r("linf-verify");
  r.set("model", model);
  r.set("arity", arity);
  r.set("trials", trials);
  r.set("seed", static_cast<long>(seed));
  r.set("orders", std::to_string(d_base) + "," + std::to_string(d_fiber));
  r.set("strict", strict);
  r.set("l1_square_zero", rep.l1_square_ok);
  r.set("jacobi_identities", rep.passed ? "PASS" : "FAIL");
  r.set("jacobiator_matches_defect", rep.jacobiator_matches);
  if (!rep.passed) {
    r.set("first_failure_arity", rep.first_failure_arity);
    r.set("witness", rep.witness);
  }
  out << r.text();
  return rep.passed && strict ? 0 : 1;
}

int cmd_mc(const std::string& model, const std::string& sigma_expr, int arity, int d_base,
           int d_fiber, std::ostream& out) {
  Manifest m = models::load(model);
  foliation::Polarization P = model_polarization(m, first_form_name(m));
  linf::VData V = linf::build_vdata(foliation::gotay_form(P, d_fiber), d_base, d_fiber);
  linf::LinfStructure L = linf::make_structure(V);
  // sigma as a leafwise 1-form written with the base-chart differentials.
  PolyForm s = parse_form_expr(sigma_expr, P.omega.chart());
  if (!s.is_zero() && s.degree() != 1)
    throw std::invalid_argument("mc: sigma must be a 1-form");
  linf::FoliationForm leaf{P.omega.chart(), V.gotay.f_coords, PolyForm(P.omega.chart(), 1)};
  for (auto& [idx, c] : s.comps()) {
    if (std::find(V.gotay.f_coords.begin(), V.gotay.f_coords.end(), idx[0]) ==
        V.gotay.f_coords.end())
      throw std::invalid_argument("mc: sigma must use leaf differentials only");
    leaf.form.add_term(idx, c);
  }
  linf::McResult res = linf::mc_series(L, linf::to_abelian(V, leaf), arity);
  Report r("mc");
  r.set("model", model);
  r.set("sigma", sigma_expr);
  r.set("arity", arity);
  r.set("coisotropic_to_order", res.coisotropic_to_order);
  out << r.text();
  return 0;
}

int cmd_connection(const std::string& model, const std::string& point_csv, std::ostream& out) {
  Manifest m = models::load(model);
  stratify::FormField w = m.form_field(first_form_name(m));
  RatVec x = point_of(m, point_csv, w.chart());
  foliation::ConnectionResult res =
      foliation::special_connection(w, x, rat_identity(w.dim()));
  Report r("connection");
  r.set("model", model);
  r.set("flat_at_point", res.flat_at_point);
  r.set("residual_entries", res.residual.size());
  int i = 0;
  for (auto& e : res.residual) {
    r.section("residual" + std::to_string(i++));
    r.set("k", e.k);
    r.set("i", e.i);
    r.set("j", e.j);
    r.set("value", e.value);
    r.set("k_in_kernel", e.k_in_kernel);
  }
  out << r.text();
  return 0;
}

int cmd_moser(const std::string& family_name, int steps, int samples, unsigned seed, double tol,
              const std::string& csv_path, bool convergence, std::ostream& out) {
  moser::FormFamily fam;
  stratify::Box box = stratify::Box::cube(2, -1, 1);
  if (family_name == "analytic2d") {
    fam = moser::analytic_family_2d();
  } else if (family_name == "glue4d") {
    fam = moser::glue_family_4d(1.0, 1.0);
    box = stratify::Box::cube(4, -1, 1);
  } else if (family_name == "interp4d") {
    Manifest m = models::load("model4d");
    stratify::FormField w = m.form_field("omega");
    auto tube = foliation::TubeSystem::model(w.chart(), {0});
    fam = moser::interpolate_forms(w, tube, {2, 3}).family;
    box = stratify::Box::cube(4, -1, 1);
  } else {
    throw std::invalid_argument("unknown family '" + family_name +
                                "' (analytic2d, glue4d, interp4d)");
  }
  Report r("moser");
  r.set("family", fam.name);
  r.set("steps", steps);
  r.set("samples", samples);
  r.set("seed", static_cast<long>(seed));
  r.set("tol", tol);
  int code = 0;
  moser::FlowResult res;
  if (convergence) {
    moser::ConvergenceEvidence ev = moser::moser_convergence(fam, box, samples, steps, seed);
    res = ev.fine;
    r.set("coarse_residual", ev.coarse.max_residual);
    r.set("fine_residual", ev.fine.max_residual);
    r.set("improvement", ev.improvement);
  } else {
    res = moser::moser_solve(fam, box, samples, steps, seed, tol);
  }
  r.set("max_residual", res.max_residual);
  r.set("offblock_residual", res.max_offblock_residual);
  r.set("flagged", res.residual_flagged);
  if (res.residual_flagged) code = 1;
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::invalid_argument("cannot open csv path '" + csv_path + "'");
    csv << "t";
    for (int i = 0; i < fam.chart->dim(); ++i) csv << "," << fam.chart->name(i);
    csv << "\n";
    for (auto& [t, x] : res.first_trajectory) {
      csv << t;
      for (int i = 0; i < x.size(); ++i) csv << "," << x(i);
      csv << "\n";
    }
    r.set("csv", csv_path);
  }
  out << r.text();
  return code;
}

int cmd_gauge(const std::string& model, const std::string& xi_expr, int steps, int d_base,
              int d_fiber, std::ostream& out) {
  Manifest m = models::load(model);
  foliation::Polarization P = model_polarization(m, first_form_name(m));
  linf::VData V = linf::build_vdata(foliation::gotay_form(P, d_fiber), d_base, d_fiber);
  JetMVec xi(V.chart(), 1);
  if (xi_expr != "0") {
    PolyMVec parsed = parse_vector_expr(xi_expr, V.chart());
    xi = to_jets(parsed, V.ctx);
  }
  JetMVec delta0 = V.poisson;
  moser::GaugeResult res = moser::gauge_flow(V, xi, delta0, steps);
  Report r("gauge");
  r.set("model", model);
  r.set("xi", xi_expr);
  r.set("steps", steps);
  double worst_a = 0;
  for (double a : res.a_norm_profile) worst_a = std::max(worst_a, a);
  r.set("a_profile_max", worst_a);
  r.set("ker_preserved", res.ker_preserved);
  if (!res.ker_preserved) r.set("ker_witness", res.ker_witness);
  out << r.text();
  return (worst_a == 0.0 && res.ker_preserved) ? 0 : 1;
}

int cmd_glue(const std::string& model, std::ostream& out) {
  if (model != "model4d-triple")
    throw std::invalid_argument("glue: only the model4d-triple package set is built in");
  auto top_chart = Chart::standard(4);
  PolyForm wt(top_chart, 2);
  wt.add_term(IdxSet{0, 1}, Poly::variable(4, 0));
  wt.add_term(IdxSet{2, 3}, Poly::variable(4, 2));
  moser::StratumPackage top{top_chart, stratify::FormField(std::move(wt)), {}, {0, 1, 2, 3}};
  auto mid_chart = Chart::make({"x2", "x3", "x4"});
  PolyForm wm(mid_chart, 2);
  wm.add_term(IdxSet{1, 2}, Poly::variable(3, 1));
  moser::StratumPackage mid{mid_chart, stratify::FormField(std::move(wm)), {0}, {1, 2}};
  auto min_chart = Chart::make({"x2", "x4"});
  moser::StratumPackage low{min_chart, stratify::FormField(PolyForm(min_chart, 2)), {0, 1}, {}};

  moser::GlueMorphism f_lm = moser::glue_morphism(low, mid, {0, 2});
  moser::GlueMorphism f_mt = moser::glue_morphism(mid, top, {1, 2, 3});
  moser::GlueMorphism f_lt = moser::glue_morphism(low, top, {1, 3});

  bool composition_ok = true;
  for (int var = 0; var < 2 && composition_ok; ++var)
    for (int leaf = 0; leaf < 2 && composition_ok; ++leaf) {
      PolyForm g(min_chart, 1);
      g.add_term(IdxSet{leaf}, Poly::variable(2, var));
      linf::FoliationForm s{min_chart, low.f_coords, g};
      linf::FoliationForm via = moser::glue_apply(f_mt, moser::glue_apply(f_lm, s));
      linf::FoliationForm direct = moser::glue_apply(f_lt, s);
      if (!(via.form == direct.form)) composition_ok = false;
    }

  Report r("glue");
  r.set("model", model);
  r.set("chain_map_low_mid", f_lm.chain_map_ok);
  r.set("chain_map_mid_top", f_mt.chain_map_ok);
  r.set("chain_map_low_top", f_lt.chain_map_ok);
  r.set("composition_exact", composition_ok);
  r.set("z_components_mid", f_mt.z_lower.comps().size());
  out << r.text();
  bool ok = f_lm.chain_map_ok && f_mt.chain_map_ok && f_lt.chain_map_ok && composition_ok;
  return ok ? 0 : 1;
}

int cmd_directed(const Rat& c, const Rat& C, int samples, std::ostream& out) {
  moser::DirectedReport rep = moser::directed_extension_check(c, C, samples);
  Report r("directed-check");
  r.set("c", c);
  r.set("C", C);
  r.set("forward_value", rep.forward_value);
  for (std::size_t i = 0; i < rep.one_sided_derivatives.size(); ++i)
    r.set("derivative" + std::to_string(i + 1), rep.one_sided_derivatives[i]);
  r.set("backward_value", rep.backward_value);
  r.set("forward_smooth", rep.forward_smooth);
  r.set("backward_divergent", rep.backward_divergent);
  r.set("directed", rep.directed);
  out << r.text();
  return rep.directed ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"stratified closed two-form toolkit"};
  app.require_subcommand(1);

  // Shared option storage.
  std::string model, manifest_path, form, point_csv, sigma, xi = "0", family = "analytic2d";
  std::string csv_path;
  int N = 4, count = 100, samples = 200, steps = 64, arity = 4, trials = 3;
  int d_base = 4, d_fiber = 3, fiber_order = 3, dsamples = 9;
  unsigned seed = default_seed();
  double tol = 1e-6, box_lo = -1, box_hi = 1;
  std::string c_str = "1", C_str = "1";
  bool convergence = false;

  auto* dims = app.add_subcommand("dims", "stratum dimension and codimension table");
  dims->add_option("--N", N, "ambient dimension");

  auto* strat = app.add_subcommand("stratify", "stratum census with transversality checks");
  strat->add_option("--model", model);
  strat->add_option("--manifest", manifest_path);
  strat->add_option("--form", form);
  strat->add_option("--box-lo", box_lo);
  strat->add_option("--box-hi", box_hi);
  strat->add_option("--samples", samples);
  strat->add_option("--seed", seed);

  auto* whit = app.add_subcommand("whitney", "Whitney condition A/B verification");
  whit->add_option("--model", model)->required();
  whit->add_option("--tol", tol);
  whit->add_option("--seed", seed);

  auto* real = app.add_subcommand("realize", "closed forms realizing random skew values");
  real->add_option("--N", N);
  real->add_option("--count", count);
  real->add_option("--seed", seed);

  auto* gotay = app.add_subcommand("gotay", "Gotay normal form of a model");
  gotay->add_option("--model", model)->required();
  gotay->add_option("--fiber-order", fiber_order);

  auto* linfv = app.add_subcommand("linf-verify", "derived-bracket L-infinity relations");
  linfv->add_option("--model", model)->required();
  linfv->add_option("--arity", arity);
  linfv->add_option("--trials", trials);
  linfv->add_option("--seed", seed);
  linfv->add_option("--d-base", d_base);
  linfv->add_option("--d-fiber", d_fiber);

  auto* mc = app.add_subcommand("mc", "Maurer-Cartan series of a section");
  mc->add_option("--model", model)->required();
  mc->add_option("--sigma", sigma)->required();
  mc->add_option("--arity", arity);
  mc->add_option("--d-base", d_base);
  mc->add_option("--d-fiber", d_fiber);

  auto* conn = app.add_subcommand("connection", "point-flat connection for a closed form");
  conn->add_option("--model", model)->required();
  conn->add_option("--point", point_csv);

  auto* mos = app.add_subcommand("moser", "Moser flow with pullback residuals");
  mos->add_option("--family", family);
  mos->add_option("--steps", steps);
  mos->add_option("--samples", samples);
  mos->add_option("--seed", seed);
  mos->add_option("--tol", tol);
  mos->add_option("--csv", csv_path);
  mos->add_flag("--convergence", convergence);

  auto* gauge = app.add_subcommand("gauge", "gauge Cauchy problem in the truncated algebra");
  gauge->add_option("--model", model)->required();
  gauge->add_option("--xi", xi);
  gauge->add_option("--steps", steps);
  gauge->add_option("--d-base", d_base);
  gauge->add_option("--d-fiber", d_fiber);

  auto* glue = app.add_subcommand("glue", "gluing morphism linear parts and composition");
  glue->add_option("--model", model)->required();

  auto* dir = app.add_subcommand("directed-check", "one-sided extension evidence");
  dir->add_option("--c", c_str);
  dir->add_option("--C", C_str);
  dir->add_option("--samples", dsamples);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  try {
    if (dims->parsed()) return cmd_dims(N, out);
    if (strat->parsed())
      return cmd_stratify(load_input(model, manifest_path), form, box_lo, box_hi, samples, seed,
                          out);
    if (whit->parsed()) return cmd_whitney(model, tol, seed, out);
    if (real->parsed()) return cmd_realize(N, count, seed, out);
    if (gotay->parsed()) return cmd_gotay(model, fiber_order, out);
    if (linfv->parsed()) return cmd_linf_verify(model, arity, trials, seed, d_base, d_fiber, out);
    if (mc->parsed()) return cmd_mc(model, sigma, arity, d_base, d_fiber, out);
    if (conn->parsed()) return cmd_connection(model, point_csv, out);
    if (mos->parsed())
      return cmd_moser(family, steps, samples, seed, tol, csv_path, convergence, out);
    if (gauge->parsed()) return cmd_gauge(model, xi, steps, d_base, d_fiber, out);
    if (glue->parsed()) return cmd_glue(model, out);
    if (dir->parsed()) return cmd_directed(Rat::parse(c_str), Rat::parse(C_str), dsamples, out);
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  err << "no command dispatched\n";
  return 2;
}

}  // namespace io
}  // namespace strataform
