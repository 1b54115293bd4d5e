#include "facloc_cli/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "facloc/random.hpp"
#include "facloc/search.hpp"
#include "facloc_cli/report.hpp"

namespace facloc::cli {

namespace {

struct Options {
  std::string profile_path;
  std::string mech;
  std::string norm = "lp:2";
  std::string obj = "mc";
  std::string scenario;
  std::string report_path;
  std::string out_path;
  std::string csv_path;
  std::size_t n = 3;
  std::size_t d = 2;
  std::uint64_t seed = 0;
  std::size_t budget = 0;  // 0: command default
  std::size_t local_steps = 40;
  std::size_t coalition_max = 3;
  double bounding_scale = 2.0;
  std::size_t workers = 1;
  std::size_t max_evaluations = 0;
  std::vector<std::string> candidates;
  bool timing = false;
};

enum class Claim { holds, fails, none };

const char* claim_name(Claim c) {
  switch (c) {
    case Claim::holds: return "holds";
    case Claim::fails: return "fails";
    case Claim::none: return "no claim";
  }
  return "?";
}

bool agrees(Claim c, const PropertyVerdict& v) {
  switch (c) {
    case Claim::holds: return !v.failed();
    case Claim::fails: return v.failed();
    case Claim::none: return true;
  }
  return true;
}

// What the theory asserts for each mechanism and property. Claims resting on
// strict convexity, or on |v_0| <= ||v|| for the threshold mechanism, are
// dropped when the norm does not provide them.
Claim claim_for(const MechanismSpec& spec, const std::string& property, const Norm& norm, std::size_t n,
                std::size_t d) {
  using K = MechanismSpec::Kind;
  const bool strict = norm.strictly_convex();
  const bool plain_strict = strict && norm.is_plain();
  const bool multi = d >= 2;
  switch (spec.kind) {
    case K::dictator:
      return Claim::holds;
    case K::rand_med:
      if (property == "strategyproofness" || property == "group_strategyproofness" ||
          property == "cost_continuity") {
        return strict ? Claim::holds : Claim::none;
      }
      if (property == "uncompromising") return Claim::none;
      return Claim::holds;
    case K::rand_center:
      if (property == "group_strategyproofness") return n >= 3 && multi && strict ? Claim::fails : Claim::none;
      if (property == "support_segment") return n >= 3 && multi ? Claim::fails : Claim::holds;
      if (property == "two_dictatorship") return n >= 3 ? Claim::fails : Claim::holds;
      if (property == "uncompromising") return Claim::none;
      return Claim::holds;
    case K::separate_2dictator:
      if (property == "translation_invariance" || property == "two_dictatorship") {
        return multi ? Claim::fails : Claim::none;
      }
      if (property == "strategyproofness" || property == "group_strategyproofness" ||
          property == "cost_continuity") {
        return plain_strict ? Claim::holds : Claim::none;
      }
      if (property == "uncompromising") return Claim::none;
      return Claim::holds;
    case K::coordinate_median:
      if (property == "strategyproofness" || property == "group_strategyproofness" ||
          property == "two_dictatorship") {
        return Claim::none;
      }
      if (property == "cost_continuity") return norm.has_transform() ? Claim::none : Claim::holds;
      return Claim::holds;
  }
  return Claim::none;
}

std::optional<double> known_ratio_bound(const MechanismSpec& spec, Objective obj, std::size_t n) {
  using K = MechanismSpec::Kind;
  const double dn = static_cast<double>(n);
  switch (spec.kind) {
    case K::dictator: return obj == Objective::max_cost ? 2.0 : dn - 1.0;
    case K::rand_med:
      if (obj == Objective::max_cost) return n == 2 ? 1.5 : 2.0;
      return dn / 2.0;
    case K::rand_center:
      if (obj == Objective::max_cost) return 2.0 - 1.0 / dn;
      return std::nullopt;
    default: return std::nullopt;
  }
}

unsigned parse_candidates(const std::vector<std::string>& names) {
  if (names.empty()) return kAllCandidates;
  static const std::map<std::string, unsigned> table{{"common_point", kCommonPoint},
                                                     {"segment_points", kSegmentPoints},
                                                     {"gaussian_jitter", kGaussianJitter},
                                                     {"grid_near_support", kGridNearSupport},
                                                     {"axis_steps", kAxisSteps}};
  unsigned mask = 0;
  for (const std::string& s : names) {
    auto it = table.find(s);
    if (it == table.end()) throw InputError("--candidates: unknown kind '" + s + "'");
    mask |= it->second;
  }
  return mask;
}

SearchConfig search_config(const Options& o, std::size_t default_restarts) {
  SearchConfig c;
  c.rng_seed = o.seed;
  c.restarts = o.budget ? o.budget : default_restarts;
  c.local_steps = o.local_steps;
  c.coalition_max_size = std::min(o.coalition_max, o.n);
  c.candidate_kinds = parse_candidates(o.candidates);
  c.bounding_scale = o.bounding_scale;
  c.workers = o.workers;
  c.max_evaluations = o.max_evaluations;
  return c;
}

Point uniform_point(CounterRng& rng, std::size_t d, double r) {
  std::vector<double> c(d);
  for (double& x : c) x = rng.uniform(-r, r);
  return Point(std::move(c));
}

void emit(const Options& o, Json& report, std::chrono::steady_clock::time_point start, std::ostream& out) {
  if (o.timing) {
    report["runtime_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  }
  for (const std::string& line : summary_lines(report)) out << line << '\n';
  if (!o.out_path.empty()) {
    std::ofstream f(o.out_path);
    if (!f) throw InputError(o.out_path + ": cannot write");
    f << report.dump(2) << '\n';
  }
}

void check_norm_dim(const Norm& norm, std::size_t d) {
  if (norm.dim() && *norm.dim() != d) {
    throw DimensionError("norm has dimension " + std::to_string(*norm.dim()) + " but points have " +
                         std::to_string(d));
  }
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const Profile profile = load_profile_file(o.profile_path);
  const MechanismSpec spec = MechanismSpec::parse(o.mech);
  const Norm norm = Norm::parse(o.norm);
  check_norm_dim(norm, profile.dim());
  const Mechanism mech(spec);
  const Lottery lot = mech(profile, norm);

  Json report = make_report("evaluate", spec.to_string(), norm.to_string(), o.seed);
  Json& vals = report["objective_values"];
  vals["mc"] = cost_mc(lot, profile, norm);
  vals["sc"] = cost_sc(lot, profile, norm);
  vals["radius"] = radius(lot, norm);
  Json details;
  details["profile"] = to_json(profile);
  details["output"] = to_json(lot);
  details["centroid"] = to_json(centroid(lot));
  for (Objective obj : {Objective::max_cost, Objective::social_cost}) {
    const std::string tag = to_string(obj);
    const RatioResult r = ratio_from(cost(obj, lot, profile, norm), optimum(obj, profile.points(), norm));
    vals["opt_" + tag] = r.opt.value;
    vals["opt_" + tag + "_gap"] = r.opt.certified_gap;
    vals["ratio_" + tag] = number(r.unbounded ? INFINITY : r.ratio);
    details["ratio_" + tag + "_interval"] = Json::array({number(r.lo), number(r.hi)});
    details["opt_" + tag + "_point"] = to_json(r.opt.point);
  }
  report["details"] = details;
  out << "output " << lot.to_string() << '\n';
  emit(o, report, start, out);
  return kExitOk;
}

int cmd_check(const Options& o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const MechanismSpec spec = MechanismSpec::parse(o.mech);
  const Norm norm = Norm::parse(o.norm);
  check_norm_dim(norm, o.d);
  const Mechanism mech(spec);
  if (o.n < mech.min_agents()) throw DomainError(o.mech + " needs --n >= " + std::to_string(mech.min_agents()));
  const SearchConfig config = search_config(o, 50);
  const std::size_t n = o.n, d = o.d;

  std::vector<Profile> profiles = structured_profiles(n, d);
  for (std::size_t i = 0; i < std::min<std::size_t>(config.restarts, 50); ++i) {
    profiles.push_back(random_profile(n, d, o.seed, i));
  }
  CounterRng rng(o.seed, 0xC4EC);

  Json report = make_report("check", spec.to_string(), norm.to_string(), o.seed);
  report["objective_values"]["n"] = n;
  report["objective_values"]["d"] = d;
  auto record = [&](PropertyVerdict v) {
    const Claim c = claim_for(spec, v.property, norm, n, d);
    add_verdict(report, v, claim_name(c), agrees(c, v));
  };

  {
    CounterRng r = rng.split(1);
    std::vector<Point> zs;
    for (int k = 0; k < 100; ++k) zs.push_back(uniform_point(r, d, 5.0));
    record(check_unanimity(mech, norm, zs, n));
  }
  {
    CounterRng r = rng.split(2);
    std::vector<Point> shifts;
    for (int k = 0; k < 5; ++k) shifts.push_back(uniform_point(r, d, 3.0));
    record(check_translation_invariance(mech, norm, profiles, shifts));
  }
  record(search_sp_violation(mech, norm, n, d, config).verdict);
  record(search_gsp_violation(mech, norm, n, d, config).verdict);
  {
    std::vector<PropertyVerdict> vs;
    for (const Profile& p : profiles) vs.push_back(check_support_segment(mech, p, norm));
    record(merge_worst("support_segment", vs));
  }
  record(check_2dictatorship(mech, profiles, norm));
  {
    CounterRng r = rng.split(3);
    std::vector<PropertyVerdict> vs;
    for (const Profile& p : profiles) {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<Point> moves;
        for (double scale : {1e-3, 0.1, 1.0}) {
          for (int k = 0; k < 4; ++k) moves.push_back(p[i] + uniform_point(r, d, scale));
        }
        vs.push_back(check_cost_continuity(mech, p, i, moves, norm));
      }
    }
    record(merge_worst("cost_continuity", vs));
  }
  {
    std::vector<PropertyVerdict> vs;
    for (const Profile& p : profiles) vs.push_back(check_uncompromising(mech, p, norm));
    record(merge_worst("uncompromising", vs));
  }
  emit(o, report, start, out);
  return report_consistent(report) ? kExitOk : kExitViolation;
}

int cmd_ratio(const Options& o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const MechanismSpec spec = MechanismSpec::parse(o.mech);
  const Norm norm = Norm::parse(o.norm);
  const Objective obj = parse_objective(o.obj);
  check_norm_dim(norm, o.d);
  const SearchConfig config = search_config(o, 50);
  const WorstRatioResult w = search_worst_ratio(Mechanism(spec), norm, obj, o.n, o.d, config);

  Json report = make_report("ratio", spec.to_string(), norm.to_string(), o.seed);
  Json& vals = report["objective_values"];
  vals["objective"] = to_string(obj);
  vals["n"] = o.n;
  vals["d"] = o.d;
  vals["mechanism_cost"] = w.ratio.cost;
  vals["opt_value"] = w.ratio.opt.value;
  vals["opt_gap"] = w.ratio.opt.certified_gap;
  vals["ratio"] = number(w.ratio.unbounded ? INFINITY : w.ratio.ratio);
  const std::optional<double> bound = known_ratio_bound(spec, obj, o.n);
  vals["theoretical_bound"] = bound ? Json(*bound) : Json(nullptr);
  report["ratio_interval"] = Json::array({number(w.ratio.lo), number(w.ratio.hi)});

  PropertyVerdict v;
  v.property = "ratio_bound";
  if (bound) {
    v.margin = *bound - w.ratio.lo;
    v.status = classify_margin(v.margin);
  }
  if (v.failed()) {
    v.witness = Witness{"ratio", w.profile, {}, {}, {}, {}, "certified ratio exceeds the known bound"};
  }
  add_verdict(report, v, bound ? "holds" : "no claim", !bound || !v.failed());
  report["details"] = Json{{"extremal_profile", to_json(w.profile)},
                           {"origin", w.origin},
                           {"evaluations", w.evaluations},
                           {"opt_method", w.ratio.opt.method}};
  out << "extremal profile " << w.profile.to_string() << " (" << w.origin << ")\n";
  emit(o, report, start, out);
  return report_consistent(report) ? kExitOk : kExitViolation;
}

Profile l1_profile() { return Profile({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}, {1, 1, 1}}); }

int repro_l1_median(const Options& o, Json& report, std::ostream& out) {
  const Norm norm = Norm::lp(1);
  const Mechanism mech(MechanismSpec::make_coordinate_median());
  const Profile profile = l1_profile();
  const Point origin = Point::zero(3);
  const std::vector<std::size_t> coalition{0, 1, 2};
  const std::vector<Point> lies(3, origin);
  const Lottery before = mech(profile, norm);
  const Lottery after = mech(Profile({origin, origin, origin, profile[3], profile[4]}), norm);
  PropertyVerdict v = check_group_strategyproof_at(mech, profile, coalition, lies, norm);
  if (v.witness) v.witness->note = "coalition reports (0, 0, 0) together";
  bool exact = before == Lottery::degenerate(Point{1, 1, 1}) && after == Lottery::degenerate(origin);
  if (v.witness) {
    for (const AgentDelta& dlt : v.witness->per_agent_delta) exact = exact && dlt.cost_before == 2.0 && dlt.cost_after == 1.0;
  }
  add_verdict(report, v, "fails", v.failed() && exact);

  SearchConfig config;
  config.rng_seed = o.seed;
  config.restarts = o.budget ? o.budget : 20;
  const ViolationSearchResult found = search_gsp_violation(mech, norm, 5, 3, config, {profile});
  report["objective_values"]["search_best_gain"] = found.best_gain;
  report["details"] = Json{{"profile", to_json(profile)},
                           {"output", to_json(before)},
                           {"misreport_output", to_json(after)},
                           {"search_found_witness", found.witness.has_value()}};
  out << "truthful output " << before.to_string() << ", after coalition misreport " << after.to_string() << '\n';
  return v.failed() && exact ? kExitOk : kExitViolation;
}

std::string interval_text(double lo, double hi) { return "[" + format_number(lo) + ", " + format_number(hi) + "]"; }

int repro_table1(const Options& o, Json& report, std::ostream& out) {
  const Norm norm = Norm::lp(2);
  const Mechanism mech(MechanismSpec::make_rand_med());
  SearchConfig config;
  config.rng_seed = o.seed;
  config.restarts = o.budget ? o.budget : 10;
  config.local_steps = o.local_steps;
  config.workers = o.workers;
  CsvTable table{{"objective", "n", "deterministic_bound", "randomized_bound", "measured_lo", "measured_hi"}, {}};
  Json rows = Json::array();
  for (Objective obj : {Objective::max_cost, Objective::social_cost}) {
    for (std::size_t n = 2; n <= 6; ++n) {
      const double dn = static_cast<double>(n);
      double det = 0, rlo = 0, rhi = 0;
      if (obj == Objective::max_cost) {
        det = 2.0;
        rlo = rhi = n == 2 ? 1.5 : 2.0;
      } else {
        det = dn - 1.0;
        rlo = dn / 2.0 - 1.0;
        rhi = dn / 2.0;
      }
      const WorstRatioResult w = search_worst_ratio(mech, norm, obj, n, 2, config);
      table.rows.push_back({to_string(obj), std::to_string(n), interval_text(det, det), interval_text(rlo, rhi),
                            format_number(w.ratio.lo), format_number(w.ratio.hi)});
      rows.push_back(Json{{"objective", to_string(obj)},
                          {"n", n},
                          {"deterministic_bound", Json::array({det, det})},
                          {"randomized_bound", Json::array({rlo, rhi})},
                          {"measured_lo", number(w.ratio.lo)},
                          {"measured_hi", number(w.ratio.hi)},
                          {"extremal_profile", to_json(w.profile)}});
      // The upper end is attained by the mechanism and never exceeded.
      PropertyVerdict v;
      v.property = "ratio_bound " + to_string(obj) + " n=" + std::to_string(n);
      v.margin = std::min(rhi - w.ratio.lo, w.ratio.hi - rhi);
      v.status = classify_margin(v.margin);
      add_verdict(report, v, "holds", v.passed());
    }
  }
  report["details"] = Json{{"mechanism", "rand_med"}, {"table", rows}};
  if (!o.csv_path.empty()) {
    std::ofstream f(o.csv_path);
    if (!f) throw InputError(o.csv_path + ": cannot write");
    f << to_csv(table);
  }
  out << to_csv(table);
  return report_consistent(report) ? kExitOk : kExitViolation;
}

int repro_mech2_demo(Json& report, std::ostream& out) {
  const Norm norm = Norm::lp(2);
  struct Case {
    const char* name;
    Profile profile;
    Point expected_y;
  };
  // a = 0, so r is agent 1's first coordinate.
  const std::vector<Case> cases{
      {"r >= a, short segment", Profile({{1, 0}, {3, 0}, {0, 2}}), Point{2, 0}},
      {"r >= a, capped by ||x1 - x2||", Profile({{3, 0}, {4, 0}, {0, 2}}), Point{4, 0}},
      {"r < a, toward agent 3", Profile({{-1, 0}, {3, 0}, {-1, 3}}), Point{-1, 1}},
  };
  Json details = Json::array();
  for (const Case& c : cases) {
    const Lottery lot = apply_separate_2dictator(c.profile, norm, 0.0);
    const Lottery expected({{2.0 / 3.0, c.profile[0]}, {1.0 / 3.0, c.expected_y}});
    PropertyVerdict v;
    v.property = std::string("case ") + c.name;
    v.margin = -lottery_discrepancy(lot, expected);
    v.status = classify_margin(v.margin);
    add_verdict(report, v, "holds", v.passed());
    details.push_back(Json{{"case", c.name}, {"profile", to_json(c.profile)}, {"output", to_json(lot)}});
    out << c.name << ": " << lot.to_string() << '\n';
  }
  report["details"] = Json{{"a", 0.0}, {"cases", details}};
  return report_consistent(report) ? kExitOk : kExitViolation;
}

int repro_procaccia_n2(const Options& o, Json& report, std::ostream& out) {
  const Norm norm = Norm::lp(2);
  const Mechanism mech(MechanismSpec::make_rand_med());
  const Profile profile({{0, 0}, {2, 0}});
  const RatioResult r = approx_ratio(mech, profile, norm, Objective::max_cost);
  report["objective_values"]["mechanism_cost"] = r.cost;
  report["objective_values"]["opt_value"] = r.opt.value;
  report["objective_values"]["ratio"] = r.ratio;

  SearchConfig config;
  config.rng_seed = o.seed;
  config.restarts = o.budget ? o.budget : 50;
  config.local_steps = o.local_steps;
  config.workers = o.workers;
  const WorstRatioResult w = search_worst_ratio(mech, norm, Objective::max_cost, 2, 2, config);
  report["ratio_interval"] = Json::array({number(w.ratio.lo), number(w.ratio.hi)});

  PropertyVerdict at;
  at.property = "ratio at ((0,0),(2,0))";
  at.margin = -std::abs(r.ratio - 1.5);
  at.status = classify_margin(at.margin);
  add_verdict(report, at, "holds", at.passed());
  PropertyVerdict cap;
  cap.property = "ratio_bound";
  cap.margin = 1.5 - w.ratio.lo;
  cap.status = classify_margin(cap.margin);
  add_verdict(report, cap, "holds", !cap.failed());
  report["details"] = Json{{"extremal_profile", to_json(w.profile)}, {"evaluations", w.evaluations}};
  out << "rand_med mc ratio on ((0,0),(2,0)): " << format_number(r.ratio) << '\n';
  return report_consistent(report) ? kExitOk : kExitViolation;
}

int cmd_repro(const Options& o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  static const std::map<std::string, std::pair<const char*, const char*>> meta{
      {"l1-median", {"coord_median", "lp:1"}},
      {"table1", {"rand_med", "lp:2"}},
      {"mech2-demo", {"sep2d:a=0", "lp:2"}},
      {"procaccia-n2", {"rand_med", "lp:2"}},
  };
  auto it = meta.find(o.scenario);
  if (it == meta.end()) throw InputError("unknown scenario '" + o.scenario + "'");
  Json report = make_report("repro:" + o.scenario, it->second.first, it->second.second, o.seed);
  int code = kExitOk;
  if (o.scenario == "l1-median") code = repro_l1_median(o, report, out);
  if (o.scenario == "table1") code = repro_table1(o, report, out);
  if (o.scenario == "mech2-demo") code = repro_mech2_demo(report, out);
  if (o.scenario == "procaccia-n2") code = repro_procaccia_n2(o, report, out);
  emit(o, report, start, out);
  return code;
}

// Re-runs a stored manipulation witness against the recorded mechanism and norm.
std::optional<bool> replay(const Json& w, const Mechanism& mech, const Norm& norm) {
  const std::string kind = w.at("kind").get<std::string>();
  const Profile profile = profile_from_json(w.at("profile"));
  if (kind == "sp" || kind == "gsp") {
    std::vector<std::size_t> coalition;
    for (const Json& a : w.at("coalition")) coalition.push_back(a.get<std::size_t>() - 1);
    std::vector<Point> lies;
    for (const Json& p : w.at("misreports")) lies.push_back(point_from_json(p));
    return check_group_strategyproof_at(mech, profile, coalition, lies, norm).failed();
  }
  if (kind == "translation") {
    const Point shift = point_from_json(w.at("shift"));
    const Profile one[] = {profile};
    const Point shifts[] = {shift};
    return check_translation_invariance(mech, norm, one, shifts).failed();
  }
  return std::nullopt;
}

int cmd_summarize(const Options& o, std::ostream& out) {
  if (o.report_path.empty() && o.csv_path.empty()) throw InputError("summarize: give --report and/or --csv");
  bool ok = true;
  if (!o.report_path.empty()) {
    std::ifstream in(o.report_path);
    if (!in) throw InputError(o.report_path + ": cannot open");
    Json report;
    try {
      report = Json::parse(in);
    } catch (const Json::exception& e) {
      throw InputError(o.report_path + ": " + e.what());
    }
    for (const std::string& line : summary_lines(report)) out << line << '\n';
    ok = report_consistent(report);
    const MechanismSpec spec = MechanismSpec::parse(report.at("spec").get<std::string>());
    const Norm norm = Norm::parse(report.at("norm").get<std::string>());
    std::size_t k = 0;
    for (const Json& w : report.at("witnesses")) {
      const std::optional<bool> r = replay(w, Mechanism(spec), norm);
      if (r) {
        out << "replay witness #" << k << ": " << (*r ? "reproduced" : "NOT reproduced") << '\n';
        ok = ok && *r;
      }
      ++k;
    }
  }
  if (!o.csv_path.empty()) {
    std::ifstream in(o.csv_path);
    if (!in) throw InputError(o.csv_path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    out << to_csv(parse_csv(ss.str()));
  }
  return ok ? kExitOk : kExitViolation;
}

void add_search_options(CLI::App* sub, Options& o) {
  sub->add_option("--budget", o.budget, "Search restarts");
  sub->add_option("--local-steps", o.local_steps, "Pattern-search rounds per candidate");
  sub->add_option("--coalition-max", o.coalition_max, "Largest coalition tried");
  sub->add_option("--bounding-scale", o.bounding_scale, "Misreport box as a multiple of the profile diameter")
      ->check(CLI::PositiveNumber);
  sub->add_option("--workers", o.workers, "Threads for independent restarts")->check(CLI::PositiveNumber);
  sub->add_option("--candidates", o.candidates,
                  "Subset of common_point,segment_points,gaussian_jitter,grid_near_support,axis_steps")
      ->delimiter(',');
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Facility location mechanism simulator", "facloc"};
  app.set_version_flag("--version", kToolVersion);
  app.set_config("--config", "", "TOML/INI file with option values");
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out_path, "Write the JSON report here");
    sub->add_option("--seed", o.seed, "64-bit seed for every random choice");
    sub->add_flag("--timing", o.timing, "Record runtime_ms (makes reports time-dependent)");
  };

  CLI::App* evaluate = app.add_subcommand("evaluate", "Apply a mechanism to a profile file");
  evaluate->add_option("--profile", o.profile_path, "JSON profile {\"d\":..,\"points\":[[..],..]}")->required();
  evaluate->add_option("--mech", o.mech, "dictator:<i> | rand_med | rand_center | sep2d:a=<x> | coord_median")
      ->required();
  evaluate->add_option("--norm", o.norm, "lp:<p>[;w=..][;A=..]");
  common(evaluate);

  CLI::App* check = app.add_subcommand("check", "Run the property suite on one mechanism");
  check->add_option("--mech", o.mech, "Mechanism string")->required();
  check->add_option("--norm", o.norm, "Norm string");
  check->add_option("--n", o.n, "Agents")->check(CLI::Range(2, 16));
  check->add_option("--d", o.d, "Dimension")->check(CLI::Range(1, 8));
  common(check);
  add_search_options(check, o);

  CLI::App* ratio = app.add_subcommand("ratio", "Search for the worst approximation ratio");
  ratio->add_option("--mech", o.mech, "Mechanism string")->required();
  ratio->add_option("--norm", o.norm, "Norm string");
  ratio->add_option("--obj", o.obj, "mc | sc");
  ratio->add_option("--n", o.n, "Agents")->check(CLI::Range(2, 16));
  ratio->add_option("--d", o.d, "Dimension")->check(CLI::Range(1, 8));
  ratio->add_option("--max-evals", o.max_evaluations, "Cap on ratio evaluations");
  common(ratio);
  add_search_options(ratio, o);

  CLI::App* repro = app.add_subcommand("repro", "Reproduce a canned scenario");
  repro->add_option("scenario", o.scenario, "l1-median | table1 | mech2-demo | procaccia-n2")->required();
  repro->add_option("--csv", o.csv_path, "CSV output (table1)");
  common(repro);
  add_search_options(repro, o);

  CLI::App* summarize = app.add_subcommand("summarize", "Re-read a report or CSV and print its summary");
  summarize->add_option("--report", o.report_path, "JSON report written by --out");
  summarize->add_option("--csv", o.csv_path, "CSV table written by repro table1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (evaluate->parsed()) return cmd_evaluate(o, out);
    if (check->parsed()) return cmd_check(o, out);
    if (ratio->parsed()) return cmd_ratio(o, out);
    if (repro->parsed()) return cmd_repro(o, out);
    if (summarize->parsed()) return cmd_summarize(o, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace facloc::cli
