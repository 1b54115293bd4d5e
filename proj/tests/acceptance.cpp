// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
// Tolerances are fixed here and never adjusted per run.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "facloc/geometry.hpp"
#include "facloc/mechanisms.hpp"
#include "facloc/objectives.hpp"
#include "facloc/properties.hpp"
#include "facloc/random.hpp"
#include "facloc/search.hpp"
#include "facloc_cli/cli.hpp"
#include "facloc_cli/report.hpp"
#include "oracle.hpp"

using namespace facloc;

namespace {

constexpr double kExact = 1e-9;     // closed-form ratios
constexpr double kSearch = 1e-6;    // searched ratios may not exceed the bound by more
constexpr double kOptSlack = 1e-6;  // ratios that go through an iterative optimum
constexpr std::size_t kEvals = 10000;

const Norm kL2 = Norm::lp(2);

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

SearchConfig search_config(std::size_t restarts, std::uint64_t seed) {
  SearchConfig c;
  c.restarts = restarts;
  c.rng_seed = seed;
  c.workers = workers();
  return c;
}

Profile clustered(std::size_t n, double spread) {
  std::vector<Point> pts{Point{0, 0}};
  for (std::size_t i = 1; i < n; ++i) pts.push_back(Point{spread, 0});
  return Profile(std::move(pts));
}

Point uniform_point(CounterRng& rng, std::size_t d, double r) {
  std::vector<double> c(d);
  for (double& x : c) x = rng.uniform(-r, r);
  return Point(std::move(c));
}

Profile uniform_profile(CounterRng& rng, std::size_t n, std::size_t d, double r) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(uniform_point(rng, d, r));
  return Profile(std::move(pts));
}

// Worst ratio over the structured families and random restarts, capped at kEvals.
WorstRatioResult worst(const MechanismSpec& spec, Objective obj, std::size_t n, std::uint64_t seed) {
  SearchConfig c = search_config(kEvals, seed);
  c.max_evaluations = kEvals;
  return search_worst_ratio(Mechanism(spec), kL2, obj, n, 2, c);
}

Outcome rand_med_two_agents() {
  Outcome o;
  const Mechanism m(MechanismSpec::make_rand_med());
  const RatioResult r = approx_ratio(m, Profile({{0, 0}, {2, 0}}), kL2, Objective::max_cost);
  o.require(std::abs(r.ratio - 1.5) <= kExact, "exact ratio " + num(r.ratio));
  const WorstRatioResult w = worst(MechanismSpec::make_rand_med(), Objective::max_cost, 2, 1);
  o.require(w.evaluations <= kEvals, "evaluations " + std::to_string(w.evaluations));
  o.require(w.ratio.ratio <= 1.5 + kSearch, "searched ratio " + num(w.ratio.ratio));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("exact ") + num(r.ratio) + ", searched max " +
              num(w.ratio.ratio) + " over " + std::to_string(w.evaluations) + " evaluations";
  return o;
}

Outcome ratio_family(const MechanismSpec& spec, Objective obj, const std::function<double(double)>& bound) {
  Outcome o;
  const Mechanism m(spec);
  std::string seen;
  for (std::size_t n = 2; n <= 6; ++n) {
    const double b = bound(static_cast<double>(n));
    const RatioResult r = approx_ratio(m, clustered(n, 1.0), kL2, obj);
    o.require(std::abs(r.ratio - b) <= kExact, "n=" + std::to_string(n) + " clustered " + num(r.ratio));
    const WorstRatioResult w = worst(spec, obj, n, 100 + n);
    o.require(w.ratio.ratio <= b + kSearch, "n=" + std::to_string(n) + " searched " + num(w.ratio.ratio));
    seen += (seen.empty() ? "" : " ") + std::string("n=") + std::to_string(n) + ":" + num(w.ratio.ratio);
  }
  if (o.pass) o.detail = "searched maxima " + seen;
  return o;
}

Outcome rand_center_strategyproof() {
  Outcome o;
  const Mechanism m(MechanismSpec::make_rand_center());
  std::size_t witnesses = 0, profiles = 0, inconclusive = 0;
  double best = -INFINITY;
  for (std::size_t n : {2u, 3u, 4u}) {
    for (double p : {1.5, 2.0, 3.0}) {
      const auto r = search_sp_violation(m, Norm::lp(p), n, 2, search_config(500, 7 * n + static_cast<unsigned>(p * 2)));
      witnesses += r.witness ? 1 : 0;
      inconclusive += r.verdict.status == VerdictStatus::inconclusive ? 1 : 0;
      profiles += r.profiles_examined;
      best = std::max(best, r.best_gain);
    }
  }
  o.require(witnesses == 0, std::to_string(witnesses) + " validated witnesses");
  o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(profiles) + " profiles (500 seeded restarts per n, p), " +
              std::to_string(witnesses) + " witnesses, best gain " + num(best) + ", inconclusive " +
              std::to_string(inconclusive);
  return o;
}

Outcome separate_2dictator() {
  Outcome o;
  const Mechanism m(MechanismSpec::make_separate_2dictator(0.0));
  CounterRng rng(55);
  std::vector<Point> zs;
  for (int k = 0; k < 100; ++k) zs.push_back(uniform_point(rng, 2, 5));
  const PropertyVerdict un = check_unanimity(m, kL2, zs, 3);
  o.require(un.passed(), "unanimity " + to_string(un.status));

  const auto gsp = search_gsp_violation(m, kL2, 3, 2, search_config(500, 3));
  o.require(!gsp.witness, "GSP witness found");

  const std::vector<Profile> profiles = structured_profiles(3, 2);
  const std::vector<Point> shifts{Point{-3, 0}, Point{2.5, 1}, Point{-0.75, -2}};
  const PropertyVerdict ti = check_translation_invariance(m, kL2, profiles, shifts);
  o.require(ti.failed(), "translation invariance " + to_string(ti.status));
  bool replayed = false;
  if (ti.witness && ti.witness->shift) {
    const std::vector<Profile> one{ti.witness->profile};
    const std::vector<Point> s{*ti.witness->shift};
    const PropertyVerdict again = check_translation_invariance(m, kL2, one, s);
    replayed = again.failed() && again.witness && *again.witness == *ti.witness;
  }
  o.require(replayed, "translation witness did not replay");
  if (o.pass) {
    o.detail = "unanimity passed on 100 z; GSP: " + std::to_string(gsp.profiles_examined) +
               " profiles, no witness; TI failed at " + ti.witness->profile.to_string() + " shift " +
               ti.witness->shift->to_string() + ", replayed";
  }
  return o;
}

Outcome l1_median_repro() {
  Outcome o;
  const std::filesystem::path path = std::filesystem::temp_directory_path() / "facloc_acceptance_l1.json";
  const std::string p = path.string();
  const char* argv[] = {"facloc", "repro", "l1-median", "--out", p.c_str()};
  std::ostringstream out, err;
  const int code = cli::run(5, argv, out, err);
  o.require(code == cli::kExitOk, "exit " + std::to_string(code));
  o.require(out.str().find("truthful output {(1, 1, 1): 1}, after coalition misreport {(0, 0, 0): 1}") !=
                std::string::npos,
            "outputs not (1,1,1) -> (0,0,0)");
  std::ifstream in(path);
  const cli::Json j = cli::Json::parse(in);
  const cli::Json& w = j.at("witnesses").at(0);
  const Profile expected({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}, {1, 1, 1}});
  o.require(cli::profile_from_json(w.at("profile")) == expected, "profile differs");
  o.require(w.at("coalition") == cli::Json::array({1, 2, 3}), "coalition differs");
  bool lies = w.at("misreports").size() == 3;
  for (const cli::Json& x : w.at("misreports")) lies = lies && cli::point_from_json(x) == Point::zero(3);
  o.require(lies, "misreports differ");
  bool deltas = w.at("per_agent_delta").size() == 3;
  for (const cli::Json& dlt : w.at("per_agent_delta")) {
    deltas = deltas && dlt.at("cost_before").get<double>() == 2.0 && dlt.at("cost_after").get<double>() == 1.0;
  }
  o.require(deltas, "costs are not 2 -> 1");
  if (o.pass) o.detail = "coalition {1,2,3} reports (0,0,0); output (1,1,1) -> (0,0,0); L1 costs 2 -> 1";
  return o;
}

Outcome dictator_ratios() {
  Outcome o;
  const Mechanism m(MechanismSpec::make_dictator(1));
  for (std::size_t n = 2; n <= 6; ++n) {
    const RatioResult mc = approx_ratio(m, clustered(n, 2.0), kL2, Objective::max_cost);
    o.require(std::abs(mc.ratio - 2.0) <= kExact, "n=" + std::to_string(n) + " mc " + num(mc.ratio));
    const RatioResult sc = approx_ratio(m, clustered(n, 1.0), kL2, Objective::social_cost);
    const double target = static_cast<double>(n - 1);
    o.require(std::abs(sc.ratio - target) <= kOptSlack, "n=" + std::to_string(n) + " sc " + num(sc.ratio));
  }
  if (o.pass) o.detail = "mc = 2 and sc = n - 1 for n = 2..6";
  return o;
}

Outcome property_suites() {
  Outcome o;
  const std::vector<MechanismSpec> specs{MechanismSpec::make_dictator(1), MechanismSpec::make_rand_med(),
                                         MechanismSpec::make_rand_center(), MechanismSpec::make_separate_2dictator(0),
                                         MechanismSpec::make_coordinate_median()};
  CounterRng rng(2024);
  std::string margins;
  for (const MechanismSpec& spec : specs) {
    const Mechanism m(spec);
    double worst_margin = INFINITY;
    std::size_t count = 0;
    for (int k = 0; k < 200; ++k) {
      const Profile p = uniform_profile(rng, 3 + rng.below(3), 2, 4);
      const std::size_t agent = rng.below(p.size());
      std::vector<Point> moves;
      for (int t = 0; t < 50; ++t) {
        const double r = std::pow(10.0, rng.uniform(-4, 0.5));
        moves.push_back(p[agent] + Point{rng.normal(), rng.normal()} * r);
      }
      count += moves.size();
      const PropertyVerdict v = check_cost_continuity(m, p, agent, moves, kL2);
      worst_margin = std::min(worst_margin, v.margin);
    }
    o.require(worst_margin >= -kExact, spec.to_string() + " continuity margin " + num(worst_margin));
    o.require(count == 10000, "perturbation count");
    margins += spec.to_string() + ":" + num(worst_margin) + " ";
  }

  const std::vector<Norm> norms{Norm::lp(1), Norm::lp(1.5), kL2, Norm::lp(3), Norm::lp(INFINITY)};
  std::size_t jensen_bad = 0;
  for (int k = 0; k < 10000; ++k) {
    const Norm& norm = norms[k % norms.size()];
    const std::size_t atoms = 1 + rng.below(5);
    std::vector<double> w(atoms);
    double total = 0.0;
    for (double& x : w) total += (x = rng.uniform(0.05, 1.0));
    std::vector<Atom> at;
    for (std::size_t a = 0; a < atoms; ++a) at.push_back({w[a] / total, uniform_point(rng, 2, 5)});
    const Lottery lot(std::move(at));
    const Point x = uniform_point(rng, 2, 5);
    const double ed = expected_distance(x, lot, norm);
    if (norm.distance(centroid(lot), x) > ed + kExact * (1.0 + ed)) ++jensen_bad;
  }
  o.require(jensen_bad == 0, std::to_string(jensen_bad) + " Jensen violations");

  for (const MechanismSpec& spec : {MechanismSpec::make_rand_med(), MechanismSpec::make_separate_2dictator(0)}) {
    const Mechanism m(spec);
    std::size_t bad = 0;
    for (int k = 0; k < 1000; ++k) {
      if (!check_support_segment(m, uniform_profile(rng, 3 + rng.below(3), 2, 4), kL2).passed()) ++bad;
    }
    o.require(bad == 0, spec.to_string() + " support segment failed " + std::to_string(bad) + " times");
  }
  const PropertyVerdict rc = check_support_segment(Mechanism(MechanismSpec::make_rand_center()),
                                                   Profile({{0, 0}, {1, 0}, {0, 1}}), kL2);
  o.require(rc.failed(), "rand_center support segment " + to_string(rc.status));

  if (o.pass) o.detail = "continuity margins " + margins + "; Jensen 10000/10000; support segment as expected";
  return o;
}

Outcome optimizer_agreement() {
  Outcome o;
  CounterRng rng(31);
  double worst_excess = -INFINITY;
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 2 + rng.below(4);
    const Profile p = uniform_profile(rng, n, 2, 3);
    const OptResult w = weiszfeld_median(p.points(), kL2);

    std::vector<oracle::Vec> pts;
    for (const Point& x : p.points()) pts.emplace_back(x.coords().begin(), x.coords().end());
    const oracle::Dist dist{2.0, {}, {}};
    const double coarse = 0.05;
    // The grid value exceeds the minimum by at most n times the half-diagonal
    // of the final cell; Weiszfeld's value exceeds it by its certified gap.
    auto slack = [n](double h) { return static_cast<double>(n) * h * std::sqrt(2.0) / 2.0; };
    const oracle::GridMin g = oracle::refine2([&](const oracle::Vec& y) { return oracle::social(y, pts, dist); },
                                              {-3, -3}, {3, 3}, coarse, slack);
    const double grid_gap = slack(coarse / 1e4);
    const double excess = std::abs(w.value - g.value) - (w.certified_gap + grid_gap);
    worst_excess = std::max(worst_excess, excess);
  }
  o.require(worst_excess <= 0.0, "disagreement beyond gaps " + num(worst_excess));

  double worst_two = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Point a = uniform_point(rng, 2, 5), b = uniform_point(rng, 2, 5);
    const std::vector<Point> two{a, b};
    worst_two = std::max(worst_two, std::abs(opt_max_cost(two, kL2).value - kL2.distance(a, b) / 2.0));
  }
  o.require(worst_two <= kExact, "two-point minimax off by " + num(worst_two));
  if (o.pass) o.detail = "worst slack vs combined gaps " + num(worst_excess) + "; two-point error " + num(worst_two);
  return o;
}

std::string run_to_file(std::vector<std::string> args, const std::string& path) {
  args.insert(args.begin(), "facloc");
  args.insert(args.end(), {"--out", path});
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return out.str() + ss.str();
}

Outcome byte_identical_reports() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path();
  const std::vector<std::vector<std::string>> runs{
      {"check", "--mech", "rand_center", "--n", "3", "--d", "2", "--budget", "20", "--seed", "99"},
      {"ratio", "--mech", "rand_med", "--obj", "mc", "--n", "3", "--budget", "20", "--seed", "99"},
      {"repro", "l1-median", "--seed", "99"}};
  for (const auto& args : runs) {
    const std::string a = run_to_file(args, (dir / "facloc_acceptance_a.json").string());
    const std::string b = run_to_file(args, (dir / "facloc_acceptance_b.json").string());
    o.require(!a.empty() && a == b, args.front() + " reports differ");
  }
  if (o.pass) o.detail = "check, ratio and repro reports identical across re-runs";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"rand_med two-agent max-cost ratio 3/2", rand_med_two_agents},
      {"rand_med social-cost ratio n/2",
       [] { return ratio_family(MechanismSpec::make_rand_med(), Objective::social_cost, [](double n) { return n / 2; }); }},
      {"rand_center max-cost ratio 2 - 1/n",
       [] {
         return ratio_family(MechanismSpec::make_rand_center(), Objective::max_cost,
                             [](double n) { return 2.0 - 1.0 / n; });
       }},
      {"rand_center strategyproof under strictly convex norms", rand_center_strategyproof},
      {"separate 2-dictator properties", separate_2dictator},
      {"L1 coordinate-median coalition", l1_median_repro},
      {"dictator ratios 2 and n - 1", dictator_ratios},
      {"property suites", property_suites},
      {"optimizer agreement", optimizer_agreement},
      {"report determinism", byte_identical_reports},
  };
  int failures = 0;
  int index = 1;
  for (const Criterion& c : criteria) {
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s  %2d  %s: %s\n", out.pass ? "PASS" : "FAIL", index++, c.name, out.detail.c_str());
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
