#include "facloc_cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace facloc::cli {

namespace {

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

double finite_number(const Json& j, const std::string& field) {
  if (!j.is_number()) throw InputError(field + ": expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw InputError(field + ": expected a finite number");
  return x;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

Profile parse_profile_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError("profile: malformed JSON at " + line_col(text, e.byte));
  }
  if (!j.is_object()) throw InputError("profile: top level must be an object");
  if (!j.contains("d")) throw InputError("d: missing field");
  if (!j["d"].is_number_integer() || j["d"].get<long long>() < 1) throw InputError("d: expected a positive integer");
  const auto d = static_cast<std::size_t>(j["d"].get<long long>());
  if (!j.contains("points")) throw InputError("points: missing field");
  const Json& pts = j["points"];
  if (!pts.is_array()) throw InputError("points: expected an array");
  if (pts.size() < 2) throw InputError("points: need at least 2 agents, got " + std::to_string(pts.size()));
  std::vector<Point> points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string field = "points[" + std::to_string(i) + "]";
    if (!pts[i].is_array()) throw InputError(field + ": expected an array of coordinates");
    if (pts[i].size() != d) {
      throw InputError(field + ": expected " + std::to_string(d) + " coordinates, got " + std::to_string(pts[i].size()));
    }
    std::vector<double> c;
    for (std::size_t k = 0; k < d; ++k) c.push_back(finite_number(pts[i][k], field + "[" + std::to_string(k) + "]"));
    points.emplace_back(std::move(c));
  }
  return Profile(std::move(points));
}

Profile load_profile_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_profile_json(ss.str());
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json to_json(const Point& p) {
  Json a = Json::array();
  for (double x : p.coords()) a.push_back(x);
  return a;
}

Json to_json(const Profile& profile) {
  Json a = Json::array();
  for (const Point& p : profile.points()) a.push_back(to_json(p));
  return a;
}

Json to_json(const Lottery& lot) {
  Json a = Json::array();
  for (const Atom& atom : lot.atoms()) a.push_back(Json{{"weight", atom.weight}, {"point", to_json(atom.point)}});
  return a;
}

Json to_json(const Witness& w) {
  Json j;
  j["kind"] = w.kind;
  j["profile"] = to_json(w.profile);
  Json coalition = Json::array();
  for (std::size_t i : w.coalition) coalition.push_back(i + 1);
  j["coalition"] = coalition;
  Json lies = Json::array();
  for (const Point& p : w.misreports) lies.push_back(to_json(p));
  j["misreports"] = lies;
  Json deltas = Json::array();
  for (const AgentDelta& d : w.per_agent_delta) {
    deltas.push_back(Json{{"agent", d.agent + 1}, {"cost_before", d.cost_before}, {"cost_after", d.cost_after}});
  }
  j["per_agent_delta"] = deltas;
  if (w.shift) j["shift"] = to_json(*w.shift);
  if (!w.note.empty()) j["note"] = w.note;
  return j;
}

Point point_from_json(const Json& j) {
  if (!j.is_array()) throw InputError("expected a coordinate array");
  std::vector<double> c;
  for (const Json& x : j) c.push_back(finite_number(x, "coordinate"));
  return Point(std::move(c));
}

Profile profile_from_json(const Json& j) {
  if (!j.is_array()) throw InputError("expected an array of points");
  std::vector<Point> pts;
  for (const Json& p : j) pts.push_back(point_from_json(p));
  return Profile(std::move(pts));
}

Json make_report(const std::string& scenario, const std::string& spec, const std::string& norm,
                 std::uint64_t seed) {
  Json r;
  r["tool_version"] = kToolVersion;
  r["scenario"] = scenario;
  r["spec"] = spec;
  r["norm"] = norm;
  r["seed"] = seed;
  r["objective_values"] = Json::object();
  r["verdicts"] = Json::array();
  r["ratio_interval"] = nullptr;
  r["witnesses"] = Json::array();
  return r;
}

void add_verdict(Json& report, const PropertyVerdict& v, const std::string& expected, bool consistent) {
  Json j;
  j["property"] = v.property;
  j["status"] = to_string(v.status);
  j["expected"] = expected;
  j["consistent"] = consistent;
  j["margin"] = number(v.margin);
  j["flags"] = v.flags;
  if (v.pair) j["pair"] = Json::array({v.pair->first + 1, v.pair->second + 1});
  if (v.witness) {
    j["witness"] = report["witnesses"].size();
    report["witnesses"].push_back(to_json(*v.witness));
  } else {
    j["witness"] = nullptr;
  }
  report["verdicts"].push_back(std::move(j));
}

bool report_consistent(const Json& report) {
  for (const Json& v : report.at("verdicts")) {
    if (!v.at("consistent").get<bool>()) return false;
  }
  return true;
}

std::vector<std::string> summary_lines(const Json& report) {
  std::vector<std::string> out;
  out.push_back("scenario " + report.at("scenario").get<std::string>() + "  mech " +
                report.at("spec").get<std::string>() + "  norm " + report.at("norm").get<std::string>() + "  seed " +
                std::to_string(report.at("seed").get<std::uint64_t>()));
  for (const auto& [key, value] : report.at("objective_values").items()) {
    out.push_back("  " + key + " = " + (value.is_number() ? format_number(value.get<double>()) : value.dump()));
  }
  for (const Json& v : report.at("verdicts")) {
    std::string line = "  " + v.at("property").get<std::string>() + ": " + v.at("status").get<std::string>() +
                       " (expected " + v.at("expected").get<std::string>() + ")";
    if (!v.at("consistent").get<bool>()) line += "  INCONSISTENT";
    if (!v.at("witness").is_null()) line += "  witness #" + std::to_string(v.at("witness").get<std::size_t>());
    for (const Json& f : v.at("flags")) line += "  [" + f.get<std::string>() + "]";
    out.push_back(std::move(line));
  }
  const Json& ri = report.at("ratio_interval");
  if (!ri.is_null()) {
    auto end = [](const Json& x) { return x.is_null() ? std::string("inf") : format_number(x.get<double>()); };
    out.push_back("  ratio interval [" + end(ri[0]) + ", " + end(ri[1]) + "]");
  }
  std::size_t k = 0;
  for (const Json& w : report.at("witnesses")) {
    std::string line = "  witness #" + std::to_string(k++) + " " + w.at("kind").get<std::string>();
    for (const Json& d : w.at("per_agent_delta")) {
      line += "  agent " + std::to_string(d.at("agent").get<std::size_t>()) + ": " +
              format_number(d.at("cost_before").get<double>()) + " -> " +
              format_number(d.at("cost_after").get<double>());
    }
    out.push_back(std::move(line));
  }
  out.push_back(report_consistent(report) ? "result: consistent" : "result: INCONSISTENT");
  return out;
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto row = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += '\n';
  };
  row(table.header);
  for (const auto& r : table.rows) row(r);
  return out;
}

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> cur;
  std::string cell;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      cur.push_back(std::move(cell));
      cell.clear();
      any = true;
    } else if (c == '\n') {
      cur.push_back(std::move(cell));
      cell.clear();
      rows.push_back(std::move(cur));
      cur.clear();
      any = false;
    } else if (c != '\r') {
      cell += c;
      any = true;
    }
  }
  if (quoted) throw InputError("csv: unterminated quoted field");
  if (any) {
    cur.push_back(std::move(cell));
    rows.push_back(std::move(cur));
  }
  if (rows.empty()) throw InputError("csv: empty table");
  CsvTable t{rows.front(), {rows.begin() + 1, rows.end()}};
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i].size() != t.header.size()) throw InputError("csv: row " + std::to_string(i + 2) + " has wrong width");
  }
  return t;
}

}  // namespace facloc::cli
