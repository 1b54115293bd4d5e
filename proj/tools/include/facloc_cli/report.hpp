#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "facloc/geometry.hpp"
#include "facloc/objectives.hpp"
#include "facloc/properties.hpp"

namespace facloc::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Thrown for malformed input files; the message names the offending line or field.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Parses {"d": int, "points": [[real, ...], ...]}.
Profile parse_profile_json(const std::string& text);
Profile load_profile_file(const std::string& path);

Json to_json(const Point& p);
Json to_json(const Profile& profile);
Json to_json(const Lottery& lot);
/// Agent indices become 1-based.
Json to_json(const Witness& w);
Point point_from_json(const Json& j);
Profile profile_from_json(const Json& j);

/// Plain numbers, with infinities as null since JSON has no encoding for them.
Json number(double x);

/// A report skeleton carrying every required field in a fixed order.
Json make_report(const std::string& scenario, const std::string& spec, const std::string& norm,
                 std::uint64_t seed);

/// Appends the verdict, and its witness when present, to the report.
void add_verdict(Json& report, const PropertyVerdict& v, const std::string& expected, bool consistent);

/// Human summary derived from report fields only, so it reproduces from a saved file.
std::vector<std::string> summary_lines(const Json& report);

/// True when every verdict in the report agrees with its expectation.
bool report_consistent(const Json& report);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

std::string format_number(double x);

}  // namespace facloc::cli
