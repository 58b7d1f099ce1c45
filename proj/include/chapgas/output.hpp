#pragma once

// Deterministic structured output: CSV series (17 significant digits, LF,
// UTF-8) and the versioned JSON run report.

#include <string>
#include <vector>

#include <json.hpp>

namespace chapgas {

using Json = nlohmann::ordered_json;

// Shortest exact-round-trip-capable decimal form (17 significant digits).
std::string fmt17(double v);

// CSV with a header row; every row must match the column count.
void write_series(const std::string& path, const std::vector<std::string>& columns,
                  const std::vector<std::vector<std::string>>& rows);

void write_report(const std::string& path, const Json& report);

// Numeric report entry tagged with the tolerance it was computed under.
Json tagged(double value, double tol);

}  // namespace chapgas
