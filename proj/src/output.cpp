#include "chapgas/output.hpp"

#include <cstdio>
#include <fstream>

#include "chapgas/errors.hpp"

namespace chapgas {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_series(const std::string& path, const std::vector<std::string>& columns,
                  const std::vector<std::vector<std::string>>& rows) {
    if (columns.empty()) throw Error("series '" + path + "' has no columns");
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!out) throw Error("cannot open '" + path + "' for writing");
    for (size_t c = 0; c < columns.size(); ++c) {
        if (c) out << ',';
        out << columns[c];
    }
    out << '\n';
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != columns.size())
            throw Error("series '" + path + "': row " + std::to_string(r) + " has " +
                        std::to_string(rows[r].size()) + " cells, expected " +
                        std::to_string(columns.size()));
        for (size_t c = 0; c < rows[r].size(); ++c) {
            if (c) out << ',';
            out << rows[r][c];
        }
        out << '\n';
    }
    out.flush();
    if (!out) throw Error("write failed for '" + path + "'");
}

void write_report(const std::string& path, const Json& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << report.dump(2) << '\n';
    out.flush();
    if (!out) throw Error("write failed for '" + path + "'");
}

Json tagged(double value, double tol) { return Json{{"value", value}, {"tol", tol}}; }

}  // namespace chapgas
