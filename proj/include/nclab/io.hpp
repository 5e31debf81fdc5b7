#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace nclab {

// Shortest decimal string that round-trips the double (std::to_chars).
std::string format_double(double value);

// RFC 4180: fields containing comma, quote or newline are quoted, embedded
// quotes doubled. Numeric fields are emitted by format_double, so output is
// byte-stable for identical inputs.
std::string csv_escape(const std::string& field);

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Minimal self-contained line chart; one polyline over an axis box with tick
// labels. Good enough for eyeballing traces without a plotting dependency.
void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nclab
