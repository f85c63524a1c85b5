#pragma once

#include <string>
#include <vector>

namespace advreg {

// Shortest decimal string that round-trips the double (to_chars); integers
// print without a decimal point. Keeps CSV output byte-stable across runs.
std::string format_double(double v);

// Writes header + rows to path via a temporary file and atomic rename, so a
// failed run never leaves a partial CSV behind. Throws IoError with the path.
void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

}  // namespace advreg
