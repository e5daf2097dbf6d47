#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mesbench::cli {

inline constexpr const char *kVersion = "0.1.0";

// Entry point shared by the executable and the tests. Returns 0 on success,
// 1 on usage errors (nothing written), 2 on runtime failures.
int run(int argc, const char *const *argv);
int run(const std::vector<std::string> &args); // args without the program name

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path &p);

// SVG rendering of the CSV artifacts.
void plot_dispatch_svg(std::istream &csv, std::ostream &svg, const std::vector<std::string> &columns = {});
void plot_curve_svg(std::istream &csv, std::ostream &svg);

} // namespace mesbench::cli
