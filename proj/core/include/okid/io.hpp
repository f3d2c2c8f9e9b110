#ifndef OKID_IO_HPP
#define OKID_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace okid {

// Shortest-exact decimal formatting ("%.17g") so CSV round-trips are
// bit-identical.
std::string format_double(double v);

// Writes to "<path>.tmp" then renames, so readers never see partial files.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

// Header-free numeric CSV.  Every row must have the same column count.
std::vector<std::vector<double>> read_csv(const std::filesystem::path& path);

}  // namespace okid

#endif
