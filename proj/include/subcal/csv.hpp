#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace subcal::csv {

std::vector<std::string_view> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

// Strict numeric parsing of a whole field; throws DataError mentioning `where`.
double parse_double(std::string_view field, std::string_view where);
long long parse_int(std::string_view field, std::string_view where);

// Shortest representation that round-trips.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);

// Opens `path` for writing (creating parent directories) and emits
// `# <comment>` first when a comment is given. Throws IoError.
std::ofstream open_output(const std::filesystem::path& path, std::string_view header_comment);

}  // namespace subcal::csv
