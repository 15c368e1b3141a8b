#ifndef STRECOVER_TEXT_FORMAT_HPP_
#define STRECOVER_TEXT_FORMAT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small helpers shared by the CSV readers and writers.
namespace strecover::text {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

std::string_view trim(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

// Reads the whole file, throwing IoError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes `contents` atomically enough for our purposes (truncate + write).
void write_file(const std::filesystem::path& path, std::string_view contents);

// Splits file contents into lines, accepting LF or CRLF and an optional
// trailing newline.
std::vector<std::string_view> lines(std::string_view contents);

}  // namespace strecover::text

#endif  // STRECOVER_TEXT_FORMAT_HPP_
