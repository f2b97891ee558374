#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace signdict {

// Splits on '\n'; a trailing newline does not produce an empty last line.
std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);
// Splits on runs of spaces/tabs, dropping empties.
std::vector<std::string_view> split_ws(std::string_view text);
std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);

// Strict numeric parsing: the whole token must be consumed.
bool parse_double(std::string_view token, double& out);
bool parse_int(std::string_view token, long long& out);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace signdict
