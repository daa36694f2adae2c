#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wic::text {

std::string lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

// True for tokens made only of punctuation/symbols, or that parse as numbers.
bool is_punct_or_numeral(std::string_view token);

std::vector<std::string> split_ws(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
// UTF-8 code points as byte slices; a malformed lead byte counts as one point.
std::vector<std::string_view> codepoints(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace wic::text
