#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cage::text {

// Decodes UTF-8 into code points. Invalid sequences decode to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

// Collapses every run of whitespace into one ASCII space and trims both ends.
std::string normalize_whitespace(std::string_view s);

// Case fold (ASCII and Latin-1 letters) after whitespace normalization. This is
// the comparison key used by label matching throughout.
std::string fold(std::string_view s);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_icase(std::string_view s, std::string_view prefix);

}  // namespace cage::text
