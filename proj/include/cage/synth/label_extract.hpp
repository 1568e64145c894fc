#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cage/error.hpp"
#include "cage/synth/types.hpp"

namespace cage::synth {

class ExtractionError : public Error {
 public:
  ExtractionError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Lexical scan for the text arguments of label-rendering constructs:
//   python-matplotlib  text(x, y, "s") / annotate("s", ...) on any receiver,
//                      or the s=/text= keyword
//   latex-tikz         \node ... {content} and path `node ... {content}`
//   svg                <text ...>content</text> (nested tags flattened)
// Labels are returned in source order with duplicates kept. Non-literal
// arguments are skipped. Throws ExtractionError on an unterminated literal,
// brace group or element.
std::vector<std::string> extract_label_calls(std::string_view source, RenderLanguage language);

}  // namespace cage::synth
