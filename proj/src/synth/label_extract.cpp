#include "cage/synth/label_extract.hpp"

#include <cctype>
#include <optional>
#include <span>

#include "cage/text.hpp"

namespace cage::synth {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// ---------------------------------------------------------------- python ---

enum class TokKind { ident, string, punct, other };

struct Token {
  TokKind kind;
  std::string text;            // identifier name, punctuation, or decoded string value
  bool literal = true;         // false for f-strings with replacement fields
  std::size_t offset = 0;
};

void append_codepoint(std::string& out, char32_t cp) { out += text::encode_utf8(std::u32string(1, cp)); }

// Decodes a python escape sequence starting at s[i] == '\\'; returns chars consumed.
std::size_t decode_escape(std::string_view s, std::size_t i, std::string& out) {
  if (i + 1 >= s.size()) {
    out.push_back('\\');
    return 1;
  }
  const char c = s[i + 1];
  auto hex = [&](std::size_t start, std::size_t n) -> std::optional<char32_t> {
    if (start + n > s.size()) return std::nullopt;
    char32_t v = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const char h = s[start + k];
      if (!std::isxdigit(static_cast<unsigned char>(h))) return std::nullopt;
      v = v * 16 + static_cast<char32_t>(std::isdigit(static_cast<unsigned char>(h)) ? h - '0' : (std::tolower(h) - 'a' + 10));
    }
    return v;
  };
  switch (c) {
    case 'n': out.push_back('\n'); return 2;
    case 't': out.push_back('\t'); return 2;
    case 'r': out.push_back('\r'); return 2;
    case '\\': out.push_back('\\'); return 2;
    case '\'': out.push_back('\''); return 2;
    case '"': out.push_back('"'); return 2;
    case '\n': return 2;
    case 'x':
      if (auto v = hex(i + 2, 2)) {
        append_codepoint(out, *v);
        return 4;
      }
      break;
    case 'u':
      if (auto v = hex(i + 2, 4)) {
        append_codepoint(out, *v);
        return 6;
      }
      break;
    case 'U':
      if (auto v = hex(i + 2, 8)) {
        append_codepoint(out, *v);
        return 10;
      }
      break;
    default: break;
  }
  out.push_back('\\');
  out.push_back(c);
  return 2;
}

std::vector<Token> tokenize_python(std::string_view s) {
  std::vector<Token> toks;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (c == '\\' && i + 1 < s.size() && s[i + 1] == '\n') {
      i += 2;
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    // String literal, possibly prefixed.
    std::size_t p = i;
    bool raw = false, fstr = false;
    while (p < s.size() && p - i < 2 && std::string_view("rRbBuUfF").find(s[p]) != std::string_view::npos) {
      raw = raw || s[p] == 'r' || s[p] == 'R';
      fstr = fstr || s[p] == 'f' || s[p] == 'F';
      ++p;
    }
    if (p < s.size() && (s[p] == '"' || s[p] == '\'') && (p == i || !is_ident_char(i > 0 ? s[i - 1] : ' '))) {
      const char q = s[p];
      const bool triple = p + 2 < s.size() && s[p + 1] == q && s[p + 2] == q;
      const std::size_t start = i;
      std::size_t j = p + (triple ? 3 : 1);
      std::string value;
      bool closed = false;
      while (j < s.size()) {
        if (s[j] == '\\' && !raw) {
          j += decode_escape(s, j, value);
          continue;
        }
        if (s[j] == '\\' && raw && j + 1 < s.size()) {
          value.push_back(s[j]);
          value.push_back(s[j + 1]);
          j += 2;
          continue;
        }
        if (!triple && s[j] == '\n') break;
        if (s[j] == q && (!triple || (j + 2 < s.size() && s[j + 1] == q && s[j + 2] == q))) {
          j += triple ? 3 : 1;
          closed = true;
          break;
        }
        value.push_back(s[j]);
        ++j;
      }
      if (!closed) throw ExtractionError("unterminated string literal", start);
      Token t{TokKind::string, value, true, start};
      if (fstr) {
        std::string unescaped;
        for (std::size_t k = 0; k < value.size(); ++k) {
          if ((value[k] == '{' || value[k] == '}') && k + 1 < value.size() && value[k + 1] == value[k]) {
            unescaped.push_back(value[k]);
            ++k;
          } else if (value[k] == '{' || value[k] == '}') {
            t.literal = false;
          } else {
            unescaped.push_back(value[k]);
          }
        }
        t.text = unescaped;
      }
      toks.push_back(std::move(t));
      i = j;
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && is_ident_char(s[j])) ++j;
      toks.push_back({TokKind::ident, std::string(s.substr(i, j - i)), true, i});
      i = j;
      continue;
    }
    if (std::string_view("()[]{},=.").find(c) != std::string_view::npos) {
      // `==` is not a keyword separator.
      if (c == '=' && i + 1 < s.size() && s[i + 1] == '=') {
        toks.push_back({TokKind::other, "==", true, i});
        i += 2;
        continue;
      }
      toks.push_back({TokKind::punct, std::string(1, c), true, i});
      ++i;
      continue;
    }
    toks.push_back({TokKind::other, std::string(1, c), true, i});
    ++i;
  }
  return toks;
}

bool is_punct(const Token& t, char c) { return t.kind == TokKind::punct && t.text.size() == 1 && t.text[0] == c; }

std::vector<std::string> extract_python(std::string_view source) {
  const auto toks = tokenize_python(source);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind != TokKind::ident || (t.text != "text" && t.text != "annotate")) continue;
    if (!is_punct(toks[i + 1], '(')) continue;
    if (i > 0 && toks[i - 1].kind == TokKind::ident && toks[i - 1].text == "def") continue;
    const std::size_t positional_target = t.text == "text" ? 2 : 0;

    // Split the argument list at depth-0 commas.
    std::vector<std::vector<const Token*>> args(1);
    int depth = 0;
    std::size_t j = i + 2;
    bool closed = false;
    for (; j < toks.size(); ++j) {
      const Token& a = toks[j];
      if (a.kind == TokKind::punct && (a.text == "(" || a.text == "[" || a.text == "{")) ++depth;
      if (a.kind == TokKind::punct && (a.text == ")" || a.text == "]" || a.text == "}")) {
        if (depth == 0) {
          closed = true;
          break;
        }
        --depth;
      }
      if (depth == 0 && is_punct(a, ',')) {
        args.emplace_back();
        continue;
      }
      args.back().push_back(&a);
    }
    if (!closed) continue;

    std::optional<std::string> value;
    std::size_t positional = 0;
    for (const auto& arg : args) {
      if (arg.empty()) continue;
      std::span<const Token* const> expr(arg);
      bool keyword = arg.size() >= 2 && arg[0]->kind == TokKind::ident && is_punct(*arg[1], '=');
      bool target = false;
      if (keyword) {
        target = arg[0]->text == "s" || arg[0]->text == "text";
        expr = expr.subspan(2);
      } else {
        target = positional == positional_target;
        ++positional;
      }
      if (!target || expr.empty()) continue;
      std::string concatenated;
      bool all_literal = true;
      for (const Token* e : expr) {
        if (e->kind != TokKind::string || !e->literal) {
          all_literal = false;
          break;
        }
        concatenated += e->text;
      }
      if (all_literal) value = concatenated;
      break;
    }
    if (value) labels.push_back(*value);
    i = j;
  }
  return labels;
}

// ------------------------------------------------------------------ tikz ---

std::string clean_tex(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '\\') {
      if (i + 1 < s.size() && s[i + 1] == '\\') {
        out.push_back(' ');
        ++i;
        // Optional spacing argument after a line break, e.g. \\[2pt].
        if (i + 1 < s.size() && s[i + 1] == '[') {
          auto close = s.find(']', i + 1);
          if (close != std::string_view::npos) i = close;
        }
        continue;
      }
      if (i + 1 < s.size() && std::isalpha(static_cast<unsigned char>(s[i + 1]))) {
        std::size_t j = i + 1;
        while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j]))) ++j;
        while (j < s.size() && s[j] == ' ') ++j;
        i = j - 1;
        continue;
      }
      if (i + 1 < s.size()) {
        out.push_back(s[i + 1]);
        ++i;
      }
      continue;
    }
    if (c == '{' || c == '}' || c == '$' || c == '~') {
      if (c == '~') out.push_back(' ');
      continue;
    }
    out.push_back(c);
  }
  return text::normalize_whitespace(out);
}

// Skips a balanced group opened at s[i]; returns the index after the closer.
std::size_t skip_group(std::string_view s, std::size_t i, char open, char close) {
  int depth = 0;
  for (std::size_t j = i; j < s.size(); ++j) {
    if (s[j] == '\\') {
      ++j;
      continue;
    }
    if (s[j] == open) ++depth;
    if (s[j] == close && --depth == 0) return j + 1;
  }
  throw ExtractionError(std::string("unbalanced '") + open + "'", i);
}

std::string strip_tex_comments(std::string_view s) {
  std::string out(s);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] == '\\') {
      ++i;
      continue;
    }
    if (out[i] == '%') {
      // Blank the comment but keep offsets stable.
      while (i < out.size() && out[i] != '\n') out[i++] = ' ';
    }
  }
  return out;
}

std::vector<std::string> extract_tikz(std::string_view original) {
  const std::string src = strip_tex_comments(original);
  const std::string_view s = src;
  std::vector<std::string> labels;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t at = s.find("node", i);
    if (at == std::string_view::npos) break;
    i = at + 4;
    const char prev = at > 0 ? s[at - 1] : ' ';
    if (std::isalnum(static_cast<unsigned char>(prev)) || prev == '_') continue;
    if (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) continue;

    // Only options, names, coordinates and `at` may precede the text group.
    std::size_t j = i;
    bool found = false;
    while (j < s.size()) {
      const char c = s[j];
      if (is_space(c)) {
        ++j;
      } else if (c == '[') {
        j = skip_group(s, j, '[', ']');
      } else if (c == '(') {
        j = skip_group(s, j, '(', ')');
      } else if (c == '+' && j + 1 < s.size() && (s[j + 1] == '(' || s[j + 1] == '+')) {
        ++j;
      } else if (s.substr(j, 2) == "at" && (j + 2 >= s.size() || !std::isalpha(static_cast<unsigned char>(s[j + 2])))) {
        j += 2;
      } else if (c == '{') {
        found = true;
        break;
      } else {
        break;
      }
    }
    if (!found) continue;
    const std::size_t end = skip_group(s, j, '{', '}');
    const std::string label = clean_tex(s.substr(j + 1, end - j - 2));
    if (!label.empty()) labels.push_back(label);
    i = end;
  }
  return labels;
}

// ------------------------------------------------------------------- svg ---

std::string decode_entities(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    const std::string_view name = s.substr(i + 1, semi - i - 1);
    if (name == "amp") out += '&';
    else if (name == "lt") out += '<';
    else if (name == "gt") out += '>';
    else if (name == "quot") out += '"';
    else if (name == "apos") out += '\'';
    else if (name == "nbsp") out += ' ';
    else if (!name.empty() && name[0] == '#') {
      char32_t cp = 0;
      try {
        cp = static_cast<char32_t>(name.size() > 1 && (name[1] == 'x' || name[1] == 'X')
                                       ? std::stoul(std::string(name.substr(2)), nullptr, 16)
                                       : std::stoul(std::string(name.substr(1))));
      } catch (...) {
        out.push_back('&');
        continue;
      }
      append_codepoint(out, cp);
    } else {
      out.push_back('&');
      continue;
    }
    i = semi;
  }
  return out;
}

// Returns index just past the '>' closing the tag that starts at s[i] == '<'.
std::size_t skip_tag(std::string_view s, std::size_t i) {
  char quote = 0;
  for (std::size_t j = i + 1; j < s.size(); ++j) {
    if (quote) {
      if (s[j] == quote) quote = 0;
      continue;
    }
    if (s[j] == '"' || s[j] == '\'') {
      quote = s[j];
      continue;
    }
    if (s[j] == '>') return j + 1;
  }
  throw ExtractionError(quote ? "unterminated attribute value" : "unterminated tag", i);
}

bool tag_named(std::string_view s, std::size_t i, std::string_view name) {
  // s[i] == '<'
  if (s.substr(i + 1, name.size()) != name) return false;
  const std::size_t k = i + 1 + name.size();
  return k < s.size() && (is_space(s[k]) || s[k] == '>' || s[k] == '/');
}

std::vector<std::string> extract_svg(std::string_view s) {
  std::vector<std::string> labels;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t lt = s.find('<', i);
    if (lt == std::string_view::npos) break;
    if (s.substr(lt, 4) == "<!--") {
      const auto end = s.find("-->", lt + 4);
      if (end == std::string_view::npos) throw ExtractionError("unterminated comment", lt);
      i = end + 3;
      continue;
    }
    if (s.substr(lt, 9) == "<![CDATA[") {
      const auto end = s.find("]]>", lt + 9);
      if (end == std::string_view::npos) throw ExtractionError("unterminated CDATA section", lt);
      i = end + 3;
      continue;
    }
    const std::size_t after = skip_tag(s, lt);
    if (!tag_named(s, lt, "text")) {
      i = after;
      continue;
    }
    if (s[after - 2] == '/') {  // <text/>
      i = after;
      continue;
    }
    std::string content;
    int depth = 1;
    std::size_t j = after;
    while (depth > 0) {
      if (j >= s.size()) throw ExtractionError("unterminated <text> element", lt);
      if (s[j] != '<') {
        const auto next = s.find('<', j);
        const std::size_t stop = next == std::string_view::npos ? s.size() : next;
        content += decode_entities(s.substr(j, stop - j));
        j = stop;
        continue;
      }
      if (s.substr(j, 9) == "<![CDATA[") {
        const auto end = s.find("]]>", j + 9);
        if (end == std::string_view::npos) throw ExtractionError("unterminated CDATA section", j);
        content += s.substr(j + 9, end - j - 9);
        j = end + 3;
        continue;
      }
      if (s.substr(j, 4) == "<!--") {
        const auto end = s.find("-->", j + 4);
        if (end == std::string_view::npos) throw ExtractionError("unterminated comment", j);
        j = end + 3;
        continue;
      }
      const std::size_t tag_end = skip_tag(s, j);
      if (s.substr(j, 6) == "</text") {
        --depth;
      } else if (tag_named(s, j, "text") && s[tag_end - 2] != '/') {
        ++depth;
      }
      j = tag_end;
    }
    const std::string label = text::normalize_whitespace(content);
    if (!label.empty()) labels.push_back(label);
    i = j;
  }
  return labels;
}

}  // namespace

std::vector<std::string> extract_label_calls(std::string_view source, RenderLanguage language) {
  switch (language) {
    case RenderLanguage::python_matplotlib: return extract_python(source);
    case RenderLanguage::latex_tikz: return extract_tikz(source);
    case RenderLanguage::svg: return extract_svg(source);
  }
  return {};
}

}  // namespace cage::synth
