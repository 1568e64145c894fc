#include "cage/metrics/cost.hpp"

#include <cmath>
#include <cstdlib>

#include "cage/error.hpp"

namespace cage::metrics {

Money Money::parse(std::string_view text) {
  const std::string original(text);
  std::size_t i = 0;
  while (i < text.size() && text[i] == ' ') ++i;
  bool negative = false;
  if (i < text.size() && text[i] == '-') {
    negative = true;
    ++i;
  }
  if (i < text.size() && text[i] == '$') ++i;
  std::int64_t whole = 0, frac = 0;
  int frac_digits = 0;
  bool digits = false, in_frac = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c == ',' && !in_frac) continue;
    if (c == '.' && !in_frac) {
      in_frac = true;
      continue;
    }
    if (c == ' ') break;
    if (c < '0' || c > '9') throw ParseError("not a currency amount: " + original);
    digits = true;
    if (in_frac) {
      if (++frac_digits > 6) throw ParseError("more than 6 decimal places: " + original);
      frac = frac * 10 + (c - '0');
    } else {
      whole = whole * 10 + (c - '0');
      if (whole > 9'000'000'000'000LL) throw ParseError("amount out of range: " + original);
    }
  }
  for (; i < text.size(); ++i) {
    if (text[i] != ' ') throw ParseError("not a currency amount: " + original);
  }
  if (!digits) throw ParseError("not a currency amount: " + original);
  for (int k = frac_digits; k < 6; ++k) frac *= 10;
  const std::int64_t micros = whole * 1'000'000 + frac;
  return Money(negative ? -micros : micros);
}

std::string Money::format(int decimals, bool grouping) const {
  if (decimals < 0 || decimals > 6) throw ValidationError("decimals must be in [0, 6]");
  std::int64_t unit = 1;
  for (int k = decimals; k < 6; ++k) unit *= 10;
  const bool negative = micros_ < 0;
  std::int64_t m = std::llabs(micros_);
  m = (m + unit / 2) / unit;  // now in units of 10^-decimals
  std::int64_t scale = 1;
  for (int k = 0; k < decimals; ++k) scale *= 10;
  std::string whole = std::to_string(m / scale);
  if (grouping) {
    for (int pos = static_cast<int>(whole.size()) - 3; pos > 0; pos -= 3) whole.insert(static_cast<std::size_t>(pos), ",");
  }
  std::string out = (negative && m != 0 ? "-" : "") + whole;
  if (decimals > 0) {
    std::string frac = std::to_string(m % scale);
    out += "." + std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
  }
  return out;
}

std::string Money::to_string() const {
  std::string s = format(6);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

RetryModel parse_retry_model(std::string_view name) {
  if (name == "single-retry") return RetryModel::single_retry;
  if (name == "geometric") return RetryModel::geometric;
  throw ConfigError("unknown retry model: " + std::string(name));
}

std::string_view to_string(RetryModel m) { return m == RetryModel::single_retry ? "single-retry" : "geometric"; }

void CostScenario::validate() const {
  if (!(regen_rate >= 0.0 && regen_rate < 1.0)) throw ValidationError("regeneration rate must be in [0, 1)");
  if (diagrams_per_deck < 1 || decks_per_week < 1 || weeks_per_year < 1 || teachers < 1) {
    throw ValidationError("cost scenario counts must be positive");
  }
  if (per_image.micros() < 0) throw ValidationError("per-image cost is negative");
}

double retry_multiplier(double regen_rate, RetryModel model) {
  return model == RetryModel::single_retry ? 1.0 + regen_rate : 1.0 / (1.0 - regen_rate);
}

CostBreakdown effective_cost(const CostScenario& s) {
  s.validate();
  CostBreakdown out;
  out.multiplier = retry_multiplier(s.regen_rate, s.retry_model);
  auto scaled = [&](std::int64_t count) {
    const std::int64_t base = s.per_image.micros() * count;
    if (s.regen_rate == 0.0) return Money::from_micros(base);
    return Money::from_micros(std::llround(static_cast<double>(base) * out.multiplier));
  };
  const std::int64_t deck = s.diagrams_per_deck;
  const std::int64_t teacher = deck * s.decks_per_week * s.weeks_per_year;
  out.per_image_eff = scaled(1);
  out.per_deck = scaled(deck);
  out.per_teacher_year = scaled(teacher);
  out.per_school_year = scaled(teacher * s.teachers);
  return out;
}

}  // namespace cage::metrics
