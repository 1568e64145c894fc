#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace cage::metrics {

// Currency amount held as an integer number of micro-units, so that sums and
// integer multiples are exact decimals.
class Money {
 public:
  constexpr Money() = default;
  static constexpr Money from_micros(std::int64_t micros) { return Money(micros); }
  // Accepts "0.04", "960", "1,920", "$0.040". Throws ParseError on more than
  // six decimal places or stray characters.
  static Money parse(std::string_view text);

  constexpr std::int64_t micros() const { return micros_; }
  double to_double() const { return static_cast<double>(micros_) / 1e6; }

  // Rounded half away from zero to `decimals` places; `grouping` adds
  // thousands separators.
  std::string format(int decimals, bool grouping = false) const;
  // Shortest exact decimal ("0.04", "960", "19.2").
  std::string to_string() const;

  friend constexpr Money operator+(Money a, Money b) { return Money(a.micros_ + b.micros_); }
  friend constexpr Money operator*(Money a, std::int64_t k) { return Money(a.micros_ * k); }
  friend constexpr auto operator<=>(const Money&, const Money&) = default;

 private:
  constexpr explicit Money(std::int64_t micros) : micros_(micros) {}
  std::int64_t micros_ = 0;
};

enum class RetryModel {
  single_retry,  // each failed image is regenerated once: 1 + r
  geometric,     // regenerate until success: 1 / (1 - r)
};

RetryModel parse_retry_model(std::string_view name);
std::string_view to_string(RetryModel m);

struct CostScenario {
  Money per_image;
  int diagrams_per_deck = 12;
  int decks_per_week = 1;
  int weeks_per_year = 40;
  int teachers = 50;
  double regen_rate = 0.0;
  RetryModel retry_model = RetryModel::geometric;

  // Throws ValidationError unless 0 <= r < 1 and every count is positive.
  void validate() const;
};

struct CostBreakdown {
  double multiplier = 1.0;
  Money per_image_eff;
  Money per_deck;
  Money per_teacher_year;
  Money per_school_year;
};

double retry_multiplier(double regen_rate, RetryModel model);

// Each amount is per_image * multiplier * (count), rounded once to the micro.
// With multiplier 1 every value is exact.
CostBreakdown effective_cost(const CostScenario& s);

}  // namespace cage::metrics
