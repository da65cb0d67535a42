#include "mmp/time.hpp"

#include <charconv>
#include <numeric>
#include <stdexcept>

namespace mmp {

namespace {

std::int64_t parse_int(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("empty integer");
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::invalid_argument("bad integer literal '" + std::string(s) + "'");
  return v;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty rational literal");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num = parse_int(text.substr(0, slash));
    const auto den = parse_int(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  }
  bool negative = false;
  std::string_view body = text;
  if (body.front() == '-' || body.front() == '+') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  const auto dot = body.find('.');
  if (dot == std::string_view::npos) {
    const auto v = parse_int(body);
    return Rational(negative ? -v : v);
  }
  const auto int_part = body.substr(0, dot);
  const auto frac_part = body.substr(dot + 1);
  if (int_part.empty() && frac_part.empty())
    throw std::invalid_argument("bad decimal literal '" + std::string(text) + "'");
  if (frac_part.size() > 15) throw std::invalid_argument("too many decimals in '" + std::string(text) + "'");
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac_part.size(); ++i) den *= 10;
  const std::int64_t ip = int_part.empty() ? 0 : parse_int(int_part);
  const std::int64_t fp = frac_part.empty() ? 0 : parse_int(frac_part);
  if (ip < 0 || fp < 0) throw std::invalid_argument("bad decimal literal '" + std::string(text) + "'");
  Rational r(ip * den + fp, den);
  return negative ? -r : r;
}

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

ExtRational parse_ext_rational(std::string_view text) {
  if (text == "inf" || text == "∞") return ExtRational::infinity();
  return ExtRational(parse_rational(text));
}

std::string to_string(const ExtRational& r) {
  return r.is_infinite() ? std::string("inf") : to_string(r.value());
}

std::int64_t lcm_of_denominators(std::int64_t acc, const Rational& r) {
  return std::lcm(acc, r.denominator());
}

}  // namespace mmp
