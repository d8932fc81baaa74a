#include "acbm/base.hpp"

namespace acbm {

namespace {

using BigInt = boost::multiprecision::cpp_int;

BigInt pow10(std::size_t k) {
  BigInt v(1);
  for (std::size_t i = 0; i < k; ++i) v *= 10;
  return v;
}

}  // namespace

Rational rational_from_string(std::string_view text) {
  std::size_t i = 0;
  auto fail = [&](const char* why) -> Rational {
    throw Error(std::string("bad rational literal '") + std::string(text) +
                "': " + why);
  };
  if (text.empty()) return fail("empty");

  bool neg = false;
  if (text[i] == '+' || text[i] == '-') {
    neg = text[i] == '-';
    ++i;
  }
  auto digits = [&]() -> std::string {
    std::string d;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') d += text[i++];
    return d;
  };

  const std::string ip = digits();
  if (ip.empty()) return fail("expected digits");

  Rational value;
  if (i < text.size() && text[i] == '.') {
    ++i;
    const std::string fp = digits();
    if (fp.empty()) return fail("expected digits after '.'");
    value = Rational(BigInt(ip + fp), pow10(fp.size()));
  } else if (i < text.size() && text[i] == '/') {
    ++i;
    bool dneg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      dneg = text[i] == '-';
      ++i;
    }
    const std::string q = digits();
    if (q.empty()) return fail("expected digits after '/'");
    BigInt den(q);
    if (den == 0) return fail("zero denominator");
    value = Rational(BigInt(ip), dneg ? BigInt(-den) : den);
  } else {
    value = Rational(BigInt(ip));
  }
  if (i != text.size()) return fail("trailing characters");
  return neg ? Rational(-value) : value;
}

std::string rational_to_string(const Rational& r) {
  const auto num = boost::multiprecision::numerator(r);
  const auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

}  // namespace acbm
