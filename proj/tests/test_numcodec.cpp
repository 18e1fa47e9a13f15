#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "linseq/error.hpp"
#include "linseq/numcodec.hpp"

using namespace linseq;
using Toks = std::vector<std::string>;

namespace {

// printf's %e is correctly rounded on glibc; away from decimal ties it must
// agree with round_to_triplet.
std::optional<FloatTriplet> printf_oracle(double x, int digits) {
  char shortest[64];
  auto res = std::to_chars(shortest, shortest + sizeof shortest, x);
  std::string s(shortest, res.ptr);
  int sig = 0;
  bool leading = true;
  for (char c : s) {
    if (c == 'e') break;
    if (c < '0' || c > '9') continue;
    if (leading && c == '0') continue;
    leading = false;
    ++sig;
  }
  if (sig <= digits + 1) return std::nullopt;  // could be a tie

  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
  std::string t(buf);
  FloatTriplet out;
  std::size_t i = 0;
  if (t[0] == '-') {
    out.sign = -1;
    ++i;
  }
  std::int64_t m = 0;
  for (; t[i] != 'e'; ++i)
    if (t[i] != '.') m = m * 10 + (t[i] - '0');
  out.mantissa = m;
  out.exponent = std::stoi(t.substr(i + 1)) - (digits - 1);
  return out;
}

std::vector<EncodingScheme> presets() {
  return {EncodingScheme::p10(),    EncodingScheme::p100(),  EncodingScheme::p1000(),
          EncodingScheme::p10000(), EncodingScheme::b1999(), EncodingScheme::fp15()};
}

FloatTriplet random_triplet(std::mt19937_64& g, const EncodingScheme& s) {
  const int d = s.precision_digits;
  std::int64_t lo = 1;
  for (int i = 1; i < d; ++i) lo *= 10;
  std::uniform_int_distribution<std::int64_t> mant(lo, lo * 10 - 1);
  std::uniform_int_distribution<int> ex(s.min_exponent, s.max_exponent);
  if (g() % 50 == 0) return {};
  return {g() % 2 ? 1 : -1, mant(g), ex(g)};
}

}  // namespace

TEST(Rounding, HandExamples) {
  EXPECT_EQ(round_to_triplet(23.14069), (FloatTriplet{1, 231, -1}));
  EXPECT_EQ(round_to_triplet(-0.5), (FloatTriplet{-1, 500, -3}));
  EXPECT_EQ(round_to_triplet(0.0), (FloatTriplet{1, 0, 0}));
  EXPECT_EQ(round_to_triplet(-0.0), (FloatTriplet{1, 0, 0}));
  EXPECT_EQ(round_to_triplet(999.96), (FloatTriplet{1, 100, 1}));
  EXPECT_EQ(round_to_triplet(999.6), (FloatTriplet{1, 100, 1}));
  EXPECT_EQ(round_to_triplet(2.675), (FloatTriplet{1, 268, -2}));
  EXPECT_EQ(round_to_triplet(-2.675), (FloatTriplet{-1, 268, -2}));
  EXPECT_EQ(round_to_triplet(3.14159, 2), (FloatTriplet{1, 31, -1}));
  EXPECT_EQ(round_to_triplet(3.14159, 4), (FloatTriplet{1, 3142, -3}));
}

TEST(Rounding, MatchesPrintfAwayFromTies) {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> mag(-90.0, 90.0);
  int checked = 0;
  for (int i = 0; i < 200000; ++i) {
    const double x = (g() % 2 ? 1 : -1) * std::pow(10.0, mag(g));
    for (int d = 2; d <= 4; ++d) {
      const auto want = printf_oracle(x, d);
      if (!want) continue;
      ASSERT_EQ(round_to_triplet(x, d), *want) << x << " d=" << d;
      ++checked;
    }
  }
  EXPECT_GT(checked, 590000);
}

TEST(Rounding, ExponentClamp) {
  EXPECT_THROW(round_to_triplet(1e103), OverflowError);
  EXPECT_THROW(round_to_triplet(1e-102), OverflowError);
  EXPECT_THROW(round_to_triplet(std::nan("")), OverflowError);
  EXPECT_THROW(round_to_triplet(INFINITY), OverflowError);
  EXPECT_EQ(round_to_triplet(9.99e102), (FloatTriplet{1, 999, 100}));
  EXPECT_EQ(round_to_triplet(1e-98), (FloatTriplet{1, 100, -100}));
}

TEST(Rounding, Idempotent) {
  std::mt19937_64 g(3);
  for (const auto& s : presets()) {
    for (int i = 0; i < 20000; ++i) {
      const FloatTriplet t = random_triplet(g, s);
      ASSERT_EQ(round_to_triplet(triplet_to_value(t), s.precision_digits), t) << to_string(t);
    }
  }
}

TEST(Rounding, TripletToValue) {
  EXPECT_DOUBLE_EQ(triplet_to_value({1, 314, -2}), 3.14);
  EXPECT_EQ(triplet_to_value({1, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(triplet_to_value({-1, 602, 21}), -6.02e23);
}

TEST(Rounding, ValidateTriplet) {
  EXPECT_NO_THROW(validate_triplet({1, 100, 5}));
  EXPECT_THROW(validate_triplet({-1, 0, 0}), std::invalid_argument);
  EXPECT_THROW(validate_triplet({1, 0, 3}), std::invalid_argument);
  EXPECT_THROW(validate_triplet({1, 99, 0}), std::invalid_argument);
  EXPECT_THROW(validate_triplet({1, 1000, 0}), std::invalid_argument);
  EXPECT_THROW(validate_triplet({1, 100, 101}), std::invalid_argument);
  EXPECT_THROW(validate_triplet({2, 100, 0}), std::invalid_argument);
}

TEST(Schemes, Presets) {
  EXPECT_EQ(EncodingScheme::p10().arity(), 5);
  EXPECT_EQ(EncodingScheme::p100().arity(), 3);
  EXPECT_EQ(EncodingScheme::p1000().arity(), 3);
  EXPECT_EQ(EncodingScheme::p10000().arity(), 3);
  EXPECT_EQ(EncodingScheme::b1999().arity(), 2);
  EXPECT_EQ(EncodingScheme::fp15().arity(), 1);
  EXPECT_EQ(EncodingScheme::fp15().min_exponent, -8);
  EXPECT_EQ(EncodingScheme::fp15().max_exponent, 8);
  for (const auto& s : presets()) EXPECT_EQ(EncodingScheme::parse(s.name()), s) << s.name();
  EXPECT_EQ(EncodingScheme::parse("P1000"), EncodingScheme::p1000());
  EXPECT_EQ(EncodingScheme::parse("p16:4"), EncodingScheme::positional(16, 4));
  EXPECT_EQ(EncodingScheme::parse("b11"), EncodingScheme::balanced(5));
  EXPECT_THROW(EncodingScheme::parse("q10"), std::invalid_argument);
  EXPECT_THROW(EncodingScheme::parse("p10:5"), std::invalid_argument);
  EXPECT_THROW(EncodingScheme::positional(1), std::invalid_argument);
  EXPECT_THROW(EncodingScheme::float_token(13), std::invalid_argument);
}

TEST(Codec, TableExamples) {
  const FloatTriplet pi{1, 314, -2};
  const FloatTriplet avogadro{-1, 602, 21};
  EXPECT_EQ(encode_number(pi, EncodingScheme::p10()), (Toks{"+", "3", "1", "4", "E-2"}));
  EXPECT_EQ(encode_number(avogadro, EncodingScheme::p10()), (Toks{"-", "6", "0", "2", "E21"}));
  EXPECT_EQ(encode_number(pi, EncodingScheme::p1000()), (Toks{"+", "314", "E-2"}));
  EXPECT_EQ(encode_number(avogadro, EncodingScheme::p1000()), (Toks{"-", "602", "E21"}));
  EXPECT_EQ(encode_number(pi, EncodingScheme::b1999()), (Toks{"314", "E-2"}));
  EXPECT_EQ(encode_number(avogadro, EncodingScheme::b1999()), (Toks{"-602", "E21"}));
  EXPECT_EQ(encode_number(pi, EncodingScheme::fp15()), (Toks{"FP314/-2"}));
  EXPECT_EQ(encode_number(avogadro, EncodingScheme::fp15()), (Toks{"FP-602/21"}));
}

TEST(Codec, Zero) {
  EXPECT_EQ(encode_number({}, EncodingScheme::p10()), (Toks{"+", "0", "0", "0", "E0"}));
  EXPECT_EQ(encode_number({}, EncodingScheme::p1000()), (Toks{"+", "0", "E0"}));
  EXPECT_EQ(encode_number({}, EncodingScheme::b1999()), (Toks{"0", "E0"}));
  EXPECT_EQ(encode_number({}, EncodingScheme::fp15()), (Toks{"FP0/0"}));
}

TEST(Codec, DecodeExamples) {
  EXPECT_EQ(decode_number(Toks{"+", "2", "3", "1", "E-1"}, EncodingScheme::p10()),
            (FloatTriplet{1, 231, -1}));
  EXPECT_EQ(decode_number(Toks{"FP-602/21"}, EncodingScheme::fp15()),
            (FloatTriplet{-1, 602, 21}));
  EXPECT_THROW(decode_number(Toks{"+", "3", "1"}, EncodingScheme::p10()), ParseError);
}

TEST(Codec, DecodeRejectsMalformed) {
  const auto p10 = EncodingScheme::p10();
  const auto p1000 = EncodingScheme::p1000();
  EXPECT_THROW(decode_number(Toks{"+", "3", "1", "4", "E-2", "E-2"}, p10), ParseError);
  EXPECT_THROW(decode_number(Toks{"*", "3", "1", "4", "E-2"}, p10), ParseError);
  EXPECT_THROW(decode_number(Toks{"+", "3", "1", "10", "E-2"}, p10), ParseError);
  EXPECT_THROW(decode_number(Toks{"+", "0", "1", "4", "E-2"}, p10), ParseError);
  EXPECT_THROW(decode_number(Toks{"-", "0", "0", "0", "E0"}, p10), ParseError);
  EXPECT_THROW(decode_number(Toks{"+", "0", "0", "0", "E3"}, p10), ParseError);
  EXPECT_THROW(decode_number(Toks{"+", "3", "1", "4", "E101"}, p10), ParseError);
  EXPECT_THROW(decode_number(Toks{"+", "3", "1", "4", "E+2"}, p10), ParseError);
  EXPECT_THROW(decode_number(Toks{"+", "3", "1", "4", "E02"}, p10), ParseError);
  EXPECT_THROW(decode_number(Toks{"+", "099", "E0"}, p1000), ParseError);
  EXPECT_THROW(decode_number(Toks{"+", "99", "E0"}, p1000), ParseError);
  EXPECT_THROW(decode_number(Toks{"+", "1000", "E0"}, p1000), ParseError);
  EXPECT_THROW(decode_number(Toks{"FP602/21"}, p1000), ParseError);
  EXPECT_THROW(decode_number(Toks{"FP60/2"}, EncodingScheme::fp15()), ParseError);
  EXPECT_THROW(decode_number(Toks{"FP-0/0"}, EncodingScheme::fp15()), ParseError);
  EXPECT_THROW(decode_number(Toks{"1000", "E0"}, EncodingScheme::b1999()), ParseError);
  EXPECT_THROW(decode_number(Toks{"99", "E0"}, EncodingScheme::b1999()), ParseError);
  EXPECT_THROW(decode_number(Toks{}, p10), ParseError);
  try {
    decode_number(Toks{"+", "3", "x", "4", "E-2"}, p10);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 2u);
  }
}

TEST(Codec, FloatTokenWindow) {
  const auto fp = EncodingScheme::fp15();
  EXPECT_TRUE(is_encodable({1, 314, 8}, fp));
  EXPECT_FALSE(is_encodable({1, 314, 9}, fp));
  EXPECT_FALSE(is_encodable({-1, 602, 21}, fp));
  EXPECT_THROW(check_encodable({-1, 602, 21}, fp), RangeError);
  EXPECT_TRUE(is_encodable({-1, 602, 21}, EncodingScheme::p1000()));
}

TEST(Codec, MantissaTooWide) {
  EXPECT_THROW(encode_number({1, 3142, -3}, EncodingScheme::p1000()), RangeError);
  EXPECT_THROW(encode_number({1, 3142, -3}, EncodingScheme::fp15()), RangeError);
  EXPECT_NO_THROW(encode_number({1, 31, -1}, EncodingScheme::p100()));
}

TEST(Codec, RoundTripExhaustiveP1000) {
  const auto s = EncodingScheme::p1000();
  std::mt19937_64 g(11);
  std::uniform_int_distribution<int> ex(-100, 100);
  for (int sign : {1, -1}) {
    for (std::int64_t m = 100; m <= 999; ++m) {
      for (int k = 0; k < 5; ++k) {
        const FloatTriplet t{sign, m, ex(g)};
        ASSERT_EQ(decode_number(encode_number(t, s), s), t);
      }
    }
  }
  ASSERT_EQ(decode_number(encode_number({}, s), s), FloatTriplet{});
}

TEST(Codec, RoundTripRandomAllSchemes) {
  std::mt19937_64 g(12);
  auto schemes = presets();
  schemes.push_back(EncodingScheme::balanced(5));
  schemes.push_back(EncodingScheme::balanced(5, 4));
  schemes.push_back(EncodingScheme::positional(2));
  schemes.push_back(EncodingScheme::positional(16, 4));
  schemes.push_back(EncodingScheme::float_token(4, 2));
  for (const auto& s : schemes) {
    for (int i = 0; i < 100000; ++i) {
      const FloatTriplet t = random_triplet(g, s);
      const auto toks = encode_number(t, s);
      ASSERT_EQ(static_cast<int>(toks.size()), s.arity()) << s.name();
      ASSERT_EQ(decode_number(toks, s), t) << s.name() << " " << to_string(t);
    }
  }
}

TEST(Codec, BalancedDigitsInRange) {
  const auto s = EncodingScheme::balanced(5);  // base 11
  std::mt19937_64 g(13);
  for (int i = 0; i < 5000; ++i) {
    const FloatTriplet t = random_triplet(g, s);
    const auto toks = encode_number(t, s);
    std::int64_t value = 0;
    for (int k = 0; k < s.mantissa_width(); ++k) {
      const int digit = std::stoi(toks[k]);
      ASSERT_GE(digit, -5);
      ASSERT_LE(digit, 5);
      value = value * 11 + digit;
    }
    ASSERT_EQ(value, t.sign * t.mantissa);
  }
}

TEST(Codec, CrossSchemeConsistency) {
  std::mt19937_64 g(14);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 2000; ++i) {
    const double x = u(g);
    const FloatTriplet t = round_to_triplet(x);
    std::set<double> values;
    for (const auto& s : {EncodingScheme::p10(), EncodingScheme::p1000(), EncodingScheme::b1999(),
                          EncodingScheme::fp15()})
      values.insert(triplet_to_value(decode_number(encode_number(t, s), s)));
    ASSERT_EQ(values.size(), 1u);
  }
}

TEST(Codec, DecodeAt) {
  const Toks toks{"+", "314", "E-2", "-", "602", "E21"};
  std::size_t pos = 0;
  EXPECT_EQ(decode_number_at(toks, pos, EncodingScheme::p1000()), (FloatTriplet{1, 314, -2}));
  EXPECT_EQ(pos, 3u);
  EXPECT_EQ(decode_number_at(toks, pos, EncodingScheme::p1000()), (FloatTriplet{-1, 602, 21}));
  EXPECT_EQ(pos, 6u);
  EXPECT_THROW(decode_number_at(toks, pos, EncodingScheme::p1000()), ParseError);
}

TEST(Codec, DimensionTokens) {
  EXPECT_EQ(dimension_token(5), "V5");
  EXPECT_EQ(parse_dimension_token("V20"), 20u);
  EXPECT_FALSE(parse_dimension_token("V0"));
  EXPECT_FALSE(parse_dimension_token("V05"));
  EXPECT_FALSE(parse_dimension_token("V"));
  EXPECT_FALSE(parse_dimension_token("E5"));
}

TEST(Vocabulary, ConstructiveCounts) {
  EXPECT_EQ(number_tokens(EncodingScheme::p10()).size(), 213u);
  EXPECT_EQ(number_tokens(EncodingScheme::p1000()).size(), 1104u);
  EXPECT_EQ(number_tokens(EncodingScheme::b1999()).size(), 2002u);
  EXPECT_EQ(number_tokens(EncodingScheme::fp15()).size(), 30601u);
  EXPECT_EQ(build_vocabulary(EncodingScheme::p10(), 0).size(), 213u);
  EXPECT_EQ(build_vocabulary(EncodingScheme::p10(), 30).size(), 243u);
}

TEST(Vocabulary, CoversEveryEncodableTriplet) {
  std::mt19937_64 g(15);
  for (const auto& s : presets()) {
    const Vocabulary v = build_vocabulary(s, 30);
    for (int i = 0; i < 20000; ++i) {
      const FloatTriplet t = random_triplet(g, s);
      for (const auto& tok : encode_number(t, s)) ASSERT_TRUE(v.contains(tok)) << tok;
    }
  }
}

TEST(Vocabulary, OrderAndExtras) {
  const std::vector<std::string> extra{"Transpose", "Add"};
  const Vocabulary v = build_vocabulary(EncodingScheme::p10(), 30, extra);
  EXPECT_EQ(v.size(), 245u);
  EXPECT_EQ(v.token(213), "V1");
  EXPECT_EQ(v.token(242), "V30");
  EXPECT_EQ(v.token(243), "Transpose");
  EXPECT_EQ(*v.index("Add"), 244u);
  EXPECT_FALSE(v.index("Mul"));
  EXPECT_THROW(Vocabulary(std::vector<std::string>{"a", "a"}), std::invalid_argument);
}

TEST(Vocabulary, FileRoundTrip) {
  const Vocabulary v = build_vocabulary(EncodingScheme::fp15(), 30);
  std::stringstream ss;
  v.write(ss);
  const Vocabulary back = Vocabulary::read(ss);
  EXPECT_EQ(back.tokens(), v.tokens());
  EXPECT_EQ(back.fingerprint(), v.fingerprint());
  EXPECT_NE(v.fingerprint(), build_vocabulary(EncodingScheme::fp15(), 29).fingerprint());
}

TEST(Vocabulary, FingerprintIsFnv1a) {
  // FNV-1a 64 of "a\n"
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : std::string("a\n")) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  EXPECT_EQ(Vocabulary(std::vector<std::string>{"a"}).fingerprint(), h);
}
