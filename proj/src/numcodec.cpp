#include "linseq/numcodec.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "linseq/error.hpp"

namespace linseq {
namespace {

std::int64_t pow10(int d) {
  std::int64_t r = 1;
  for (int i = 0; i < d; ++i) r *= 10;
  return r;
}

// Parses a decimal integer in canonical spelling: no '+', no leading zeros, no "-0".
bool parse_canonical_int(std::string_view sv, std::int64_t& out) {
  if (sv.empty()) return false;
  const char* first = sv.data();
  const char* last = sv.data() + sv.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) return false;
  std::array<char, 24> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), out);
  return std::string_view(buf.data(), static_cast<std::size_t>(res.ptr - buf.data())) == sv;
}

int positional_width(std::int64_t base, int digits) {
  const std::int64_t limit = pow10(digits);
  int k = 1;
  for (std::int64_t span = base; span < limit; span *= base) ++k;
  return k;
}

int balanced_width(std::int64_t half_width, int digits) {
  const std::int64_t base = 2 * half_width + 1;
  const std::int64_t need = pow10(digits) - 1;
  int k = 1;
  for (std::int64_t span = base; (span - 1) / 2 < need; span *= base) ++k;
  return k;
}

std::string exponent_token(int e) { return "E" + std::to_string(e); }

std::string fp_token(const FloatTriplet& t) {
  return "FP" + std::to_string(t.sign * t.mantissa) + "/" + std::to_string(t.exponent);
}

// Mantissas with `digits` significant digits, plus zero.
template <class F>
void for_each_mantissa(int digits, F&& f) {
  f(std::int64_t{0});
  for (std::int64_t m = pow10(digits - 1); m < pow10(digits); ++m) f(m);
}

std::vector<std::int64_t> positional_digits(std::int64_t value, std::int64_t base, int width) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(width), 0);
  for (int i = width - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = value % base;
    value /= base;
  }
  return out;
}

std::vector<std::int64_t> balanced_digits(std::int64_t value, std::int64_t half_width, int width) {
  const std::int64_t base = 2 * half_width + 1;
  std::vector<std::int64_t> out(static_cast<std::size_t>(width), 0);
  for (int i = width - 1; i >= 0; --i) {
    std::int64_t r = ((value % base) + base) % base;
    if (r > half_width) r -= base;
    out[static_cast<std::size_t>(i)] = r;
    value = (value - r) / base;
  }
  return out;
}

FloatTriplet make_checked(std::int64_t signed_mantissa, int exponent, int digits,
                          std::size_t pos) {
  FloatTriplet t;
  t.sign = signed_mantissa < 0 ? -1 : 1;
  t.mantissa = signed_mantissa < 0 ? -signed_mantissa : signed_mantissa;
  t.exponent = exponent;
  if (t.mantissa == 0) {
    if (exponent != 0) throw ParseError("zero must carry exponent 0", pos);
    return t;
  }
  if (t.mantissa < pow10(digits - 1) || t.mantissa >= pow10(digits)) {
    throw ParseError("mantissa " + std::to_string(t.mantissa) + " does not have " +
                         std::to_string(digits) + " significant digits",
                     pos);
  }
  return t;
}

int parse_exponent_token(const std::string& tok, std::size_t pos) {
  std::int64_t e = 0;
  if (tok.size() < 2 || tok[0] != 'E' || !parse_canonical_int(std::string_view(tok).substr(1), e)) {
    throw ParseError("expected exponent token, got '" + tok + "'", pos);
  }
  if (e < kMinExponent || e > kMaxExponent) {
    throw ParseError("exponent out of range in '" + tok + "'", pos);
  }
  return static_cast<int>(e);
}

}  // namespace

std::string to_string(const FloatTriplet& t) {
  return "(" + std::string(t.sign < 0 ? "-1" : "+1") + ", " + std::to_string(t.mantissa) + ", " +
         std::to_string(t.exponent) + ")";
}

void validate_triplet(const FloatTriplet& t, int digits) {
  if (t.sign != 1 && t.sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  if (t.mantissa == 0) {
    if (t.sign != 1 || t.exponent != 0) {
      throw std::invalid_argument("zero must be encoded as (+1, 0, 0)");
    }
    return;
  }
  if (t.mantissa < pow10(digits - 1) || t.mantissa > pow10(digits) - 1) {
    throw std::invalid_argument("mantissa " + std::to_string(t.mantissa) + " does not have " +
                                std::to_string(digits) + " significant digits");
  }
  if (t.exponent < kMinExponent || t.exponent > kMaxExponent) {
    throw std::invalid_argument("exponent " + std::to_string(t.exponent) + " outside [-100, 100]");
  }
}

FloatTriplet round_to_triplet(double x, int digits) {
  if (digits < 1 || digits > 15) throw std::invalid_argument("precision must be in [1, 15]");
  if (!std::isfinite(x)) throw OverflowError("cannot round a non-finite value");
  if (x == 0.0) return {};

  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), std::fabs(x),
                           std::chars_format::scientific);
  const std::string_view repr(buf.data(), static_cast<std::size_t>(res.ptr - buf.data()));
  // repr is "d[.ddd]e[+-]XX"
  const auto epos = repr.find('e');
  std::string sig;
  for (char c : repr.substr(0, epos)) {
    if (c != '.') sig.push_back(c);
  }
  int dec_exp = 0;
  std::string_view exp_part = repr.substr(epos + 1);
  if (!exp_part.empty() && exp_part.front() == '+') exp_part.remove_prefix(1);
  std::from_chars(exp_part.data(), exp_part.data() + exp_part.size(), dec_exp);

  std::int64_t mantissa = 0;
  for (int i = 0; i < digits; ++i) {
    const char c = i < static_cast<int>(sig.size()) ? sig[static_cast<std::size_t>(i)] : '0';
    mantissa = mantissa * 10 + (c - '0');
  }
  if (static_cast<int>(sig.size()) > digits && sig[static_cast<std::size_t>(digits)] >= '5') {
    ++mantissa;
  }
  int exponent = dec_exp - (digits - 1);
  if (mantissa == pow10(digits)) {
    mantissa /= 10;
    ++exponent;
  }
  if (exponent < kMinExponent || exponent > kMaxExponent) {
    throw OverflowError("value " + std::string(repr) + " has rounded exponent " +
                        std::to_string(exponent) + " outside [-100, 100]");
  }
  return {x < 0 ? -1 : 1, mantissa, exponent};
}

double triplet_to_value(const FloatTriplet& t) {
  if (t.mantissa == 0) return 0.0;
  const std::string text =
      (t.sign < 0 ? "-" : "") + std::to_string(t.mantissa) + "e" + std::to_string(t.exponent);
  double v = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), v);
  return v;
}

double round_significant(double x, int digits) {
  return triplet_to_value(round_to_triplet(x, digits));
}

// ---------------------------------------------------------------------------
// EncodingScheme

EncodingScheme EncodingScheme::positional(int base, int digits) {
  EncodingScheme s{SchemeKind::PositionalBase, base, digits, kMinExponent, kMaxExponent};
  s.validate();
  return s;
}

EncodingScheme EncodingScheme::balanced(int half_width, int digits) {
  EncodingScheme s{SchemeKind::BalancedBase, half_width, digits, kMinExponent, kMaxExponent};
  s.validate();
  return s;
}

EncodingScheme EncodingScheme::float_token(int p, int digits) {
  EncodingScheme s{SchemeKind::FloatToken, p, digits, -(p + 2) / 2, (p + 2) / 2};
  s.validate();
  return s;
}

void EncodingScheme::validate() const {
  if (precision_digits < 2 || precision_digits > 4) {
    throw std::invalid_argument("precision_digits must be in [2, 4]");
  }
  switch (kind) {
    case SchemeKind::PositionalBase:
      if (parameter < 2) throw std::invalid_argument("positional base must be >= 2");
      break;
    case SchemeKind::BalancedBase:
      if (parameter < 1) throw std::invalid_argument("balanced half-width must be >= 1");
      break;
    case SchemeKind::FloatToken:
      if (parameter < 0 || parameter % 2 != 0) {
        throw std::invalid_argument("FloatToken p must be even and >= 0");
      }
      break;
  }
  if (min_exponent > max_exponent || min_exponent < kMinExponent || max_exponent > kMaxExponent) {
    throw std::invalid_argument("invalid exponent range");
  }
}

namespace {
int default_digits_for(SchemeKind kind, int parameter) {
  if (kind == SchemeKind::PositionalBase) {
    if (parameter == 100) return 2;
    if (parameter == 10000) return 4;
  }
  return kDefaultPrecision;
}
}  // namespace

EncodingScheme EncodingScheme::parse(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  std::optional<int> digits;
  if (auto colon = lower.find(':'); colon != std::string::npos) {
    std::int64_t d = 0;
    if (!parse_canonical_int(std::string_view(lower).substr(colon + 1), d)) {
      throw std::invalid_argument("bad precision suffix in scheme '" + std::string(name) + "'");
    }
    digits = static_cast<int>(d);
    lower.resize(colon);
  }
  auto number_after = [&](std::size_t prefix) {
    std::int64_t v = 0;
    if (!parse_canonical_int(std::string_view(lower).substr(prefix), v) || v <= 0 || v > 1000000) {
      throw std::invalid_argument("unknown encoding scheme '" + std::string(name) + "'");
    }
    return static_cast<int>(v);
  };
  if (lower.rfind("fp", 0) == 0) {
    const int n = number_after(2);
    return float_token(n - 1, digits.value_or(kDefaultPrecision));
  }
  if (lower.rfind("p", 0) == 0) {
    const int base = number_after(1);
    return positional(base, digits.value_or(default_digits_for(SchemeKind::PositionalBase, base)));
  }
  if (lower.rfind("b", 0) == 0) {
    const int base = number_after(1);
    if (base % 2 == 0 || base < 3) {
      throw std::invalid_argument("balanced base must be odd and >= 3");
    }
    return balanced((base - 1) / 2, digits.value_or(kDefaultPrecision));
  }
  throw std::invalid_argument("unknown encoding scheme '" + std::string(name) + "'");
}

std::string EncodingScheme::name() const {
  std::string out;
  switch (kind) {
    case SchemeKind::PositionalBase: out = "p" + std::to_string(parameter); break;
    case SchemeKind::BalancedBase: out = "b" + std::to_string(2 * parameter + 1); break;
    case SchemeKind::FloatToken: out = "fp" + std::to_string(parameter + 1); break;
  }
  if (precision_digits != default_digits_for(kind, parameter)) {
    out += ":" + std::to_string(precision_digits);
  }
  return out;
}

int EncodingScheme::mantissa_width() const {
  switch (kind) {
    case SchemeKind::PositionalBase: return positional_width(parameter, precision_digits);
    case SchemeKind::BalancedBase: return balanced_width(parameter, precision_digits);
    case SchemeKind::FloatToken: return 0;
  }
  return 0;
}

int EncodingScheme::arity() const {
  switch (kind) {
    case SchemeKind::PositionalBase: return mantissa_width() + 2;
    case SchemeKind::BalancedBase: return mantissa_width() + 1;
    case SchemeKind::FloatToken: return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Number codec

void append_encoded(const FloatTriplet& t, const EncodingScheme& s, std::vector<std::string>& out) {
  if (t.mantissa >= pow10(s.precision_digits)) {
    throw RangeError("mantissa " + std::to_string(t.mantissa) + " exceeds " +
                     std::to_string(s.precision_digits) + " digits of scheme " + s.name());
  }
  validate_triplet(t, s.precision_digits);
  switch (s.kind) {
    case SchemeKind::PositionalBase: {
      out.emplace_back(t.sign < 0 ? "-" : "+");
      for (auto d : positional_digits(t.mantissa, s.parameter, s.mantissa_width())) {
        out.push_back(std::to_string(d));
      }
      out.push_back(exponent_token(t.exponent));
      break;
    }
    case SchemeKind::BalancedBase: {
      for (auto d : balanced_digits(t.sign * t.mantissa, s.parameter, s.mantissa_width())) {
        out.push_back(std::to_string(d));
      }
      out.push_back(exponent_token(t.exponent));
      break;
    }
    case SchemeKind::FloatToken:
      out.push_back(fp_token(t));
      break;
  }
}

std::vector<std::string> encode_number(const FloatTriplet& t, const EncodingScheme& s) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(s.arity()));
  append_encoded(t, s, out);
  return out;
}

bool is_encodable(const FloatTriplet& t, const EncodingScheme& s) noexcept {
  try {
    validate_triplet(t, s.precision_digits);
  } catch (const std::invalid_argument&) {
    return false;
  }
  return t.exponent >= s.min_exponent && t.exponent <= s.max_exponent;
}

void check_encodable(const FloatTriplet& t, const EncodingScheme& s) {
  if (!is_encodable(t, s)) {
    throw RangeError("triplet " + to_string(t) + " is outside the range of scheme " + s.name() +
                     " (exponents " + std::to_string(s.min_exponent) + ".." +
                     std::to_string(s.max_exponent) + ")");
  }
}

FloatTriplet decode_number_at(std::span<const std::string> tokens, std::size_t& pos,
                              const EncodingScheme& s) {
  const auto arity = static_cast<std::size_t>(s.arity());
  if (pos + arity > tokens.size()) {
    throw ParseError("expected " + std::to_string(arity) + " tokens for a number, found " +
                         std::to_string(tokens.size() - std::min(pos, tokens.size())),
                     tokens.size());
  }
  const std::size_t start = pos;
  FloatTriplet t;
  switch (s.kind) {
    case SchemeKind::PositionalBase: {
      const std::string& sign_tok = tokens[pos];
      if (sign_tok != "+" && sign_tok != "-") {
        throw ParseError("expected sign token, got '" + sign_tok + "'", pos);
      }
      ++pos;
      std::int64_t value = 0;
      for (int i = 0; i < s.mantissa_width(); ++i, ++pos) {
        std::int64_t d = 0;
        if (!parse_canonical_int(tokens[pos], d) || d < 0 || d >= s.parameter) {
          throw ParseError("bad base-" + std::to_string(s.parameter) + " digit '" + tokens[pos] + "'",
                           pos);
        }
        value = value * s.parameter + d;
        if (value >= pow10(s.precision_digits)) {
          throw ParseError("mantissa has too many digits", pos);
        }
      }
      const int e = parse_exponent_token(tokens[pos], pos);
      ++pos;
      if (value == 0 && sign_tok == "-") throw ParseError("negative zero", start);
      t = make_checked(sign_tok == "-" ? -value : value, e, s.precision_digits, start);
      break;
    }
    case SchemeKind::BalancedBase: {
      const std::int64_t base = 2 * static_cast<std::int64_t>(s.parameter) + 1;
      std::int64_t value = 0;
      for (int i = 0; i < s.mantissa_width(); ++i, ++pos) {
        std::int64_t d = 0;
        if (!parse_canonical_int(tokens[pos], d) || d < -s.parameter || d > s.parameter) {
          throw ParseError("bad balanced digit '" + tokens[pos] + "'", pos);
        }
        value = value * base + d;
      }
      const int e = parse_exponent_token(tokens[pos], pos);
      ++pos;
      t = make_checked(value, e, s.precision_digits, start);
      break;
    }
    case SchemeKind::FloatToken: {
      const std::string& tok = tokens[pos];
      const auto slash = tok.find('/');
      std::int64_t m = 0;
      std::int64_t e = 0;
      if (tok.rfind("FP", 0) != 0 || slash == std::string::npos ||
          !parse_canonical_int(std::string_view(tok).substr(2, slash - 2), m) ||
          !parse_canonical_int(std::string_view(tok).substr(slash + 1), e)) {
        throw ParseError("expected FP<m>/<e> token, got '" + tok + "'", pos);
      }
      if (e < kMinExponent || e > kMaxExponent) {
        throw ParseError("exponent out of range in '" + tok + "'", pos);
      }
      ++pos;
      t = make_checked(m, static_cast<int>(e), s.precision_digits, start);
      break;
    }
  }
  return t;
}

FloatTriplet decode_number(std::span<const std::string> tokens, const EncodingScheme& s) {
  const auto arity = static_cast<std::size_t>(s.arity());
  if (tokens.size() != arity) {
    throw ParseError("expected " + std::to_string(arity) + " tokens, got " +
                         std::to_string(tokens.size()),
                     std::min(tokens.size(), arity));
  }
  std::size_t pos = 0;
  return decode_number_at(tokens, pos, s);
}

std::string dimension_token(std::size_t n) { return "V" + std::to_string(n); }

std::optional<std::size_t> parse_dimension_token(std::string_view tok) {
  std::int64_t n = 0;
  if (tok.size() < 2 || tok[0] != 'V' || !parse_canonical_int(tok.substr(1), n) || n < 1) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(n);
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw std::invalid_argument("empty token in vocabulary");
    if (!index_.emplace(tokens_[i], i).second) {
      throw std::invalid_argument("duplicate token '" + tokens_[i] + "' in vocabulary");
    }
  }
}

std::optional<std::size_t> Vocabulary::index(const std::string& tok) const {
  auto it = index_.find(tok);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocabulary::fingerprint() const noexcept {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ull;
  };
  for (const auto& tok : tokens_) {
    for (char c : tok) mix(static_cast<unsigned char>(c));
    mix('\n');
  }
  return h;
}

void Vocabulary::write(std::ostream& os) const {
  for (const auto& tok : tokens_) os << tok << '\n';
}

Vocabulary Vocabulary::read(std::istream& is) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

std::vector<std::string> number_tokens(const EncodingScheme& s) {
  s.validate();
  std::vector<std::string> out;
  const int d = s.precision_digits;
  switch (s.kind) {
    case SchemeKind::PositionalBase: {
      out = {"+", "-"};
      std::set<std::int64_t> digits;
      for_each_mantissa(d, [&](std::int64_t m) {
        for (auto x : positional_digits(m, s.parameter, s.mantissa_width())) digits.insert(x);
      });
      for (auto x : digits) out.push_back(std::to_string(x));
      break;
    }
    case SchemeKind::BalancedBase: {
      std::set<std::int64_t> digits;
      for_each_mantissa(d, [&](std::int64_t m) {
        for (std::int64_t v : {m, -m}) {
          for (auto x : balanced_digits(v, s.parameter, s.mantissa_width())) digits.insert(x);
        }
      });
      for (auto x : digits) out.push_back(std::to_string(x));
      break;
    }
    case SchemeKind::FloatToken: {
      const std::int64_t lo = pow10(d - 1);
      const std::int64_t hi = pow10(d) - 1;
      for (std::int64_t m = -hi; m <= -lo; ++m) {
        for (int e = s.min_exponent; e <= s.max_exponent; ++e) out.push_back(fp_token({-1, -m, e}));
      }
      out.push_back(fp_token({}));
      for (std::int64_t m = lo; m <= hi; ++m) {
        for (int e = s.min_exponent; e <= s.max_exponent; ++e) out.push_back(fp_token({1, m, e}));
      }
      return out;
    }
  }
  for (int e = s.min_exponent; e <= s.max_exponent; ++e) out.push_back(exponent_token(e));
  return out;
}

Vocabulary build_vocabulary(const EncodingScheme& s, std::size_t max_dim,
                            std::span<const std::string> task_tokens) {
  auto tokens = number_tokens(s);
  for (std::size_t n = 1; n <= max_dim; ++n) tokens.push_back(dimension_token(n));
  tokens.insert(tokens.end(), task_tokens.begin(), task_tokens.end());
  return Vocabulary(std::move(tokens));
}

}  // namespace linseq
