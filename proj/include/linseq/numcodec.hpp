#pragma once

// Token codecs for rounded real numbers.
//
// A nonzero real x is written x = sign * mantissa * 10^exponent with a
// mantissa of exactly `d` significant digits (d = 3 unless stated). Zero is
// the triplet (+1, 0, 0). Every encoding below is a spelling of that triplet:
//
//   PositionalBase(B)  [sign, digit_1 .. digit_k, E<exp>]   digits in base B
//   BalancedBase(a)    [digit_1 .. digit_k, E<exp>]         digits in [-a, a]
//   FloatToken(p)      [FP<signed mantissa>/<exp>]
//
// with k the smallest width that holds every d-digit mantissa.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace linseq {

inline constexpr int kMinExponent = -100;
inline constexpr int kMaxExponent = 100;
inline constexpr int kDefaultPrecision = 3;

struct FloatTriplet {
  int sign = 1;
  std::int64_t mantissa = 0;
  int exponent = 0;

  friend bool operator==(const FloatTriplet&, const FloatTriplet&) = default;
};

std::string to_string(const FloatTriplet& t);

/// Throws std::invalid_argument unless `t` is a canonical triplet for `digits`
/// significant digits (zero convention, mantissa width, exponent clamp).
void validate_triplet(const FloatTriplet& t, int digits = kDefaultPrecision);

/// Rounds `x` to `digits` significant digits. The shortest round-trip decimal
/// representation of `x` is rounded half away from zero; a carry past
/// 10^digits - 1 moves into the exponent (999.96 -> (+1, 100, 1)).
/// Throws OverflowError for non-finite input or a rounded exponent outside
/// [-100, 100].
FloatTriplet round_to_triplet(double x, int digits = kDefaultPrecision);

/// Nearest double to sign * mantissa * 10^exponent.
double triplet_to_value(const FloatTriplet& t);

/// round_to_triplet followed by triplet_to_value.
double round_significant(double x, int digits = kDefaultPrecision);

enum class SchemeKind { PositionalBase, BalancedBase, FloatToken };

struct EncodingScheme {
  SchemeKind kind = SchemeKind::PositionalBase;
  // Base B, balanced half-width a, or FloatToken p, depending on `kind`.
  int parameter = 10;
  int precision_digits = kDefaultPrecision;
  // Exponents the vocabulary covers. [-100, 100] except for FloatToken, whose
  // window is [-(p+2)/2, (p+2)/2].
  int min_exponent = kMinExponent;
  int max_exponent = kMaxExponent;

  static EncodingScheme positional(int base, int digits = kDefaultPrecision);
  static EncodingScheme balanced(int half_width, int digits = kDefaultPrecision);
  static EncodingScheme float_token(int p, int digits = kDefaultPrecision);

  static EncodingScheme p10() { return positional(10, 3); }
  static EncodingScheme p100() { return positional(100, 2); }
  static EncodingScheme p1000() { return positional(1000, 3); }
  static EncodingScheme p10000() { return positional(10000, 4); }
  static EncodingScheme b1999() { return balanced(999, 3); }
  static EncodingScheme fp15() { return float_token(14, 3); }

  /// Accepts the preset names (p10, p100, p1000, p10000, b1999, fp15, case
  /// insensitive) and the generic forms p<B>, b<2a+1>, fp<p+1>, each with an
  /// optional ":<digits>" suffix, e.g. "p16:4".
  static EncodingScheme parse(std::string_view name);

  /// Canonical name; parse(name()) == *this.
  std::string name() const;

  /// Number of digit tokens in the mantissa (positional / balanced), 0 for FloatToken.
  int mantissa_width() const;
  /// Tokens per encoded number: 5 for P10, 3 for P1000, 2 for B1999, 1 for FP15.
  int arity() const;

  void validate() const;

  friend bool operator==(const EncodingScheme&, const EncodingScheme&) = default;
};

/// Spells `t` under `s`. Defined for every canonical triplet with exponent in
/// [-100, 100]; FloatToken exponents outside the scheme window are spelled too
/// (see check_encodable). Throws std::invalid_argument for a non-canonical
/// triplet and RangeError when the mantissa has more digits than `s` holds.
std::vector<std::string> encode_number(const FloatTriplet& t, const EncodingScheme& s);
void append_encoded(const FloatTriplet& t, const EncodingScheme& s, std::vector<std::string>& out);

/// True when every token of encode_number(t, s) belongs to the vocabulary of `s`.
bool is_encodable(const FloatTriplet& t, const EncodingScheme& s) noexcept;
/// Throws RangeError unless is_encodable(t, s).
void check_encodable(const FloatTriplet& t, const EncodingScheme& s);

/// Exact inverse of encode_number. Requires exactly s.arity() tokens.
/// Throws ParseError on arity, unknown or non-canonical tokens.
FloatTriplet decode_number(std::span<const std::string> tokens, const EncodingScheme& s);

/// Decodes the number starting at `pos` and advances `pos` past it. Token
/// positions in errors are absolute within `tokens`.
FloatTriplet decode_number_at(std::span<const std::string> tokens, std::size_t& pos,
                              const EncodingScheme& s);

std::string dimension_token(std::size_t n);
/// Returns the dimension carried by a "V<n>" token (n >= 1), nullopt otherwise.
std::optional<std::size_t> parse_dimension_token(std::string_view tok);

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Throws std::invalid_argument on duplicate tokens.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::optional<std::size_t> index(const std::string& tok) const;
  bool contains(const std::string& tok) const { return index_.count(tok) != 0; }

  /// 64-bit FNV-1a over the newline-joined tokens.
  std::uint64_t fingerprint() const noexcept;

  /// One token per line; line i (0-based) holds token i.
  void write(std::ostream& os) const;
  static Vocabulary read(std::istream& is);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Every token some representable triplet emits under `s`, in canonical order.
std::vector<std::string> number_tokens(const EncodingScheme& s);

/// number_tokens(s), then V1..V<max_dim>, then `task_tokens`.
Vocabulary build_vocabulary(const EncodingScheme& s, std::size_t max_dim,
                            std::span<const std::string> task_tokens = {});

}  // namespace linseq
