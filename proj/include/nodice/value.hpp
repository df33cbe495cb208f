#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nodice {

/// Core type: Bool | Ty x Ty. Stored as a preorder code so that copies,
/// comparisons and hashing stay flat.
class Ty {
 public:
  Ty() : code_{kBool} {}

  static Ty boolean() { return Ty(); }
  static Ty pair(const Ty& first, const Ty& second);
  /// Right-nested tuple of `width` Bools (width 1 is Bool itself).
  static Ty bits(std::size_t width);

  bool is_bool() const { return code_.front() == kBool; }
  bool is_pair() const { return code_.front() == kPair; }
  Ty first() const;
  Ty second() const;

  /// Number of Bool leaves.
  std::size_t width() const;

  std::string to_string() const;

  friend bool operator==(const Ty&, const Ty&) = default;

 private:
  static constexpr std::uint8_t kBool = 0;
  static constexpr std::uint8_t kPair = 1;
  explicit Ty(std::vector<std::uint8_t> code) : code_(std::move(code)) {}
  std::size_t subtree_end(std::size_t start) const;

  std::vector<std::uint8_t> code_;
};

/// Core value: T | F | (v, v).
class Value {
 public:
  Value() : code_{kFalse} {}

  static Value boolean(bool b) { return Value(std::vector<std::uint8_t>{b ? kTrue : kFalse}); }
  static Value t() { return boolean(true); }
  static Value f() { return boolean(false); }
  static Value pair(const Value& first, const Value& second);
  /// Rebuilds a value of shape `ty` from its leaves in preorder.
  static Value from_bits(const Ty& ty, const std::vector<bool>& bits);
  /// Parses the core notation "T", "F", "(T,(F,T))". Whitespace is ignored.
  static std::optional<Value> parse(std::string_view text);

  bool is_bool() const { return code_.front() != kPair; }
  bool is_pair() const { return code_.front() == kPair; }
  bool as_bool() const { return code_.front() == kTrue; }
  Value first() const;
  Value second() const;

  Ty type() const;
  bool has_type(const Ty& ty) const { return type() == ty; }
  /// Leaves in preorder.
  std::vector<bool> bits() const;

  /// Core notation, e.g. "(T,F)".
  std::string to_string() const;

  std::size_t hash() const;
  friend bool operator==(const Value&, const Value&) = default;
  friend auto operator<=>(const Value&, const Value&) = default;

 private:
  static constexpr std::uint8_t kFalse = 0;
  static constexpr std::uint8_t kTrue = 1;
  static constexpr std::uint8_t kPair = 2;
  explicit Value(std::vector<std::uint8_t> code) : code_(std::move(code)) {}
  std::size_t subtree_end(std::size_t start) const;

  std::vector<std::uint8_t> code_;
};

/// A value or the reject marker R.
using Outcome = std::optional<Value>;

inline std::string outcome_to_string(const Outcome& o) { return o ? o->to_string() : "R"; }

/// All values of `ty` in a fixed order (T before F, lexicographic over
/// leaves). Refuses types wider than `max_bits`.
std::vector<Value> enumerate_values(const Ty& ty, std::size_t max_bits = 20);

}  // namespace nodice

template <>
struct std::hash<nodice::Value> {
  std::size_t operator()(const nodice::Value& v) const noexcept { return v.hash(); }
};
