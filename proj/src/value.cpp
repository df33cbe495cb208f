#include "nodice/value.hpp"

#include "nodice/error.hpp"

#include <cctype>

namespace nodice {

std::string SourcePos::to_string() const {
  return std::to_string(line) + ":" + std::to_string(column);
}

// ---------------------------------------------------------------- Ty

Ty Ty::pair(const Ty& first, const Ty& second) {
  std::vector<std::uint8_t> code;
  code.reserve(1 + first.code_.size() + second.code_.size());
  code.push_back(kPair);
  code.insert(code.end(), first.code_.begin(), first.code_.end());
  code.insert(code.end(), second.code_.begin(), second.code_.end());
  return Ty(std::move(code));
}

Ty Ty::bits(std::size_t width) {
  if (width == 0) throw Error("zero-width bit tuple");
  Ty t = boolean();
  for (std::size_t i = 1; i < width; ++i) t = pair(boolean(), t);
  return t;
}

std::size_t Ty::subtree_end(std::size_t start) const {
  std::size_t pending = 1;
  std::size_t i = start;
  while (pending > 0) {
    pending += code_[i] == kPair ? 1 : -1;
    ++i;
  }
  return i;
}

Ty Ty::first() const {
  if (!is_pair()) throw Error("first() of non-pair type");
  return Ty({code_.begin() + 1, code_.begin() + static_cast<long>(subtree_end(1))});
}

Ty Ty::second() const {
  if (!is_pair()) throw Error("second() of non-pair type");
  return Ty({code_.begin() + static_cast<long>(subtree_end(1)), code_.end()});
}

std::size_t Ty::width() const {
  std::size_t n = 0;
  for (auto c : code_) n += c == kBool;
  return n;
}

std::string Ty::to_string() const {
  if (is_bool()) return "Bool";
  return "(" + first().to_string() + ", " + second().to_string() + ")";
}

// ---------------------------------------------------------------- Value

Value Value::pair(const Value& first, const Value& second) {
  std::vector<std::uint8_t> code;
  code.reserve(1 + first.code_.size() + second.code_.size());
  code.push_back(kPair);
  code.insert(code.end(), first.code_.begin(), first.code_.end());
  code.insert(code.end(), second.code_.begin(), second.code_.end());
  return Value(std::move(code));
}

namespace {

Value build_from_bits(const Ty& ty, const std::vector<bool>& bits, std::size_t& pos) {
  if (ty.is_bool()) {
    if (pos >= bits.size()) throw Error("too few bits for value of type " + ty.to_string());
    return Value::boolean(bits[pos++]);
  }
  Value a = build_from_bits(ty.first(), bits, pos);
  Value b = build_from_bits(ty.second(), bits, pos);
  return Value::pair(a, b);
}

}  // namespace

Value Value::from_bits(const Ty& ty, const std::vector<bool>& bits) {
  std::size_t pos = 0;
  Value v = build_from_bits(ty, bits, pos);
  if (pos != bits.size()) throw Error("too many bits for value of type " + ty.to_string());
  return v;
}

std::optional<Value> Value::parse(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  std::size_t pos = 0;
  std::function<std::optional<Value>()> parse_one = [&]() -> std::optional<Value> {
    if (pos >= s.size()) return std::nullopt;
    if (s[pos] == 'T') return ++pos, Value::t();
    if (s[pos] == 'F') return ++pos, Value::f();
    if (s[pos] != '(') return std::nullopt;
    ++pos;
    auto a = parse_one();
    if (!a || pos >= s.size() || s[pos] != ',') return std::nullopt;
    ++pos;
    auto b = parse_one();
    if (!b || pos >= s.size() || s[pos] != ')') return std::nullopt;
    ++pos;
    return Value::pair(*a, *b);
  };
  auto v = parse_one();
  if (!v || pos != s.size()) return std::nullopt;
  return v;
}

std::size_t Value::subtree_end(std::size_t start) const {
  std::size_t pending = 1;
  std::size_t i = start;
  while (pending > 0) {
    pending += code_[i] == kPair ? 1 : -1;
    ++i;
  }
  return i;
}

Value Value::first() const {
  if (!is_pair()) throw Error("first() of non-pair value");
  return Value({code_.begin() + 1, code_.begin() + static_cast<long>(subtree_end(1))});
}

Value Value::second() const {
  if (!is_pair()) throw Error("second() of non-pair value");
  return Value({code_.begin() + static_cast<long>(subtree_end(1)), code_.end()});
}

Ty Value::type() const {
  if (is_bool()) return Ty::boolean();
  return Ty::pair(first().type(), second().type());
}

std::vector<bool> Value::bits() const {
  std::vector<bool> out;
  for (auto c : code_)
    if (c != kPair) out.push_back(c == kTrue);
  return out;
}

std::string Value::to_string() const {
  if (is_bool()) return as_bool() ? "T" : "F";
  return "(" + first().to_string() + "," + second().to_string() + ")";
}

std::size_t Value::hash() const {
  std::size_t h = 1469598103934665603ull;
  for (auto c : code_) h = (h ^ c) * 1099511628211ull;
  return h;
}

std::vector<Value> enumerate_values(const Ty& ty, std::size_t max_bits) {
  const std::size_t width = ty.width();
  if (width > max_bits || width >= 63)
    throw LimitError("output type " + ty.to_string() + " has " + std::to_string(width) +
                     " bits; enumeration is capped at " + std::to_string(max_bits));
  std::vector<Value> out;
  out.reserve(std::size_t{1} << width);
  std::vector<bool> bits(width);
  // Counting down from all-ones gives T-before-F lexicographic order.
  for (std::size_t code = (std::size_t{1} << width); code-- > 0;) {
    for (std::size_t i = 0; i < width; ++i) bits[i] = (code >> (width - 1 - i)) & 1u;
    out.push_back(Value::from_bits(ty, bits));
  }
  return out;
}

}  // namespace nodice
