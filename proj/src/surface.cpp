#include "nodice/surface.hpp"

#include <cctype>
#include <charconv>

namespace nodice {

std::size_t SType::bit_width() const {
  switch (kind_) {
    case Kind::Bool: return 1;
    case Kind::Int: return static_cast<std::size_t>(width_);
    case Kind::Pair: return first_->bit_width() + second_->bit_width();
  }
  return 0;
}

Ty SType::lower() const {
  switch (kind_) {
    case Kind::Bool: return Ty::boolean();
    case Kind::Int:
      if (width_ <= 0) throw Error("integer width not resolved");
      return Ty::bits(static_cast<std::size_t>(width_));
    case Kind::Pair: return Ty::pair(first_->lower(), second_->lower());
  }
  return Ty::boolean();
}

std::string SType::to_string() const {
  switch (kind_) {
    case Kind::Bool: return "bool";
    case Kind::Int:
      if (width_ > 0) return "int<" + std::to_string(width_) + ">";
      return "int";
    case Kind::Pair: return "(" + first_->to_string() + ", " + second_->to_string() + ")";
  }
  return "?";
}

bool operator==(const SType& a, const SType& b) {
  if (a.kind_ != b.kind_) return false;
  if (a.kind_ == SType::Kind::Int) return a.width_ == b.width_;
  if (a.kind_ == SType::Kind::Pair) return *a.first_ == *b.first_ && *a.second_ == *b.second_;
  return true;
}

namespace surface {

const char* binop_symbol(BinOp op) {
  switch (op) {
    case BinOp::Iff: return "<->";
    case BinOp::Or: return "||";
    case BinOp::Xor: return "xor";
    case BinOp::And: return "&&";
    case BinOp::Eq: return "==";
    case BinOp::Neq: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
  }
  return "?";
}

}  // namespace surface

namespace {

std::uint64_t bits_to_uint(const Value& v, int width) {
  std::uint64_t n = 0;
  Value cur = v;
  for (int i = 0; i < width; ++i) {
    bool bit;
    if (i + 1 == width) {
      bit = cur.as_bool();
    } else {
      bit = cur.first().as_bool();
      cur = cur.second();
    }
    n = (n << 1) | (bit ? 1u : 0u);
  }
  return n;
}

Value uint_to_bits(std::uint64_t n, int width) {
  Value acc = Value::boolean(n & 1u);
  for (int i = 1; i < width; ++i) acc = Value::pair(Value::boolean((n >> i) & 1u), acc);
  return acc;
}

struct LitTree {
  std::string atom;  // empty for lists
  std::vector<LitTree> items;
};

class LitParser {
 public:
  explicit LitParser(std::string_view s) : s_(s) {}

  std::optional<LitTree> parse_all() {
    auto t = parse();
    skip_ws();
    if (!t || pos_ != s_.size()) return std::nullopt;
    return t;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::optional<LitTree> parse() {
    skip_ws();
    if (pos_ >= s_.size()) return std::nullopt;
    if (s_[pos_] == '(') {
      ++pos_;
      LitTree list;
      while (true) {
        auto item = parse();
        if (!item) return std::nullopt;
        list.items.push_back(std::move(*item));
        skip_ws();
        if (pos_ >= s_.size()) return std::nullopt;
        if (s_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (s_[pos_] == ')') {
          ++pos_;
          break;
        }
        return std::nullopt;
      }
      if (list.items.size() == 1) return std::move(list.items.front());
      return list;
    }
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) return std::nullopt;
    return LitTree{std::string(s_.substr(start, pos_ - start)), {}};
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::optional<Value> match_literal(const LitTree& t, const SType& ty) {
  switch (ty.kind()) {
    case SType::Kind::Bool:
      if (t.atom == "true") return Value::t();
      if (t.atom == "false") return Value::f();
      return std::nullopt;
    case SType::Kind::Int: {
      if (t.atom.empty() || !std::isdigit(static_cast<unsigned char>(t.atom[0]))) return std::nullopt;
      std::uint64_t n = 0;
      auto [ptr, ec] = std::from_chars(t.atom.data(), t.atom.data() + t.atom.size(), n);
      if (ec != std::errc{} || ptr != t.atom.data() + t.atom.size()) return std::nullopt;
      if (ty.width() < 64 && n >> ty.width()) return std::nullopt;
      return uint_to_bits(n, ty.width());
    }
    case SType::Kind::Pair: {
      if (t.items.size() < 2) return std::nullopt;
      auto a = match_literal(t.items.front(), ty.first());
      if (!a) return std::nullopt;
      std::optional<Value> b;
      if (t.items.size() == 2) {
        b = match_literal(t.items[1], ty.second());
      } else {
        LitTree rest{{}, {t.items.begin() + 1, t.items.end()}};
        b = match_literal(rest, ty.second());
      }
      if (!b) return std::nullopt;
      return Value::pair(*a, *b);
    }
  }
  return std::nullopt;
}

}  // namespace

std::string render_value(const Value& v, const SType& type) {
  switch (type.kind()) {
    case SType::Kind::Bool: return v.as_bool() ? "true" : "false";
    case SType::Kind::Int: return std::to_string(bits_to_uint(v, type.width()));
    case SType::Kind::Pair:
      return "(" + render_value(v.first(), type.first()) + ", " + render_value(v.second(), type.second()) +
             ")";
  }
  return "?";
}

std::optional<Value> parse_value_literal(std::string_view text, const SType& type) {
  auto tree = LitParser(text).parse_all();
  if (!tree) return std::nullopt;
  return match_literal(*tree, type);
}

}  // namespace nodice
