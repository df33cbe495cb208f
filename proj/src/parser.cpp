#include "nodice/frontend.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace nodice {

namespace {

enum class Tok {
  Ident,
  Number,
  Keyword,
  Punct,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

const std::unordered_set<std::string>& keywords() {
  static const std::unordered_set<std::string> k = {
      "fun",  "let",  "in",   "if",    "then", "else", "observe", "flip", "nflip", "uniform", "choose",
      "true", "false", "fst", "snd",   "iff",  "xor",  "int",     "bool", "Bool"};
  return k;
}

std::vector<Token> lex(std::string_view src) {
  static const char* const kPuncts[] = {"<->", "==", "!=", "<=", ">=", "&&", "||", "(", ")", "{", "}",
                                        ",",   ":",  "=",  "<",  ">",  "+",  "-",  "!", "/"};
  std::vector<Token> out;
  std::uint32_t line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    SourcePos pos{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
        ++j;
      std::string word(src.substr(i, j - i));
      Tok kind = keywords().count(word) ? Tok::Keyword : Tok::Ident;
      out.push_back({kind, word, pos});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      out.push_back({Tok::Number, std::string(src.substr(i, j - i)), pos});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (const char* p : kPuncts) {
      std::string_view sv(p);
      if (src.substr(i, sv.size()) == sv) {
        out.push_back({Tok::Punct, std::string(sv), pos});
        advance(sv.size());
        matched = true;
        break;
      }
    }
    if (!matched) throw ProgramError(pos, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", SourcePos{line, col}});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  SurfaceProgram program() {
    SurfaceProgram p;
    std::unordered_set<std::string> names;
    while (is_kw("fun")) {
      SFunction f = function();
      if (!names.insert(f.name).second) throw ProgramError(f.pos, "duplicate function '" + f.name + "'");
      p.functions.push_back(std::move(f));
    }
    p.main = expr();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' after main expression");
    return p;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool is_kw(const char* kw) const { return peek().kind == Tok::Keyword && peek().text == kw; }
  bool is_punct(const char* p) const { return peek().kind == Tok::Punct && peek().text == p; }
  [[noreturn]] void fail(const std::string& msg) const { throw ProgramError(peek().pos, msg); }

  std::string describe(const Token& t) const { return t.kind == Tok::End ? "end of input" : "'" + t.text + "'"; }

  void expect_punct(const char* p) {
    if (!is_punct(p)) fail(std::string("expected '") + p + "', found " + describe(peek()));
    next();
  }
  void expect_kw(const char* kw) {
    if (!is_kw(kw)) fail(std::string("expected '") + kw + "', found " + describe(peek()));
    next();
  }
  std::string ident() {
    if (peek().kind != Tok::Ident) fail("expected identifier, found " + describe(peek()));
    return next().text;
  }

  std::uint64_t integer() {
    if (peek().kind != Tok::Number || peek().text.find('.') != std::string::npos)
      fail("expected integer, found " + describe(peek()));
    const Token& t = next();
    std::uint64_t n = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), n);
    if (ec != std::errc{} || n >= (std::uint64_t{1} << 62)) throw ProgramError(t.pos, "integer literal too large");
    return n;
  }

  SFunction function() {
    SFunction f{peek().pos, {}, {}, SType::boolean(), nullptr};
    expect_kw("fun");
    f.name = ident();
    expect_punct("(");
    if (!is_punct(")")) {
      while (true) {
        SParam prm{ident(), SType::boolean()};
        expect_punct(":");
        prm.type = type();
        for (const auto& other : f.params)
          if (other.name == prm.name) fail("duplicate parameter '" + prm.name + "'");
        f.params.push_back(std::move(prm));
        if (!is_punct(",")) break;
        next();
      }
    }
    expect_punct(")");
    expect_punct(":");
    f.return_type = type();
    expect_punct("{");
    f.body = expr();
    expect_punct("}");
    return f;
  }

  SType type() {
    if (is_kw("bool") || is_kw("Bool")) {
      next();
      return SType::boolean();
    }
    if (is_kw("int")) {
      next();
      if (is_punct("<")) {
        next();
        SourcePos at = peek().pos;
        std::uint64_t w = integer();
        if (w == 0 || w > 62) throw ProgramError(at, "integer width must be between 1 and 62");
        expect_punct(">");
        return SType::integer(static_cast<int>(w));
      }
      return SType::integer(0);
    }
    if (is_punct("(")) {
      next();
      std::vector<SType> parts{type()};
      while (is_punct(",")) {
        next();
        parts.push_back(type());
      }
      expect_punct(")");
      if (parts.size() == 1) return parts.front();
      SType acc = parts.back();
      for (std::size_t i = parts.size() - 1; i-- > 0;) acc = SType::pair(parts[i], acc);
      return acc;
    }
    fail("expected a type, found " + describe(peek()));
  }

  SExprPtr expr() {
    SourcePos pos = peek().pos;
    if (is_kw("let")) {
      next();
      surface::Let let{ident(), std::nullopt, nullptr, nullptr};
      if (is_punct(":")) {
        next();
        let.annotation = type();
      }
      expect_punct("=");
      let.bound = expr();
      expect_kw("in");
      let.body = expr();
      return make_sexpr(pos, std::move(let));
    }
    if (is_kw("if")) {
      next();
      auto c = expr();
      expect_kw("then");
      auto t = expr();
      expect_kw("else");
      auto e = expr();
      return make_sexpr(pos, surface::If{c, t, e});
    }
    if (is_kw("observe")) {
      next();
      return make_sexpr(pos, surface::Observe{expr()});
    }
    return binary(0);
  }

  struct OpInfo {
    const char* text;
    bool keyword;
    surface::BinOp op;
  };

  // Levels from loosest to tightest binding; all left associative.
  static const std::vector<std::vector<OpInfo>>& levels() {
    using surface::BinOp;
    static const std::vector<std::vector<OpInfo>> l = {
        {{"<->", false, BinOp::Iff}, {"iff", true, BinOp::Iff}},
        {{"||", false, BinOp::Or}},
        {{"xor", true, BinOp::Xor}},
        {{"&&", false, BinOp::And}},
        {{"==", false, BinOp::Eq}, {"!=", false, BinOp::Neq}},
        {{"<", false, BinOp::Lt}, {"<=", false, BinOp::Le}, {">", false, BinOp::Gt}, {">=", false, BinOp::Ge}},
        {{"+", false, BinOp::Add}, {"-", false, BinOp::Sub}},
    };
    return l;
  }

  const OpInfo* match_op(std::size_t level) const {
    for (const auto& info : levels()[level]) {
      if (info.keyword ? is_kw(info.text) : is_punct(info.text)) return &info;
    }
    return nullptr;
  }

  SExprPtr binary(std::size_t level) {
    if (level == levels().size()) return unary();
    auto lhs = binary(level + 1);
    while (const OpInfo* info = match_op(level)) {
      SourcePos pos = peek().pos;
      next();
      auto rhs = binary(level + 1);
      lhs = make_sexpr(pos, surface::Binary{info->op, lhs, rhs});
    }
    return lhs;
  }

  SExprPtr unary() {
    SourcePos pos = peek().pos;
    if (is_punct("!")) {
      next();
      return make_sexpr(pos, surface::Not{unary()});
    }
    if (is_kw("fst")) {
      next();
      return make_sexpr(pos, surface::Fst{unary()});
    }
    if (is_kw("snd")) {
      next();
      return make_sexpr(pos, surface::Snd{unary()});
    }
    return primary();
  }

  Rational probability() {
    SourcePos at = peek().pos;
    if (peek().kind != Tok::Number) fail("expected a probability, found " + describe(peek()));
    std::string text = next().text;
    if (is_punct("/")) {
      next();
      if (peek().kind != Tok::Number) fail("expected a denominator, found " + describe(peek()));
      text += "/" + next().text;
    }
    Rational r;
    try {
      r = parse_rational(text);
    } catch (const std::invalid_argument& e) {
      throw ProgramError(at, e.what());
    }
    if (r < 0 || r > 1) throw ProgramError(at, "probability out of range: " + text);
    return r;
  }

  SExprPtr primary() {
    SourcePos pos = peek().pos;
    const Token& t = peek();
    if (t.kind == Tok::Keyword) {
      if (t.text == "true" || t.text == "false") {
        next();
        return make_sexpr(pos, surface::BoolLit{t.text == "true"});
      }
      if (t.text == "let" || t.text == "if" || t.text == "observe") return expr();
      if (t.text == "flip") {
        next();
        expect_punct("(");
        Rational theta = probability();
        expect_punct(")");
        return make_sexpr(pos, surface::Flip{theta});
      }
      if (t.text == "nflip") {
        next();
        expect_punct("(");
        expect_punct(")");
        return make_sexpr(pos, surface::NFlip{});
      }
      if (t.text == "uniform" || t.text == "choose") {
        const bool is_uniform = t.text == "uniform";
        next();
        expect_punct("(");
        std::uint64_t lo = integer();
        expect_punct(",");
        std::uint64_t hi = integer();
        expect_punct(")");
        if (is_uniform) return make_sexpr(pos, surface::Uniform{lo, hi});
        return make_sexpr(pos, surface::Choose{lo, hi});
      }
      fail("unexpected keyword '" + t.text + "'");
    }
    if (t.kind == Tok::Number) {
      if (t.text.find('.') != std::string::npos) fail("fractional number outside flip(...)");
      return make_sexpr(pos, surface::IntLit{integer()});
    }
    if (t.kind == Tok::Ident) {
      std::string name = next().text;
      if (is_punct("(")) {
        next();
        surface::Call call{name, {}};
        if (!is_punct(")")) {
          while (true) {
            call.args.push_back(expr());
            if (!is_punct(",")) break;
            next();
          }
        }
        expect_punct(")");
        return make_sexpr(pos, std::move(call));
      }
      return make_sexpr(pos, surface::Var{name});
    }
    if (is_punct("(")) {
      next();
      std::vector<SExprPtr> items{expr()};
      while (is_punct(",")) {
        next();
        items.push_back(expr());
      }
      expect_punct(")");
      if (items.size() == 1) return items.front();
      SExprPtr acc = items.back();
      for (std::size_t i = items.size() - 1; i-- > 0;)
        acc = make_sexpr(items[i]->pos, surface::Tuple{items[i], acc});
      acc->pos = pos;
      return acc;
    }
    fail("expected an expression, found " + describe(t));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

SurfaceProgram parse(std::string_view source) { return Parser(source).program(); }

CoreProgram load_program(std::string_view source) {
  return a_normalize(desugar(typecheck(parse(source))));
}

CoreProgram load_program_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_program(ss.str());
}

}  // namespace nodice
