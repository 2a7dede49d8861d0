#include "expr_oracle.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace oracle {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double clip(double v, double lim) { return v < -lim ? -lim : (v > lim ? lim : v); }

}  // namespace

struct Node {
  char tag = 'c';  // c constant, v variable, b binary, f function
  double constant = 0.0;
  char var = 'x';
  char op = '+';
  std::string fn;
  std::shared_ptr<const Node> a, b;

  double eval(const double* env) const {
    double r = 0.0;
    switch (tag) {
      case 'c':
        r = constant;
        break;
      case 'v':
        r = env[var == 'x' ? 0 : var == 'y' ? 1 : var == 'z' ? 2 : 3];
        break;
      case 'b': {
        const double l = a->eval(env), rr = b->eval(env);
        if (op == '+') r = l + rr;
        else if (op == '-') r = l - rr;
        else if (op == '*') r = l * rr;
        else r = std::fabs(rr) < 1e-6 ? l : l / rr;
        break;
      }
      default: {
        const double in = a->eval(env);
        r = fn == "sin" ? std::sin(in) : fn == "cos" ? std::cos(in) : std::tan(in);
      }
    }
    return clip(r, 1e4);
  }
};

namespace {

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  std::shared_ptr<const Node> expr() {
    skip();
    if (peek() == '(') {
      ++i_;
      auto lhs = expr();
      skip();
      if (peek() == ')') {  // redundant parentheses
        ++i_;
        return lhs;
      }
      auto n = std::make_shared<Node>();
      n->tag = 'b';
      n->op = s_.at(i_++);
      if (std::string("+-*/").find(n->op) == std::string::npos) fail("operator");
      n->a = lhs;
      n->b = expr();
      expect(')');
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(peek()))) {
      std::string word;
      while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.')) {
        word += s_[i_++];
      }
      auto n = std::make_shared<Node>();
      if (word == "time") {
        n->tag = 'v';
        n->var = 't';
      } else if (word == "p.x" || word == "p.y" || word == "p.z") {
        n->tag = 'v';
        n->var = word[2];
      } else if (word == "sin" || word == "cos" || word == "tan") {
        n->tag = 'f';
        n->fn = word;
        expect('(');
        n->a = expr();
        expect(')');
      } else {
        fail("identifier " + word);
      }
      return n;
    }
    const char* begin = s_.c_str() + i_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("number");
    i_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Node>();
    n->constant = v;
    return n;
  }

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }
  void expect(char c) {
    skip();
    if (peek() != c) fail(std::string("'") + c + "'");
    ++i_;
  }
  void expect(const std::string& word) {
    skip();
    if (s_.compare(i_, word.size(), word) != 0) fail(word);
    i_ += word.size();
  }
  std::string swizzle() {
    expect("p.");
    std::string sw;
    while (i_ < s_.size() && std::string("xyz").find(s_[i_]) != std::string::npos) sw += s_[i_++];
    if (sw.empty()) fail("swizzle");
    return sw;
  }
  bool done() {
    skip();
    return i_ == s_.size();
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error("oracle: expected " + what + " at offset " + std::to_string(i_));
  }

 private:
  const std::string& s_;
  std::size_t i_ = 0;
};

}  // namespace

Snippet Snippet::parse(const std::string& text) {
  Parser p(text);
  Snippet out;
  p.skip();
  if (text.compare(0, 2, "p.") == 0 && text.find('=') != std::string::npos) {
    out.swizzle_ = p.swizzle();
    p.expect('=');
    if (p.swizzle() != out.swizzle_) p.fail("same swizzle on both sides");
    p.expect('+');
    p.expect('(');
    out.root_ = p.expr();
    p.expect(')');
    p.expect(';');
  } else {
    out.root_ = p.expr();
  }
  if (!p.done()) p.fail("end of input");
  return out;
}

double Snippet::value(double x, double y, double z, double t) const {
  double w = std::fmod(t, kTwoPi);
  if (w < 0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  const double env[4] = {x, y, z, w};
  return clip(root_->eval(env), 1e6);
}

void Snippet::apply(double& x, double& y, double& z, double t) const {
  const double e = value(x, y, z, t);
  for (char c : swizzle_) {
    if (c == 'x') x += e;
    if (c == 'y') y += e;
    if (c == 'z') z += e;
  }
}

}  // namespace oracle
