#pragma once

#include "cocycle/invariant_poly.hpp"
#include "cocycle/rational.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cocycle {

using Point = Vector;

/// Syntax error carrying the byte offset of the offending token.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t offset)
        : ValidationError(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Exp, Log };

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
    Op op = Op::Const;
    ComplexRational constant;        // Const
    std::complex<double> value;      // Const, cached
    int index = 0;                   // Var, 0-based
    long exponent = 0;               // Pow
    Expr lhs, rhs;                   // operands
};

namespace expr {

inline Expr constant(const ComplexRational& c) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->constant = c;
    n->value = c.value();
    return n;
}
inline Expr constant(const Rational& re, const Rational& im = 0) { return constant(ComplexRational{re, im}); }
inline Expr zero() { return constant(Rational(0)); }
inline Expr one() { return constant(Rational(1)); }

inline Expr var(int index) {
    auto n = std::make_shared<Node>();
    n->op = Op::Var;
    n->index = index;
    return n;
}

inline bool is_const(const Expr& e) { return e->op == Op::Const; }
inline bool is_zero(const Expr& e) { return is_const(e) && e->constant.is_zero(); }
inline bool is_one(const Expr& e) { return is_const(e) && e->constant.is_one(); }

inline Expr make(Op op, Expr a, Expr b = nullptr, long exponent = 0) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    n->exponent = exponent;
    return n;
}

inline Expr neg(const Expr& a) {
    if (is_const(a)) return constant(-a->constant);
    if (a->op == Op::Neg) return a->lhs;
    return make(Op::Neg, a);
}
inline Expr add(const Expr& a, const Expr& b) {
    if (is_const(a) && is_const(b)) return constant(a->constant + b->constant);
    if (is_zero(a)) return b;
    if (is_zero(b)) return a;
    return make(Op::Add, a, b);
}
inline Expr sub(const Expr& a, const Expr& b) {
    if (is_const(a) && is_const(b)) return constant(a->constant - b->constant);
    if (is_zero(b)) return a;
    if (is_zero(a)) return neg(b);
    return make(Op::Sub, a, b);
}
inline Expr mul(const Expr& a, const Expr& b) {
    if (is_const(a) && is_const(b)) return constant(a->constant * b->constant);
    if (is_zero(a) || is_zero(b)) return zero();
    if (is_one(a)) return b;
    if (is_one(b)) return a;
    return make(Op::Mul, a, b);
}
inline Expr div(const Expr& a, const Expr& b) {
    if (is_const(a) && is_const(b)) return constant(a->constant / b->constant);
    if (is_zero(b)) throw DomainError("division by the zero constant");
    if (is_zero(a)) return zero();
    if (is_one(b)) return a;
    return make(Op::Div, a, b);
}
inline Expr pow(const Expr& a, long e) {
    if (e == 0) return one();
    if (e == 1) return a;
    if (is_const(a)) return constant(cocycle::pow(a->constant, e));
    return make(Op::Pow, a, nullptr, e);
}
inline Expr exp(const Expr& a) {
    if (is_zero(a)) return one();
    return make(Op::Exp, a);
}
inline Expr log(const Expr& a) {
    if (is_one(a)) return zero();
    return make(Op::Log, a);
}

}  // namespace expr

// ---------------------------------------------------------------- evaluation

inline constexpr double kTinyDenominator = 1e-300;

inline std::complex<double> evaluate(const Expr& e, std::span<const std::complex<double>> z) {
    using C = std::complex<double>;
    switch (e->op) {
    case Op::Const: return e->value;
    case Op::Var:
        if (e->index >= static_cast<int>(z.size())) throw ValidationError("coordinate index out of range");
        return z[e->index];
    case Op::Add: return evaluate(e->lhs, z) + evaluate(e->rhs, z);
    case Op::Sub: return evaluate(e->lhs, z) - evaluate(e->rhs, z);
    case Op::Mul: return evaluate(e->lhs, z) * evaluate(e->rhs, z);
    case Op::Div: {
        C d = evaluate(e->rhs, z);
        if (std::abs(d) < kTinyDenominator) throw DomainError("denominator vanishes");
        return evaluate(e->lhs, z) / d;
    }
    case Op::Neg: return -evaluate(e->lhs, z);
    case Op::Pow: {
        C b = evaluate(e->lhs, z);
        long n = e->exponent;
        if (n < 0) {
            if (std::abs(b) < kTinyDenominator) throw DomainError("negative power of a vanishing base");
            b = C(1) / b;
            n = -n;
        }
        C r(1);
        while (n > 0) {
            if (n & 1) r *= b;
            b *= b;
            n >>= 1;
        }
        return r;
    }
    case Op::Exp: return std::exp(evaluate(e->lhs, z));
    case Op::Log: {
        C a = evaluate(e->lhs, z);
        if (std::abs(a) < kTinyDenominator) throw DomainError("log of a vanishing argument");
        return std::log(a);
    }
    }
    throw std::logic_error("unknown node");
}

inline std::complex<double> evaluate(const Expr& e, const Point& z) {
    return evaluate(e, std::span<const std::complex<double>>(z.data(), static_cast<std::size_t>(z.size())));
}

// ---------------------------------------------------------------- structure

inline bool structurally_equal(const Expr& a, const Expr& b) {
    if (a == b) return true;
    if (a->op != b->op) return false;
    switch (a->op) {
    case Op::Const: return a->constant == b->constant;
    case Op::Var: return a->index == b->index;
    case Op::Pow: return a->exponent == b->exponent && structurally_equal(a->lhs, b->lhs);
    case Op::Neg:
    case Op::Exp:
    case Op::Log: return structurally_equal(a->lhs, b->lhs);
    default: return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
    }
}

inline int max_var_index(const Expr& e) {
    switch (e->op) {
    case Op::Const: return -1;
    case Op::Var: return e->index;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: return std::max(max_var_index(e->lhs), max_var_index(e->rhs));
    default: return max_var_index(e->lhs);
    }
}

/// Replaces each coordinate z_{i+1} by repl[i]; shared subtrees stay shared.
inline Expr substitute(const Expr& e, const std::vector<Expr>& repl,
                       std::unordered_map<const Node*, Expr>* memo = nullptr) {
    std::unordered_map<const Node*, Expr> local;
    if (!memo) memo = &local;
    if (auto it = memo->find(e.get()); it != memo->end()) return it->second;
    Expr out;
    switch (e->op) {
    case Op::Const: out = e; break;
    case Op::Var:
        if (e->index >= static_cast<int>(repl.size())) throw ValidationError("substitution index out of range");
        out = repl[e->index];
        break;
    case Op::Add: out = expr::add(substitute(e->lhs, repl, memo), substitute(e->rhs, repl, memo)); break;
    case Op::Sub: out = expr::sub(substitute(e->lhs, repl, memo), substitute(e->rhs, repl, memo)); break;
    case Op::Mul: out = expr::mul(substitute(e->lhs, repl, memo), substitute(e->rhs, repl, memo)); break;
    case Op::Div: out = expr::div(substitute(e->lhs, repl, memo), substitute(e->rhs, repl, memo)); break;
    case Op::Neg: out = expr::neg(substitute(e->lhs, repl, memo)); break;
    case Op::Pow: out = expr::pow(substitute(e->lhs, repl, memo), e->exponent); break;
    case Op::Exp: out = expr::exp(substitute(e->lhs, repl, memo)); break;
    case Op::Log: out = expr::log(substitute(e->lhs, repl, memo)); break;
    }
    memo->emplace(e.get(), out);
    return out;
}

/// Exact partial derivative with respect to z_{var+1}.
inline Expr differentiate(const Expr& e, int var, std::unordered_map<const Node*, Expr>* memo = nullptr) {
    using namespace expr;
    std::unordered_map<const Node*, Expr> local;
    if (!memo) memo = &local;
    if (auto it = memo->find(e.get()); it != memo->end()) return it->second;
    Expr out;
    switch (e->op) {
    case Op::Const: out = zero(); break;
    case Op::Var: out = e->index == var ? one() : zero(); break;
    case Op::Add: out = add(differentiate(e->lhs, var, memo), differentiate(e->rhs, var, memo)); break;
    case Op::Sub: out = sub(differentiate(e->lhs, var, memo), differentiate(e->rhs, var, memo)); break;
    case Op::Mul:
        out = add(mul(differentiate(e->lhs, var, memo), e->rhs), mul(e->lhs, differentiate(e->rhs, var, memo)));
        break;
    case Op::Div: {
        Expr du = differentiate(e->lhs, var, memo);
        Expr dv = differentiate(e->rhs, var, memo);
        if (is_zero(dv))
            out = div(du, e->rhs);
        else
            out = div(sub(mul(du, e->rhs), mul(e->lhs, dv)), pow(e->rhs, 2));
        break;
    }
    case Op::Neg: out = neg(differentiate(e->lhs, var, memo)); break;
    case Op::Pow:
        out = mul(mul(constant(Rational(e->exponent)), pow(e->lhs, e->exponent - 1)),
                  differentiate(e->lhs, var, memo));
        break;
    case Op::Exp: out = mul(e, differentiate(e->lhs, var, memo)); break;
    case Op::Log: out = div(differentiate(e->lhs, var, memo), e->lhs); break;
    }
    memo->emplace(e.get(), out);
    return out;
}

// ---------------------------------------------------------------- printing

namespace detail {

inline int precedence(const Expr& e) {
    switch (e->op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    default: return 5;
    }
}

inline std::string constant_text(const ComplexRational& c) {
    if (c.im == 0) {
        if (denominator_of(c.re) == 1 && c.re >= 0) return to_string(c.re);
        return "(" + to_string(c.re) + ")";
    }
    std::string im = to_string(c.im < 0 ? Rational(-c.im) : c.im);
    std::string imag = (c.im == 1 || c.im == -1) ? "i" : im + "*i";
    if (c.re == 0) return "(" + std::string(c.im < 0 ? "-" : "") + imag + ")";
    return "(" + to_string(c.re) + (c.im < 0 ? " - " : " + ") + imag + ")";
}

inline std::string print(const Expr& e);

inline std::string wrap(const Expr& e, int min_prec) {
    std::string s = print(e);
    return precedence(e) < min_prec ? "(" + s + ")" : s;
}

inline std::string print(const Expr& e) {
    switch (e->op) {
    case Op::Const: return constant_text(e->constant);
    case Op::Var: return "z" + std::to_string(e->index + 1);
    case Op::Add: return wrap(e->lhs, 1) + " + " + wrap(e->rhs, 2);
    case Op::Sub: return wrap(e->lhs, 1) + " - " + wrap(e->rhs, 2);
    case Op::Mul: return wrap(e->lhs, 2) + "*" + wrap(e->rhs, 3);
    case Op::Div: return wrap(e->lhs, 2) + "/" + wrap(e->rhs, 3);
    case Op::Neg: return "-" + wrap(e->lhs, 3);
    case Op::Pow: return wrap(e->lhs, 5) + "^" + (e->exponent < 0 ? "(" + std::to_string(e->exponent) + ")" : std::to_string(e->exponent));
    case Op::Exp: return "exp(" + print(e->lhs) + ")";
    case Op::Log: return "log(" + print(e->lhs) + ")";
    }
    return "?";
}

}  // namespace detail

inline std::string to_string(const Expr& e) { return detail::print(e); }

// ---------------------------------------------------------------- parsing

using ConstantTable = std::map<std::string, ComplexRational>;

namespace detail {

inline Rational parse_decimal(std::string_view digits) {
    auto dot = digits.find('.');
    if (dot == std::string_view::npos) {
        std::string d(digits);
        d.erase(0, std::min(d.find_first_not_of('0'), d.size()));
        return parse_rational(d.empty() ? "0" : d);
    }
    std::string whole(digits.substr(0, dot));
    std::string frac(digits.substr(dot + 1));
    Integer den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    std::string digits_only = whole + frac;
    // a leading zero would select octal
    digits_only.erase(0, std::min(digits_only.find_first_not_of('0'), digits_only.size()));
    return make_rational(Integer(digits_only.empty() ? "0" : digits_only), den);
}

class Parser {
public:
    Parser(std::string_view text, int n, const ConstantTable& constants)
        : s_(text), n_(n), constants_(constants) {}

    std::vector<Expr> parse_list() {
        std::vector<Expr> out;
        out.push_back(parse_expr());
        skip();
        while (pos_ < s_.size() && s_[pos_] == ';') {
            ++pos_;
            out.push_back(parse_expr());
            skip();
        }
        if (pos_ != s_.size()) throw ParseError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_);
        return out;
    }

    Expr parse_single() {
        Expr e = parse_expr();
        skip();
        if (pos_ != s_.size()) throw ParseError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_);
        return e;
    }

private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            if (accept('+')) e = expr::add(e, parse_term());
            else if (accept('-')) e = expr::sub(e, parse_term());
            else return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_unary();
        for (;;) {
            if (accept('*')) {
                e = expr::mul(e, parse_unary());
            } else if (accept('/')) {
                std::size_t at = pos_;
                Expr d = parse_unary();
                if (expr::is_zero(d)) throw ParseError("division by zero constant", at);
                e = expr::div(e, d);
            } else {
                return e;
            }
        }
    }

    Expr parse_unary() {
        if (accept('-')) return expr::neg(parse_unary());
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (!accept('^')) return base;
        skip();
        bool paren = accept('(');
        skip();
        bool negative = accept('-');
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) throw ParseError("expected integer exponent", pos_);
        long e = std::stol(std::string(s_.substr(start, pos_ - start)));
        if (paren && !accept(')')) throw ParseError("expected ')'", pos_);
        if (negative) e = -e;
        if (expr::is_zero(base) && e < 0) throw ParseError("negative power of zero", start);
        return expr::pow(base, e);
    }

    Expr parse_primary() {
        skip();
        if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
            auto digits = s_.substr(start, pos_ - start);
            if (std::count(digits.begin(), digits.end(), '.') > 1 || digits == ".")
                throw ParseError("malformed number", start);
            Rational v = parse_decimal(digits);
            if (pos_ < s_.size() && s_[pos_] == 'i' &&
                !(pos_ + 1 < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_ + 1])))) {
                ++pos_;
                return expr::constant(Rational(0), v);
            }
            return expr::constant(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string name(s_.substr(start, pos_ - start));
            if (name == "exp" || name == "log") {
                if (!accept('(')) throw ParseError("expected '(' after " + name, pos_);
                Expr arg = parse_expr();
                if (!accept(')')) throw ParseError("expected ')'", pos_);
                return name == "exp" ? expr::exp(arg) : expr::log(arg);
            }
            if (name == "i") return expr::constant(Rational(0), Rational(1));
            if (name.size() > 1 && name[0] == 'z' &&
                std::all_of(name.begin() + 1, name.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
                int idx = std::stoi(name.substr(1));
                if (idx < 1 || idx > n_)
                    throw ParseError("coordinate " + name + " out of range for n=" + std::to_string(n_), start);
                return expr::var(idx - 1);
            }
            if (auto it = constants_.find(name); it != constants_.end()) return expr::constant(it->second);
            throw ParseError("undefined symbol '" + name + "'", start);
        }
        throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    int n_;
    const ConstantTable& constants_;
};

}  // namespace detail

inline Expr parse_expr(std::string_view text, int n, const ConstantTable& constants = {}) {
    return detail::Parser(text, n, constants).parse_single();
}

/// Parses "a", "a+bi", "bi", "-a-bi" with rational or decimal a, b.
inline ComplexRational parse_complex_constant(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw ValidationError("empty constant");
    auto parse_real = [&](std::string_view t) -> Rational {
        if (t.empty()) throw ValidationError("malformed constant '" + text + "'");
        bool negative = false;
        if (t[0] == '+' || t[0] == '-') {
            negative = t[0] == '-';
            t.remove_prefix(1);
        }
        if (t.empty()) return negative ? Rational(-1) : Rational(1);
        auto slash = t.find('/');
        Rational v;
        try {
            if (slash == std::string_view::npos) v = detail::parse_decimal(t);
            else v = detail::parse_decimal(t.substr(0, slash)) / detail::parse_decimal(t.substr(slash + 1));
        } catch (const std::exception&) {
            throw ValidationError("malformed constant '" + text + "'");
        }
        return negative ? Rational(-v) : v;
    };
    if (s.back() != 'i') return {parse_real(s), 0};
    s.pop_back();
    // split at the last sign that is not the leading one
    std::size_t split = std::string::npos;
    for (std::size_t i = s.size(); i-- > 1;)
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e') {
            split = i;
            break;
        }
    if (split == std::string::npos) return {0, parse_real(s)};
    return {parse_real(std::string_view(s).substr(0, split)), parse_real(std::string_view(s).substr(split))};
}

// ---------------------------------------------------------------- maps

/// Sample cloud plus optional membership predicate (nonzero means inside).
struct DomainSpec {
    std::string name;
    std::vector<Point> samples;
    Expr predicate;

    bool contains(const Point& z) const {
        if (!predicate) return true;
        try {
            return std::abs(evaluate(predicate, z)) > 0.0;
        } catch (const DomainError&) {
            return false;
        }
    }
};

inline constexpr double kMinJacobianDet = 1e-12;

/// Holomorphic map C^n -> C^n given by n expression trees, with exact first and second derivatives.
class HoloMap {
public:
    HoloMap() = default;
    HoloMap(int n, std::vector<Expr> components, DomainSpec domain = {}, std::string name = {})
        : n_(n), components_(std::move(components)), domain_(std::move(domain)), name_(std::move(name)) {
        if (static_cast<int>(components_.size()) != n_)
            throw ValidationError("map '" + name_ + "' has " + std::to_string(components_.size()) +
                                  " components, expected " + std::to_string(n_));
        for (const auto& c : components_)
            if (max_var_index(c) >= n_) throw ValidationError("coordinate index out of range in map '" + name_ + "'");
        build_derivatives();
    }

    static HoloMap identity(int n) {
        std::vector<Expr> c;
        for (int i = 0; i < n; ++i) c.push_back(expr::var(i));
        return HoloMap(n, std::move(c), {}, "id");
    }

    int dim() const { return n_; }
    const std::string& name() const { return name_; }
    const std::vector<Expr>& components() const { return components_; }
    const DomainSpec& domain() const { return domain_; }
    const Expr& jacobian_entry(int r, int c) const { return jac_[r * n_ + c]; }
    const Expr& second_derivative(int a, int r, int c) const { return hess_[(a * n_ + r) * n_ + c]; }

    /// True when every Jacobian entry is an exact constant.
    bool has_constant_jacobian() const { return constant_jacobian_; }

    HoloMap with_domain(DomainSpec d) const {
        HoloMap m = *this;
        m.domain_ = std::move(d);
        return m;
    }
    HoloMap renamed(std::string name) const {
        HoloMap m = *this;
        m.name_ = std::move(name);
        return m;
    }

    Point operator()(const Point& z) const {
        check_point(z);
        Point w(n_);
        for (int i = 0; i < n_; ++i) w(i) = evaluate(components_[i], z);
        return w;
    }

    Matrix jacobian(const Point& z) const {
        check_point(z);
        Matrix j(n_, n_);
        for (int r = 0; r < n_; ++r)
            for (int c = 0; c < n_; ++c) j(r, c) = evaluate(jac_[r * n_ + c], z);
        return j;
    }

    /// d(J)/dz^a at z; exactly zero when the entries' derivatives are zero constants.
    Matrix jacobian_derivative(const Point& z, int a) const {
        check_point(z);
        Matrix d = Matrix::Zero(n_, n_);
        for (int r = 0; r < n_; ++r)
            for (int c = 0; c < n_; ++c) {
                const Expr& e = hess_[(a * n_ + r) * n_ + c];
                if (!expr::is_zero(e)) d(r, c) = evaluate(e, z);
            }
        return d;
    }

    /// Checks finiteness and |det J| >= 1e-12 at each domain sample.
    void validate_domain() const {
        for (std::size_t i = 0; i < domain_.samples.size(); ++i) {
            const Point& z = domain_.samples[i];
            Matrix j;
            try {
                j = jacobian(z);
            } catch (const DomainError& e) {
                throw DomainError("map '" + name_ + "': " + e.what() + " at sample " + std::to_string(i));
            }
            std::complex<double> det = j.determinant();
            if (!std::isfinite(std::abs(det)) || std::abs(det) < kMinJacobianDet)
                throw DomainError("map '" + name_ + "': singular Jacobian at sample " + std::to_string(i));
        }
    }

    std::string to_text() const {
        std::string s;
        for (int i = 0; i < n_; ++i) s += (i ? "; " : "") + to_string(components_[i]);
        return s;
    }

private:
    void check_point(const Point& z) const {
        if (z.size() != n_) throw ValidationError("point dimension differs from map dimension");
    }

    void build_derivatives() {
        jac_.resize(static_cast<std::size_t>(n_) * n_);
        hess_.resize(static_cast<std::size_t>(n_) * n_ * n_);
        constant_jacobian_ = true;
        for (int c = 0; c < n_; ++c) {
            std::unordered_map<const Node*, Expr> memo;
            for (int r = 0; r < n_; ++r) jac_[r * n_ + c] = differentiate(components_[r], c, &memo);
        }
        for (int a = 0; a < n_; ++a) {
            std::unordered_map<const Node*, Expr> memo;
            for (int r = 0; r < n_; ++r)
                for (int c = 0; c < n_; ++c) {
                    Expr h = differentiate(jac_[r * n_ + c], a, &memo);
                    if (!expr::is_zero(h)) constant_jacobian_ = false;
                    hess_[(a * n_ + r) * n_ + c] = h;
                }
        }
    }

    int n_ = 0;
    std::vector<Expr> components_;
    DomainSpec domain_;
    std::string name_;
    std::vector<Expr> jac_;
    std::vector<Expr> hess_;
    bool constant_jacobian_ = true;
};

inline HoloMap parse_map(std::string_view text, int n, const ConstantTable& constants = {}, std::string name = {}) {
    auto comps = detail::Parser(text, n, constants).parse_list();
    if (static_cast<int>(comps.size()) != n)
        throw ValidationError("map '" + name + "' has " + std::to_string(comps.size()) + " components, expected " +
                              std::to_string(n));
    return HoloMap(n, std::move(comps), {}, std::move(name));
}

/// f after g; the domain is g's.
inline HoloMap compose(const HoloMap& f, const HoloMap& g) {
    if (f.dim() != g.dim()) throw ValidationError("compose: dimension mismatch");
    std::unordered_map<const Node*, Expr> memo;
    std::vector<Expr> comps;
    for (const auto& c : f.components()) comps.push_back(substitute(c, g.components(), &memo));
    std::string name = f.name().empty() || g.name().empty() ? std::string() : f.name() + "*" + g.name();
    return HoloMap(f.dim(), std::move(comps), g.domain(), std::move(name));
}

// ---------------------------------------------------------------- built-in library

namespace library {

/// z -> A z + b.
inline HoloMap affine(const std::vector<std::vector<ComplexRational>>& a, const std::vector<ComplexRational>& b) {
    const int n = static_cast<int>(a.size());
    std::vector<Expr> comps;
    for (int r = 0; r < n; ++r) {
        Expr e = expr::constant(b[r]);
        for (int c = 0; c < n; ++c) e = expr::add(e, expr::mul(expr::constant(a[r][c]), expr::var(c)));
        comps.push_back(e);
    }
    return HoloMap(n, std::move(comps), {}, "affine");
}

/// z_i -> c_i z_i^{e_i}.
inline HoloMap diagonal_monomial(const std::vector<ComplexRational>& c, const std::vector<long>& e) {
    const int n = static_cast<int>(c.size());
    std::vector<Expr> comps;
    for (int i = 0; i < n; ++i) comps.push_back(expr::mul(expr::constant(c[i]), expr::pow(expr::var(i), e[i])));
    return HoloMap(n, std::move(comps), {}, "monomial");
}

/// z -> z / (1 + <a, z>); the inverse is the same map with -a.
inline HoloMap projective(const std::vector<ComplexRational>& a) {
    const int n = static_cast<int>(a.size());
    Expr den = expr::one();
    for (int i = 0; i < n; ++i) den = expr::add(den, expr::mul(expr::constant(a[i]), expr::var(i)));
    std::vector<Expr> comps;
    for (int i = 0; i < n; ++i) comps.push_back(expr::div(expr::var(i), den));
    return HoloMap(n, std::move(comps), {}, "mobius");
}

/// (z1, z2) -> (z2, z2^2 + c - z1).
inline HoloMap henon(const ComplexRational& c) {
    return HoloMap(2,
                   {expr::var(1), expr::sub(expr::add(expr::pow(expr::var(1), 2), expr::constant(c)), expr::var(0))},
                   {}, "henon");
}

/// Inverse of henon(c): (w1, w2) -> (w1^2 + c - w2, w1).
inline HoloMap henon_inverse(const ComplexRational& c) {
    return HoloMap(2,
                   {expr::sub(expr::add(expr::pow(expr::var(0), 2), expr::constant(c)), expr::var(1)), expr::var(0)},
                   {}, "henon_inv");
}

/// (z1, z2) -> (z1 + a z2^2 + b z2^3, z2).
inline HoloMap shear(const ComplexRational& a, const ComplexRational& b) {
    Expr p = expr::add(expr::mul(expr::constant(a), expr::pow(expr::var(1), 2)),
                       expr::mul(expr::constant(b), expr::pow(expr::var(1), 3)));
    return HoloMap(2, {expr::add(expr::var(0), p), expr::var(1)}, {}, "shear");
}

/// (z1, z2) -> (z1 exp(a z2), z2).
inline HoloMap exp_twist(const ComplexRational& a) {
    return HoloMap(2, {expr::mul(expr::var(0), expr::exp(expr::mul(expr::constant(a), expr::var(1)))), expr::var(1)},
                   {}, "exp_twist");
}

struct Entry {
    std::string name;
    HoloMap forward;
    std::optional<HoloMap> inverse;
    bool affine = false;
};

/// Maps on C^2, with explicit inverses where global, spanning affine and non-affine regimes.
inline std::vector<Entry> standard(int n = 2) {
    if (n != 2) throw ValidationError("the standard map library is two-dimensional");
    using Q = Rational;
    const ComplexRational h{Q(3, 10), Q(1, 5)};
    std::vector<Entry> out;
    out.push_back({"affine", affine({{{2, 0}, {1, 0}}, {{1, 0}, {1, 0}}}, {{1, 0}, {0, 1}}),
                   affine({{{1, 0}, {-1, 0}}, {{-1, 0}, {2, 0}}}, {{-1, 1}, {1, -2}}), true});
    out.push_back({"henon", henon(h), henon_inverse(h), false});
    out.push_back({"shear", shear({Q(1, 2), 0}, {Q(1, 3), Q(1, 4)}), shear({Q(-1, 2), 0}, {Q(-1, 3), Q(-1, 4)}), false});
    out.push_back({"mobius", projective({{Q(1, 5), 0}, {Q(-1, 7), Q(1, 9)}}),
                   projective({{Q(-1, 5), 0}, {Q(1, 7), Q(-1, 9)}}), false});
    out.push_back({"exp_twist", exp_twist({Q(1, 3), Q(1, 6)}), exp_twist({Q(-1, 3), Q(-1, 6)}), false});
    out.push_back({"monomial", diagonal_monomial({{1, 0}, {Q(1, 2), 0}}, {2, 3}), std::nullopt, false});
    return out;
}

}  // namespace library

}  // namespace cocycle
