#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <stdexcept>
#include <string>

namespace cocycle {

using Integer = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                              boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;

/// Thrown for malformed input at any API boundary.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a numeric evaluation leaves its domain (singular Jacobian, tiny denominator, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline Integer numerator_of(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Integer denominator_of(const Rational& q) { return boost::multiprecision::denominator(q); }

inline Rational make_rational(const Integer& num, const Integer& den) {
    if (den == 0) throw ValidationError("zero denominator");
    return Rational(num, den);
}

/// Decimal integer text only; leading zeros are not read as octal.
inline Integer parse_integer(const std::string& text) {
    std::string t = text;
    bool negative = false;
    if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
        negative = t[0] == '-';
        t.erase(0, 1);
    }
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
        throw ValidationError("not a decimal integer: '" + text + "'");
    t.erase(0, std::min(t.find_first_not_of('0'), t.size() - 1));
    Integer v(t);
    return negative ? Integer(-v) : v;
}

inline Rational parse_rational(const std::string& num, const std::string& den = "1") {
    return make_rational(parse_integer(num), parse_integer(den));
}

inline std::string to_string(const Rational& q) {
    if (denominator_of(q) == 1) return numerator_of(q).str();
    return numerator_of(q).str() + "/" + denominator_of(q).str();
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline Rational factorial(int k) {
    Rational r = 1;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

/// Exact complex rational a + b i.
struct ComplexRational {
    Rational re{0};
    Rational im{0};

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_one() const { return re == 1 && im == 0; }
    std::complex<double> value() const { return {to_double(re), to_double(im)}; }

    friend ComplexRational operator+(const ComplexRational& a, const ComplexRational& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend ComplexRational operator-(const ComplexRational& a, const ComplexRational& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend ComplexRational operator-(const ComplexRational& a) { return {-a.re, -a.im}; }
    friend ComplexRational operator*(const ComplexRational& a, const ComplexRational& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend ComplexRational operator/(const ComplexRational& a, const ComplexRational& b) {
        Rational n = b.re * b.re + b.im * b.im;
        if (n == 0) throw DomainError("division by exact zero constant");
        return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
    }
    friend bool operator==(const ComplexRational& a, const ComplexRational& b) {
        return a.re == b.re && a.im == b.im;
    }
};

inline ComplexRational pow(ComplexRational base, long e) {
    if (e < 0) return pow(ComplexRational{1, 0} / base, -e);
    ComplexRational r{1, 0};
    while (e > 0) {
        if (e & 1) r = r * base;
        base = base * base;
        e >>= 1;
    }
    return r;
}

}  // namespace cocycle
