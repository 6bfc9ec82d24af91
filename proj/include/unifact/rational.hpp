#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <cstdint>
#include <string>

#include "unifact/errors.hpp"

namespace unifact {

using cdouble = std::complex<double>;
using Rational = boost::multiprecision::cpp_rational;

/// Complex number with exact rational real and imaginary parts.
/// Closed under +, -, * and / by nonzero values; used wherever an identity
/// has to hold with zero tolerance (polynomial kernels, exact matrix algebra).
struct RationalComplex {
    Rational re{0};
    Rational im{0};

    RationalComplex() = default;
    RationalComplex(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
    RationalComplex(long long r) : re(r), im(0) {} // NOLINT: implicit by design
    static RationalComplex integer(long long n) { return RationalComplex(n); }

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_one() const { return re == 1 && im == 0; }

    RationalComplex conj() const { return {re, -im}; }
    Rational norm_sq() const { return re * re + im * im; }

    friend RationalComplex operator+(const RationalComplex& a, const RationalComplex& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend RationalComplex operator-(const RationalComplex& a, const RationalComplex& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend RationalComplex operator-(const RationalComplex& a) { return {-a.re, -a.im}; }
    friend RationalComplex operator*(const RationalComplex& a, const RationalComplex& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend RationalComplex operator/(const RationalComplex& a, const RationalComplex& b) {
        const Rational n = b.norm_sq();
        if (n == 0) throw SingularMatrix("rational complex division by zero");
        return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
    }
    RationalComplex& operator+=(const RationalComplex& o) { return *this = *this + o; }
    RationalComplex& operator-=(const RationalComplex& o) { return *this = *this - o; }
    RationalComplex& operator*=(const RationalComplex& o) { return *this = *this * o; }

    friend bool operator==(const RationalComplex& a, const RationalComplex& b) {
        return a.re == b.re && a.im == b.im;
    }
    friend bool operator!=(const RationalComplex& a, const RationalComplex& b) { return !(a == b); }

    cdouble to_cdouble() const {
        return {static_cast<double>(re), static_cast<double>(im)};
    }

    std::string str() const {
        auto part = [](const Rational& q) { return q.str(); };
        if (im == 0) return part(re);
        return "(" + part(re) + (im > 0 ? "+" : "") + part(im) + "i)";
    }
};

inline RationalComplex rc(long long num, long long den = 1) {
    return {Rational(num, den), Rational(0)};
}

} // namespace unifact
