#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include "unifact/errors.hpp"
#include "unifact/rational.hpp"

namespace unifact {

/// 2x2 matrix over a complex scalar type. S is std::complex<double> for the
/// numeric backend or RationalComplex for the exact one; the arithmetic
/// below uses only ring operations so both instantiations share it.
template <class S>
struct Mat2 {
    S a11{}, a12{}, a21{}, a22{};

    Mat2() = default;
    Mat2(S m11, S m12, S m21, S m22)
        : a11(std::move(m11)), a12(std::move(m12)), a21(std::move(m21)), a22(std::move(m22)) {}

    static Mat2 identity() { return {S(1), S(0), S(0), S(1)}; }
    static Mat2 zero() { return {S(0), S(0), S(0), S(0)}; }

    S det() const { return a11 * a22 - a12 * a21; }
    S trace() const { return a11 + a22; }

    /// adj(M) with M*adj(M) = det(M)*Id.
    Mat2 adjugate() const { return {a22, -a12, -a21, a11}; }

    friend Mat2 operator+(const Mat2& a, const Mat2& b) {
        return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
    }
    friend Mat2 operator-(const Mat2& a, const Mat2& b) {
        return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
    }
    friend Mat2 operator-(const Mat2& a) { return {-a.a11, -a.a12, -a.a21, -a.a22}; }
    friend Mat2 operator*(const Mat2& a, const Mat2& b) {
        return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
                a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
    }
    friend Mat2 operator*(const S& s, const Mat2& m) {
        return {s * m.a11, s * m.a12, s * m.a21, s * m.a22};
    }
    friend bool operator==(const Mat2& a, const Mat2& b) {
        return a.a11 == b.a11 && a.a12 == b.a12 && a.a21 == b.a21 && a.a22 == b.a22;
    }
};

using Mat2d = Mat2<cdouble>;
using Mat2q = Mat2<RationalComplex>;

/// One-parameter elementary matrix: Lower is [[1,0],[z,1]], Upper is [[1,z],[0,1]].
enum class ElementaryKind { Lower, Upper };

template <class S>
struct ElementaryFactor {
    ElementaryKind kind;
    S z;

    Mat2<S> to_matrix() const {
        if (kind == ElementaryKind::Lower) return {S(1), S(0), z, S(1)};
        return {S(1), z, S(0), S(1)};
    }
    ElementaryFactor inverse() const { return {kind, -z}; }
};

// ---------------------------------------------------------------------------
// numeric-only operations
// ---------------------------------------------------------------------------

inline double max_abs(const Mat2d& m) {
    return std::max(std::max(std::abs(m.a11), std::abs(m.a12)),
                    std::max(std::abs(m.a21), std::abs(m.a22)));
}

inline double frob_norm(const Mat2d& m) {
    return std::sqrt(std::norm(m.a11) + std::norm(m.a12) + std::norm(m.a21) + std::norm(m.a22));
}

/// Largest singular value in closed form: sqrt of the larger eigenvalue of
/// M^H M, whose trace and determinant are available directly.
inline double op_norm(const Mat2d& m) {
    const double t = std::norm(m.a11) + std::norm(m.a12) + std::norm(m.a21) + std::norm(m.a22);
    const double d = std::norm(m.det());
    const double disc = std::max(0.0, t * t - 4.0 * d);
    return std::sqrt(0.5 * (t + std::sqrt(disc)));
}

inline Mat2d inverse(const Mat2d& m, double tol = 1e-14) {
    const cdouble d = m.det();
    if (std::abs(d) <= tol) throw SingularMatrix("2x2 inverse: |det| <= tol");
    const cdouble inv = 1.0 / d;
    return inv * m.adjugate();
}

inline Mat2q inverse(const Mat2q& m) {
    const RationalComplex d = m.det();
    if (d.is_zero()) throw SingularMatrix("2x2 rational inverse: det = 0");
    const RationalComplex inv = RationalComplex(1) / d;
    return inv * m.adjugate();
}

inline bool is_sl2(const Mat2d& m, double tol = 1e-10) {
    return std::abs(m.det() - cdouble(1.0)) <= tol;
}

inline bool is_su2(const Mat2d& m, double tol = 1e-10) {
    const double c1 = std::norm(m.a11) + std::norm(m.a21);
    const double c2 = std::norm(m.a12) + std::norm(m.a22);
    const cdouble dot = std::conj(m.a11) * m.a12 + std::conj(m.a21) * m.a22;
    return std::abs(c1 - 1.0) <= tol && std::abs(c2 - 1.0) <= tol && std::abs(dot) <= tol &&
           std::abs(m.det() - cdouble(1.0)) <= tol;
}

inline bool is_unipotent(const Mat2d& m, double tol = 1e-10) {
    const Mat2d n = m - Mat2d::identity();
    return max_abs(n * n) <= tol;
}

/// exp(M) in closed form. Split M = mu*Id + B with tr B = 0; Cayley-Hamilton
/// gives B^2 = -det(B)*Id, so exp(B) = cosh(s)*Id + (sinh(s)/s)*B with
/// s^2 = -det(B).
inline Mat2d exp_mat2(const Mat2d& m) {
    const cdouble mu = 0.5 * m.trace();
    Mat2d b = m;
    b.a11 -= mu;
    b.a22 -= mu;
    const cdouble s2 = -b.det();
    const cdouble s = std::sqrt(s2);
    cdouble ch, shc; // cosh(s), sinh(s)/s
    if (std::abs(s) < 1e-4) {
        // series in s^2, accurate to ~1e-16 at this radius
        ch = 1.0 + s2 * (0.5 + s2 * (1.0 / 24.0 + s2 / 720.0));
        shc = 1.0 + s2 * (1.0 / 6.0 + s2 * (1.0 / 120.0 + s2 / 5040.0));
    } else {
        ch = std::cosh(s);
        shc = std::sinh(s) / s;
    }
    const cdouble scale = std::exp(mu);
    Mat2d r = shc * b;
    r.a11 += ch;
    r.a22 += ch;
    return scale * r;
}

/// Matrix logarithm by the inverse power series, valid on ||M - Id|| <= 1/2.
/// Terms are added until their magnitude drops below 1e-16.
inline Mat2d log_near_identity(const Mat2d& m, double radius = 0.5) {
    const Mat2d e = m - Mat2d::identity();
    const double r = op_norm(e);
    if (r > radius + 1e-12)
        throw OutOfRadius("matrix log: ||M - Id|| = " + std::to_string(r) + " exceeds radius");
    Mat2d acc = e;
    Mat2d power = e;
    double sign = -1.0;
    for (int k = 2; k <= 200; ++k) {
        power = power * e;
        const double mag = max_abs(power) / k;
        if (mag < 1e-16) break;
        acc = acc + (cdouble(sign / k) * power);
        sign = -sign;
    }
    return acc;
}

struct QrSu2 {
    Mat2d q; // in SU(2) by construction
    Mat2d r; // upper triangular, r21 == 0 exactly, r11 real > 0
};

/// QR factorization with Q forced into SU(2): the first column is the
/// normalized first column of A, the second is its symplectic completion
/// (-conj(gamma), conj(alpha)), which has det Q = 1 identically.
inline QrSu2 qr_su2(const Mat2d& a, double tol = 1e-12) {
    const double n1 = std::sqrt(std::norm(a.a11) + std::norm(a.a21));
    if (n1 <= tol) throw NearSingularColumn("qr_su2: first column has near-zero norm");
    const cdouble alpha = a.a11 / n1;
    const cdouble gamma = a.a21 / n1;
    Mat2d q(alpha, -std::conj(gamma), gamma, std::conj(alpha));
    // R = Q^H * A; r21 vanishes identically and is stored as exact zero.
    const cdouble r12 = std::conj(alpha) * a.a12 + std::conj(gamma) * a.a22;
    const cdouble r22 = -gamma * a.a12 + alpha * a.a22;
    Mat2d r(cdouble(n1), r12, cdouble(0.0), r22);
    return {q, r};
}

// exact conversions

inline Mat2d to_cdouble(const Mat2q& m) {
    return {m.a11.to_cdouble(), m.a12.to_cdouble(), m.a21.to_cdouble(), m.a22.to_cdouble()};
}

} // namespace unifact
