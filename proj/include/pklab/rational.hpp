#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <cstdint>
#include <string>

#include "pklab/error.hpp"

namespace pklab {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Gaussian rational a + b*i with exact rational parts.
struct GaussRat {
    Rational re;
    Rational im;

    GaussRat() : re(0), im(0) {}
    GaussRat(long n) : re(n), im(0) {}
    GaussRat(Rational r) : re(std::move(r)), im(0) {}
    GaussRat(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

    static GaussRat i_unit() { return GaussRat(Rational(0), Rational(1)); }

    /// i^k for any integer k.
    static GaussRat i_pow(long k) {
        long m = ((k % 4) + 4) % 4;
        switch (m) {
            case 0: return GaussRat(1);
            case 1: return i_unit();
            case 2: return GaussRat(-1);
            default: return GaussRat(Rational(0), Rational(-1));
        }
    }

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_one() const { return re == 1 && im == 0; }
    bool is_real() const { return im == 0; }

    GaussRat conj() const { return GaussRat(re, -im); }

    GaussRat operator-() const { return GaussRat(-re, -im); }

    GaussRat operator+(const GaussRat& o) const { return GaussRat(re + o.re, im + o.im); }
    GaussRat operator-(const GaussRat& o) const { return GaussRat(re - o.re, im - o.im); }
    GaussRat operator*(const GaussRat& o) const {
        return GaussRat(re * o.re - im * o.im, re * o.im + im * o.re);
    }
    GaussRat operator/(const GaussRat& o) const {
        Rational n = o.re * o.re + o.im * o.im;
        if (n == 0) fail(errc::division_by_zero, "division by zero Gaussian rational");
        return GaussRat((re * o.re + im * o.im) / n, (im * o.re - re * o.im) / n);
    }

    GaussRat& operator+=(const GaussRat& o) { re += o.re; im += o.im; return *this; }
    GaussRat& operator-=(const GaussRat& o) { re -= o.re; im -= o.im; return *this; }
    GaussRat& operator*=(const GaussRat& o) { *this = *this * o; return *this; }

    bool operator==(const GaussRat& o) const { return re == o.re && im == o.im; }
    bool operator!=(const GaussRat& o) const { return !(*this == o); }

    /// Deterministic total order (re first, then im); not a numeric order.
    int cmp(const GaussRat& o) const {
        if (re != o.re) return re < o.re ? -1 : 1;
        if (im != o.im) return im < o.im ? -1 : 1;
        return 0;
    }

    GaussRat pow(unsigned k) const {
        GaussRat acc(1), base = *this;
        while (k) {
            if (k & 1) acc *= base;
            base *= base;
            k >>= 1;
        }
        return acc;
    }

    std::complex<double> to_complex() const { return {to_double(re), to_double(im)}; }
};

inline std::string rat_str(const Rational& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

/// Canonical text: "3", "-1/2", "i", "-2*i", "(1 + 2*i)", "(1/2 - i)".
inline std::string to_string(const GaussRat& g) {
    if (g.im == 0) return rat_str(g.re);
    std::string im_part;
    if (g.im == 1) im_part = "i";
    else if (g.im == -1) im_part = "-i";
    else im_part = rat_str(g.im) + "*i";
    if (g.re == 0) return im_part;
    std::string s = "(" + rat_str(g.re);
    if (g.im > 0) s += " + " + (g.im == 1 ? std::string("i") : rat_str(g.im) + "*i");
    else s += " - " + (g.im == -1 ? std::string("i") : rat_str(-g.im) + "*i");
    return s + ")";
}

} // namespace pklab
