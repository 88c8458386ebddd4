#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace pags {

/// Exact arbitrary-precision fraction, always kept in canonical reduced form
/// with a positive denominator.
class Rational
{
public:
    Rational() = default;
    Rational(long value) : _value(value) {}                  // NOLINT(google-explicit-constructor)
    Rational(int value) : _value(static_cast<long>(value)) {} // NOLINT(google-explicit-constructor)
    Rational(long num, long den);
    explicit Rational(mpq_class value);

    /// Parses `int` or `int/int` (optionally signed). Decimal points are rejected.
    static Rational parse(std::string_view text);

    [[nodiscard]] std::string to_string() const;
    [[nodiscard]] const mpq_class& raw() const { return _value; }
    [[nodiscard]] mpz_class numerator() const { return _value.get_num(); }
    [[nodiscard]] mpz_class denominator() const { return _value.get_den(); }
    [[nodiscard]] int sign() const { return sgn(_value); }
    [[nodiscard]] bool is_zero() const { return sign() == 0; }
    [[nodiscard]] bool is_integer() const { return _value.get_den() == 1; }

    Rational& operator+=(const Rational& o) { _value += o._value; return *this; }
    Rational& operator-=(const Rational& o) { _value -= o._value; return *this; }
    Rational& operator*=(const Rational& o) { _value *= o._value; return *this; }
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
    friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a._value)); }

    friend bool operator==(const Rational& a, const Rational& b) { return cmp(a._value, b._value) == 0; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b)
    {
        const int c = cmp(a._value, b._value);
        return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }

    [[nodiscard]] std::size_t hash() const;

private:
    mpq_class _value;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

/// Least common multiple of the denominators; 1 for an empty range.
template <typename Range>
mpz_class common_denominator(const Range& values)
{
    mpz_class l = 1;
    for (const Rational& v : values) {
        mpz_class d = v.denominator();
        mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), d.get_mpz_t());
    }
    return l;
}

} // namespace pags

template <>
struct std::hash<pags::Rational>
{
    std::size_t operator()(const pags::Rational& r) const noexcept { return r.hash(); }
};
