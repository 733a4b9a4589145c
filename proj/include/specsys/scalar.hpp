// Exact field scalars: arbitrary-precision rationals and prime fields.
//
// Both types plug into Eigen dense matrices as custom scalars; all arithmetic
// is exact (no rounding, no overflow for Rational; modular for Fp).

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace specsys {

/// Arbitrary-precision rational, normalized (coprime, positive denominator).
class Rational {
public:
    using Rep = boost::multiprecision::cpp_rational;

    Rational() = default;
    Rational(int v) : v_(v) {}
    Rational(long v) : v_(v) {}
    Rational(long long v) : v_(v) {}
    explicit Rational(Rep v) : v_(std::move(v)) {}

    static Rational fraction(long long num, long long den) {
        if (den == 0) throw std::domain_error("Rational: zero denominator");
        return Rational(Rep(boost::multiprecision::cpp_int(num), boost::multiprecision::cpp_int(den)));
    }

    friend Rational operator+(const Rational& a, const Rational& b) { return Rational(Rep(a.v_ + b.v_)); }
    friend Rational operator-(const Rational& a, const Rational& b) { return Rational(Rep(a.v_ - b.v_)); }
    friend Rational operator*(const Rational& a, const Rational& b) { return Rational(Rep(a.v_ * b.v_)); }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.v_.is_zero()) throw std::domain_error("Rational: division by zero");
        return Rational(Rep(a.v_ / b.v_));
    }
    Rational operator-() const { return Rational(Rep(-v_)); }
    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o) { *this = *this / o; return *this; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
    friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
    friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
    friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

    bool is_zero() const { return v_.is_zero(); }
    const Rep& rep() const { return v_; }

    /// Decimal string, "a" or "a/b".
    std::string str() const {
        std::ostringstream os;
        os << v_;
        return os.str();
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.v_; }

private:
    Rep v_;
};

/// Element of a prime field with runtime characteristic.
///
/// A default-constructed or int-constructed value carries characteristic 0 and
/// acts as a plain integer literal; it is reduced the first time it meets a
/// moduled element. Eigen's Scalar(0)/Scalar(1) thus interoperate cleanly.
class Fp {
public:
    Fp() = default;
    Fp(int v) : v_(v) {}
    Fp(long v) : v_(v) {}
    Fp(long long v) : v_(v) {}
    Fp(long long v, long long p) : v_(v), p_(p) { reduce(); }

    long long value() const { return v_; }
    long long characteristic() const { return p_; }

    friend Fp operator+(const Fp& a, const Fp& b) {
        long long p = common(a, b);
        return Fp(a.v_ + b.v_, p);
    }
    friend Fp operator-(const Fp& a, const Fp& b) {
        long long p = common(a, b);
        return Fp(a.v_ - b.v_, p);
    }
    friend Fp operator*(const Fp& a, const Fp& b) {
        long long p = common(a, b);
        return Fp(a.v_ * b.v_, p);
    }
    friend Fp operator/(const Fp& a, const Fp& b) {
        long long p = common(a, b);
        if (p == 0) {
            if (b.v_ == 1) return a;
            if (b.v_ == -1) return Fp(-a.v_, 0);
            throw std::domain_error("Fp: division without a modulus");
        }
        return a * Fp(b.inverse_mod(p), p);
    }
    Fp operator-() const { return Fp(-v_, p_); }
    Fp& operator+=(const Fp& o) { *this = *this + o; return *this; }
    Fp& operator-=(const Fp& o) { *this = *this - o; return *this; }
    Fp& operator*=(const Fp& o) { *this = *this * o; return *this; }
    Fp& operator/=(const Fp& o) { *this = *this / o; return *this; }

    friend bool operator==(const Fp& a, const Fp& b) {
        long long p = common(a, b);
        if (p == 0) return a.v_ == b.v_;
        return ((a.v_ - b.v_) % p + p) % p == 0;
    }
    friend bool operator!=(const Fp& a, const Fp& b) { return !(a == b); }
    // Order is representative order; only used for deterministic tie-breaks.
    friend bool operator<(const Fp& a, const Fp& b) { return a.v_ < b.v_; }
    friend bool operator>(const Fp& a, const Fp& b) { return b < a; }
    friend bool operator<=(const Fp& a, const Fp& b) { return !(b < a); }
    friend bool operator>=(const Fp& a, const Fp& b) { return !(a < b); }

    bool is_zero() const { return p_ == 0 ? v_ == 0 : v_ % p_ == 0; }

    std::string str() const { return std::to_string(v_); }

    friend std::ostream& operator<<(std::ostream& os, const Fp& x) { return os << x.v_; }

private:
    void reduce() {
        if (p_ > 0) {
            v_ %= p_;
            if (v_ < 0) v_ += p_;
        }
    }
    long long inverse_mod(long long p) const {
        long long a = ((v_ % p) + p) % p;
        if (a == 0) throw std::domain_error("Fp: division by zero");
        long long t = 0, new_t = 1, r = p, new_r = a;
        while (new_r != 0) {
            long long q = r / new_r;
            t = std::exchange(new_t, t - q * new_t);
            r = std::exchange(new_r, r - q * new_r);
        }
        if (r != 1) throw std::domain_error("Fp: modulus not prime");
        return ((t % p) + p) % p;
    }
    static long long common(const Fp& a, const Fp& b) {
        if (a.p_ != 0 && b.p_ != 0 && a.p_ != b.p_)
            throw std::domain_error("Fp: mixed characteristics");
        return a.p_ != 0 ? a.p_ : b.p_;
    }

    long long v_ = 0;
    long long p_ = 0;
};

/// Which exact field coefficients live in.
struct FieldSpec {
    enum class Kind { rational, prime };
    Kind kind = Kind::rational;
    long long characteristic = 0;  // set iff kind == prime

    static FieldSpec rationals() { return {}; }
    static FieldSpec prime(long long p);

    bool operator==(const FieldSpec&) const = default;
};

inline bool is_prime_number(long long p) {
    if (p < 2) return false;
    for (long long d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

inline FieldSpec FieldSpec::prime(long long p) {
    if (!is_prime_number(p)) throw std::domain_error("FieldSpec: characteristic must be prime");
    FieldSpec f;
    f.kind = Kind::prime;
    f.characteristic = p;
    return f;
}

// Scalar construction tied to a FieldSpec: makes literals and parses the
// decimal coefficient strings "a" and "a/b".
template <class K>
struct FieldOps;

template <>
struct FieldOps<Rational> {
    static Rational make(const FieldSpec&, long long v) { return Rational(v); }
    static Rational parse(const FieldSpec&, const std::string& s) {
        try {
            return Rational(Rational::Rep(s));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad rational coefficient: '" + s + "'");
        }
    }
    static bool matches(const FieldSpec& f) { return f.kind == FieldSpec::Kind::rational; }
};

template <>
struct FieldOps<Fp> {
    static Fp make(const FieldSpec& f, long long v) { return Fp(v, f.characteristic); }
    static Fp parse(const FieldSpec& f, const std::string& s) {
        auto slash = s.find('/');
        try {
            if (slash == std::string::npos) return make(f, std::stoll(s));
            Fp num = make(f, std::stoll(s.substr(0, slash)));
            Fp den = make(f, std::stoll(s.substr(slash + 1)));
            return num / den;
        } catch (const std::domain_error&) {
            throw;
        } catch (const std::exception&) {
            throw std::invalid_argument("bad prime-field coefficient: '" + s + "'");
        }
    }
    static bool matches(const FieldSpec& f) { return f.kind == FieldSpec::Kind::prime; }
};

template <class K>
bool scalar_is_zero(const K& x) {
    return x.is_zero();
}

}  // namespace specsys

namespace Eigen {

template <>
struct NumTraits<specsys::Rational> {
    using Real = specsys::Rational;
    using NonInteger = specsys::Rational;
    using Literal = specsys::Rational;
    using Nested = specsys::Rational;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 8,
        AddCost = 60,
        MulCost = 60
    };
    static specsys::Rational epsilon() { return specsys::Rational(0); }
    static specsys::Rational dummy_precision() { return specsys::Rational(0); }
    static int digits10() { return 0; }
};

template <>
struct NumTraits<specsys::Fp> {
    using Real = specsys::Fp;
    using NonInteger = specsys::Fp;
    using Literal = specsys::Fp;
    using Nested = specsys::Fp;
    enum {
        IsComplex = 0,
        IsInteger = 1,
        IsSigned = 0,
        RequireInitialization = 1,
        ReadCost = 2,
        AddCost = 6,
        MulCost = 8
    };
    static specsys::Fp epsilon() { return specsys::Fp(0); }
    static specsys::Fp dummy_precision() { return specsys::Fp(0); }
    static int digits10() { return 0; }
};

}  // namespace Eigen
