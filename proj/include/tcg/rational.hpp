#ifndef TCG_RATIONAL_HPP
#define TCG_RATIONAL_HPP

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tcg {

// Exact rational arithmetic for timestamps.  All verdict paths use Rat;
// doubles appear only in display output.
class Rat {
public:
    Rat() : num_(0), den_(1) {}
    Rat(long long n) : num_(n), den_(1) {}
    Rat(long long n, long long d) : num_(n), den_(d) { normalize(); }

    long long num() const { return num_; }
    long long den() const { return den_; }

    friend Rat operator+(const Rat& a, const Rat& b) {
        return Rat(mul(a.num_, b.den_) + mul(b.num_, a.den_), mul(a.den_, b.den_));
    }
    friend Rat operator-(const Rat& a, const Rat& b) {
        return Rat(mul(a.num_, b.den_) - mul(b.num_, a.den_), mul(a.den_, b.den_));
    }
    friend Rat operator*(const Rat& a, const Rat& b) {
        return Rat(mul(a.num_, b.num_), mul(a.den_, b.den_));
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return Rat(mul(a.num_, b.den_), mul(a.den_, b.num_));
    }
    Rat operator-() const { return Rat(-num_, den_); }

    friend bool operator==(const Rat& a, const Rat& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
    friend bool operator<(const Rat& a, const Rat& b) {
        return mul(a.num_, b.den_) < mul(b.num_, a.den_);
    }
    friend bool operator<=(const Rat& a, const Rat& b) { return !(b < a); }
    friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
    friend bool operator>=(const Rat& a, const Rat& b) { return !(a < b); }

    // Floor division; frac() is always in [0, 1).
    long long floor() const {
        long long q = num_ / den_;
        if (num_ % den_ != 0 && num_ < 0) --q;
        return q;
    }
    Rat frac() const { return *this - Rat(floor()); }

    bool is_integer() const { return den_ == 1; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

private:
    static long long mul(long long a, long long b) {
        __int128 p = static_cast<__int128>(a) * b;
        if (p > INT64_MAX || p < INT64_MIN) throw std::overflow_error("rational overflow");
        return static_cast<long long>(p);
    }

    void normalize() {
        if (den_ == 0) throw std::domain_error("rational with zero denominator");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
        if (num_ == 0) den_ = 1;
    }

    long long num_;
    long long den_;
};

} // namespace tcg

#endif
