#pragma once

#include <cmath>
#include <numbers>

#include <gmpxx.h>

namespace dmsum {

using Rational = mpq_class;

// Neumaier's variant of Kahan summation. Keeps the running compensation
// separately so that the state can be checkpointed and restored exactly.
class NeumaierSum {
public:
    NeumaierSum() = default;
    explicit NeumaierSum(double sum, double compensation = 0.0)
        : sum_(sum), comp_(compensation)
    {
    }

    void add(double x)
    {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    NeumaierSum& operator+=(double x)
    {
        add(x);
        return *this;
    }

    NeumaierSum& operator+=(const NeumaierSum& other)
    {
        add(other.sum_);
        add(other.comp_);
        return *this;
    }

    double value() const { return sum_ + comp_; }
    double raw_sum() const { return sum_; }
    double compensation() const { return comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Accumulator selection for code templated on the scalar type:
// compensated doubles, or exact rationals.
template <class T>
struct Accumulator;

template <>
struct Accumulator<double> {
    NeumaierSum s;
    void add(double x) { s.add(x); }
    double value() const { return s.value(); }
};

template <>
struct Accumulator<Rational> {
    Rational s = 0;
    void add(const Rational& x) { s += x; }
    Rational value() const { return s; }
};

template <class T>
T make_ratio(long long num, long long den)
{
    if constexpr (std::is_same_v<T, Rational>) {
        Rational r(static_cast<long>(num), static_cast<unsigned long>(den < 0 ? -den : den));
        if (den < 0) r = -r;
        r.canonicalize();
        return r;
    } else {
        return static_cast<double>(num) / static_cast<double>(den);
    }
}

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.get_d(); }

inline constexpr double euler_gamma = std::numbers::egamma;
inline constexpr double six_over_pi_sq = 6.0 / (std::numbers::pi * std::numbers::pi);

} // namespace dmsum
