#pragma once

// Segmented sieves for multiplicative data, plus the combinatorial
// enumerators (primorial divisors, d-smooth numbers) used everywhere else.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "error.hpp"

namespace dmsum {

inline u64 isqrt(u64 n)
{
    u64 r = static_cast<u64>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

// Overflow-checked product; nullopt when a*b does not fit in 64 bits.
inline std::optional<u64> checked_mul(u64 a, u64 b)
{
    u64 out = 0;
    if (__builtin_mul_overflow(a, b, &out)) return std::nullopt;
    return out;
}

inline std::vector<u64> primes_upto(u64 n)
{
    std::vector<u64> out;
    if (n < 2) return out;
    std::vector<char> composite(n + 1, 0);
    for (u64 p = 2; p * p <= n; ++p) {
        if (composite[p]) continue;
        for (u64 m = p * p; m <= n; m += p) composite[m] = 1;
    }
    out.reserve(static_cast<std::size_t>(1.26 * static_cast<double>(n) / std::log(static_cast<double>(n))) + 8);
    for (u64 p = 2; p <= n; ++p)
        if (!composite[p]) out.push_back(p);
    return out;
}

// Exact mu, phi and smallest prime factor on [lo, hi].
struct MultiplicativeBlock {
    u64 lo = 1;
    u64 hi = 0;
    std::vector<std::int8_t> mu;
    std::vector<u64> phi;
    std::vector<u64> spf;

    std::size_t size() const { return mu.size(); }
    int mu_at(u64 n) const { return mu[n - lo]; }
    u64 phi_at(u64 n) const { return phi[n - lo]; }
    u64 spf_at(u64 n) const { return spf[n - lo]; }
};

// Distinct prime factors of every n in [lo, hi], stored as one flat
// array with per-n offsets (CSR). mu is included since it falls out of
// the same pass.
struct FactoredBlock {
    u64 lo = 1;
    u64 hi = 0;
    std::vector<std::int8_t> mu;
    std::vector<std::uint32_t> offset;  // size()+1 entries
    std::vector<u64> primes;

    std::size_t size() const { return mu.size(); }
    int mu_at(u64 n) const { return mu[n - lo]; }
    std::span<const u64> primes_of(u64 n) const
    {
        const std::size_t i = n - lo;
        return {primes.data() + offset[i], primes.data() + offset[i + 1]};
    }
};

// Holds the base primes up to sqrt(hi_max) so that consecutive segments
// can be sieved without recomputing them.
class SegmentedSieve {
public:
    explicit SegmentedSieve(u64 hi_max, const Limits& limits = default_limits())
        : hi_max_(hi_max), limits_(limits), base_(primes_upto(isqrt(std::max<u64>(hi_max, 1))))
    {
    }

    const Limits& limits() const { return limits_; }

    MultiplicativeBlock block(u64 lo, u64 hi) const
    {
        check_range(lo, hi);
        const std::size_t len = hi - lo + 1;
        MultiplicativeBlock b;
        b.lo = lo;
        b.hi = hi;
        b.mu.assign(len, 1);
        b.phi.resize(len);
        b.spf.assign(len, 0);
        std::vector<u64> rem(len);
        for (std::size_t i = 0; i < len; ++i) rem[i] = b.phi[i] = lo + i;
        for (u64 p : base_) {
            if (p * p > hi) break;
            for (u64 n = first_multiple(lo, p); n <= hi; n += p) {
                const std::size_t i = n - lo;
                if (b.spf[i] == 0) b.spf[i] = p;
                int e = 0;
                while (rem[i] % p == 0) {
                    rem[i] /= p;
                    ++e;
                }
                b.mu[i] = e >= 2 ? 0 : static_cast<std::int8_t>(-b.mu[i]);
                b.phi[i] = b.phi[i] / p * (p - 1);
            }
        }
        for (std::size_t i = 0; i < len; ++i) {
            if (rem[i] > 1) {
                b.mu[i] = static_cast<std::int8_t>(-b.mu[i]);
                b.phi[i] = b.phi[i] / rem[i] * (rem[i] - 1);
                if (b.spf[i] == 0) b.spf[i] = rem[i];
            }
        }
        if (lo == 1) b.spf[0] = 1;
        return b;
    }

    std::vector<std::int8_t> mobius(u64 lo, u64 hi) const
    {
        check_range(lo, hi);
        const std::size_t len = hi - lo + 1;
        std::vector<std::int8_t> mu(len, 1);
        std::vector<u64> prod(len, 1);
        for (u64 p : base_) {
            const u64 p2 = p * p;
            if (p2 > hi) break;
            for (u64 n = first_multiple(lo, p); n <= hi; n += p) {
                const std::size_t i = n - lo;
                mu[i] = static_cast<std::int8_t>(-mu[i]);
                prod[i] *= p;
            }
            for (u64 n = first_multiple(lo, p2); n <= hi; n += p2) mu[n - lo] = 0;
        }
        for (std::size_t i = 0; i < len; ++i)
            if (mu[i] != 0 && prod[i] != lo + i) mu[i] = static_cast<std::int8_t>(-mu[i]);
        return mu;
    }

    FactoredBlock factored(u64 lo, u64 hi) const
    {
        check_range(lo, hi);
        const std::size_t len = hi - lo + 1;
        FactoredBlock b;
        b.lo = lo;
        b.hi = hi;
        b.mu.assign(len, 1);
        std::vector<u64> rem(len);
        std::vector<std::uint8_t> count(len, 0);
        for (std::size_t i = 0; i < len; ++i) rem[i] = lo + i;
        for (u64 p : base_) {
            if (p * p > hi) break;
            for (u64 n = first_multiple(lo, p); n <= hi; n += p) {
                const std::size_t i = n - lo;
                ++count[i];
                int e = 0;
                while (rem[i] % p == 0) {
                    rem[i] /= p;
                    ++e;
                }
                b.mu[i] = e >= 2 ? 0 : static_cast<std::int8_t>(-b.mu[i]);
            }
        }
        b.offset.resize(len + 1);
        b.offset[0] = 0;
        for (std::size_t i = 0; i < len; ++i) {
            if (rem[i] > 1) {
                ++count[i];
                b.mu[i] = static_cast<std::int8_t>(-b.mu[i]);
            }
            b.offset[i + 1] = b.offset[i] + count[i];
        }
        b.primes.resize(b.offset[len]);
        std::vector<std::uint32_t> pos(b.offset.begin(), b.offset.end() - 1);
        for (u64 p : base_) {
            if (p * p > hi) break;
            for (u64 n = first_multiple(lo, p); n <= hi; n += p) b.primes[pos[n - lo]++] = p;
        }
        for (std::size_t i = 0; i < len; ++i)
            if (rem[i] > 1) b.primes[pos[i]++] = rem[i];
        return b;
    }

private:
    static u64 first_multiple(u64 lo, u64 p) { return (lo + p - 1) / p * p; }

    void check_range(u64 lo, u64 hi) const
    {
        detail::require(lo >= 1, "sieve range must start at 1 or above");
        detail::require(hi >= lo, "sieve range is empty (hi < lo)");
        detail::require(hi <= hi_max_, "sieve range exceeds the configured upper limit");
        if (hi - lo + 1 > limits_.max_segment)
            throw BudgetExceeded("sieve segment of " + std::to_string(hi - lo + 1) +
                                 " integers exceeds the segment budget");
    }

    u64 hi_max_;
    Limits limits_;
    std::vector<u64> base_;
};

inline MultiplicativeBlock sieve_range(u64 lo, u64 hi, const Limits& limits = default_limits())
{
    if (hi < lo) throw InvalidArgument("sieve_range: hi < lo");
    return SegmentedSieve(hi, limits).block(lo, hi);
}

// Calls fn(const FactoredBlock&) for consecutive segments covering [lo, hi].
template <class Fn>
void for_each_factored_segment(u64 lo, u64 hi, const Limits& limits, Fn&& fn)
{
    if (hi < lo) return;
    const SegmentedSieve sieve(hi, limits);
    const u64 step = std::min(limits.segment_length, limits.max_segment);
    for (u64 a = lo; a <= hi;) {
        const u64 b = std::min(hi, a + step - 1);
        fn(sieve.factored(a, b));
        if (b == hi) break;
        a = b + 1;
    }
}

// Calls fn(u64 segment_lo, std::span<const int8_t> mu) over [lo, hi].
template <class Fn>
void for_each_mobius_segment(u64 lo, u64 hi, const Limits& limits, Fn&& fn)
{
    if (hi < lo) return;
    const SegmentedSieve sieve(hi, limits);
    const u64 step = std::min(limits.segment_length, limits.max_segment);
    for (u64 a = lo; a <= hi;) {
        const u64 b = std::min(hi, a + step - 1);
        const auto mu = sieve.mobius(a, b);
        fn(a, std::span<const std::int8_t>(mu));
        if (b == hi) break;
        a = b + 1;
    }
}

inline std::vector<std::int8_t> mobius_upto(u64 n)
{
    std::vector<std::int8_t> mu(n + 1, 0);
    if (n == 0) return mu;
    Limits lim = default_limits();
    lim.max_segment = std::max(lim.max_segment, n);
    const auto seg = SegmentedSieve(n, lim).mobius(1, n);
    std::copy(seg.begin(), seg.end(), mu.begin() + 1);
    return mu;
}

// Trial-division factorisation, (prime, exponent) pairs ascending.
inline std::vector<std::pair<u64, int>> factorize(u64 n)
{
    std::vector<std::pair<u64, int>> out;
    for (u64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p) continue;
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.emplace_back(p, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

inline bool is_squarefree(u64 n)
{
    for (auto [p, e] : factorize(n))
        if (e > 1) return false;
    return true;
}

inline std::vector<u64> distinct_primes(u64 n)
{
    std::vector<u64> out;
    for (auto [p, e] : factorize(n)) out.push_back(p);
    return out;
}

// Prime factors of a squarefree n; rejects anything else.
inline std::vector<u64> squarefree_primes(u64 n)
{
    detail::require(n >= 1, "expected a positive squarefree integer");
    std::vector<u64> out;
    for (auto [p, e] : factorize(n)) {
        if (e > 1) throw InvalidArgument(std::to_string(n) + " is not squarefree");
        out.push_back(p);
    }
    return out;
}

inline int mobius(u64 n)
{
    int mu = 1;
    for (auto [p, e] : factorize(n)) {
        if (e > 1) return 0;
        mu = -mu;
    }
    return mu;
}

inline u64 totient(u64 n)
{
    u64 phi = n;
    for (auto [p, e] : factorize(n)) phi = phi / p * (p - 1);
    return phi;
}

struct Primorial {
    u64 j = 1;
    std::vector<u64> primes;

    // The product itself, when it fits in 64 bits (it stops fitting at j=53).
    std::optional<u64> value() const
    {
        u64 v = 1;
        for (u64 p : primes) {
            const auto next = checked_mul(v, p);
            if (!next) return std::nullopt;
            v = *next;
        }
        return v;
    }
};

inline Primorial primorial(u64 j)
{
    detail::require(j >= 1, "primorial index must be >= 1");
    return Primorial{j, primes_upto(j)};
}

namespace detail {

template <class Visit>
void subset_dfs(std::span<const u64> primes, std::size_t idx, std::vector<u64>& chosen, Visit& visit)
{
    if (idx == primes.size()) {
        visit(std::span<const u64>(chosen));
        return;
    }
    subset_dfs(primes, idx + 1, chosen, visit);
    chosen.push_back(primes[idx]);
    subset_dfs(primes, idx + 1, chosen, visit);
    chosen.pop_back();
}

} // namespace detail

// Visits every squarefree divisor of the primorial of j, as its (ascending)
// list of primes. Never forms the primorial itself.
template <class Visit>
void for_each_primorial_divisor(u64 j, Visit&& visit, const Limits& limits = default_limits())
{
    const Primorial pr = primorial(j);
    if (pr.primes.size() > limits.max_primorial_primes)
        throw BudgetExceeded("primorial of " + std::to_string(j) + " has " +
                             std::to_string(pr.primes.size()) + " prime factors, budget is " +
                             std::to_string(limits.max_primorial_primes));
    std::vector<u64> chosen;
    chosen.reserve(pr.primes.size());
    detail::subset_dfs(std::span<const u64>(pr.primes), 0, chosen, visit);
}

// Squarefree divisors of the primorial of j that are <= cap (all of them
// when cap is empty). Throws if an uncapped divisor overflows 64 bits.
inline std::vector<u64> primorial_divisors(u64 j, std::optional<u64> cap = std::nullopt,
                                           const Limits& limits = default_limits())
{
    std::vector<u64> out;
    for_each_primorial_divisor(
        j,
        [&](std::span<const u64> ps) {
            u64 v = 1;
            for (u64 p : ps) {
                const auto next = checked_mul(v, p);
                if (!next) {
                    if (cap) return;
                    throw BudgetExceeded("primorial divisor exceeds 64 bits; pass a cap");
                }
                v = *next;
            }
            if (!cap || v <= *cap) out.push_back(v);
        },
        limits);
    return out;
}

// Visits every k <= limit whose prime factors all lie in `primes`, with
// Omega(k) and phi(k). Order is depth-first, not ascending.
template <class Visit>
void for_each_smooth(std::span<const u64> primes, u64 limit, Visit&& visit)
{
    struct Frame {
        static void go(std::span<const u64> ps, std::size_t idx, u64 k, int omega, u64 phi, u64 limit,
                       Visit& visit)
        {
            if (idx == ps.size()) {
                visit(k, omega, phi);
                return;
            }
            const u64 p = ps[idx];
            go(ps, idx + 1, k, omega, phi, limit, visit);
            if (k > limit / p) return;
            u64 kk = k * p;
            u64 ph = phi * (p - 1);
            int om = omega + 1;
            for (;;) {
                go(ps, idx + 1, kk, om, ph, limit, visit);
                if (kk > limit / p) break;
                kk *= p;
                ph *= p;
                ++om;
            }
        }
    };
    if (limit < 1) return;
    Frame::go(primes, 0, 1, 0, 1, limit, visit);
}

// Ascending k <= limit with k | d^infinity.
inline std::vector<u64> smooth_numbers(u64 d, u64 limit)
{
    detail::require(d >= 1, "smooth_numbers: d must be >= 1");
    const auto ps = distinct_primes(d);
    std::vector<u64> out;
    for_each_smooth(std::span<const u64>(ps), limit, [&](u64 k, int, u64) { out.push_back(k); });
    std::sort(out.begin(), out.end());
    return out;
}

// Number of squarefree n <= X, via sum_{k <= sqrt X} mu(k) floor(X/k^2).
inline u64 squarefree_count(u64 X)
{
    if (X == 0) return 0;
    const u64 r = isqrt(X);
    const auto mu = mobius_upto(r);
    i64 total = 0;
    for (u64 k = 1; k <= r; ++k)
        if (mu[k]) total += mu[k] * static_cast<i64>(X / (k * k));
    return static_cast<u64>(total);
}

} // namespace dmsum
