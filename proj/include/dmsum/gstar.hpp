#pragma once

// The family G*_q(X) = sum_{d <= X, (d,q)=1} mu^2(d) phi(d) / d^2, its
// asymptotic expansion, the remainders r1*, r2* and the auxiliary checks
// they rest on.
//
// G*_q is (g * 1)(n)/n summed over n <= X, where g is multiplicative with
//   g(p) = -1/p, g(p^2) = -(p-1)/p, g(p^k) = 0 (k >= 3)   for p not dividing q,
//   g(p) = -1,   g(p^k) = 0 (k >= 2)                      for p dividing q.
// Equivalently g(m) = sum over m = k^2 l r, r | q, (kl, q) = (k, l) = 1 of
// mu(rkl) phi(k) / (kl), and r1*(X; q) = sum_{m <= X} |g(m)|,
// r2*(X; q) = sum_{m > X} g(m)/m.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "error.hpp"
#include "euler.hpp"
#include "mertens.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "report.hpp"
#include "sieve.hpp"

namespace dmsum {

// value - radius <= true value <= value + radius.
struct Certified {
    double value = 0;
    double radius = 0;
};

inline double j1_star(u64 q)
{
    double v = 1;
    for (u64 pp : squarefree_primes(q)) {
        const double p = static_cast<double>(pp);
        v *= (p * std::sqrt(p) + p) / (p * std::sqrt(p) + 1);
    }
    return v;
}

inline double j5_star(u64 q)
{
    double v = 1;
    for (u64 pp : squarefree_primes(q)) {
        const double p = static_cast<double>(pp);
        const double p54 = std::pow(p, 1.25);
        v *= (p54 + p) / (p54 + 1);
    }
    return v;
}

namespace detail {

inline void require_positive_q(u64 q)
{
    require(q >= 1, "q must be >= 1");
    if (!is_squarefree(q)) throw InvalidArgument("q must be squarefree");
}

inline unsigned valuation(u64 n, u64 p)
{
    unsigned e = 0;
    while (n % p == 0) {
        n /= p;
        ++e;
    }
    return e;
}

// values[n] = prod_{p^e || n} local(p, e, p | q) for 1 <= n <= N; values[0] = 0.
template <class Local>
std::vector<double> multiplicative_table(u64 N, u64 q, const Limits& limits, Local&& local)
{
    if (N + 1 > limits.memory_bytes / sizeof(double)) throw BudgetExceeded("multiplicative table exceeds memory budget");
    std::vector<double> v(N + 1, 0.0);
    if (N == 0) return v;
    for_each_factored_segment(1, N, limits, [&](const FactoredBlock& b) {
        for (u64 n = b.lo; n <= b.hi; ++n) {
            double x = 1;
            for (u64 p : b.primes_of(n)) {
                x *= local(p, valuation(n, p), q % p == 0);
                if (x == 0) break;
            }
            v[n] = x;
        }
    });
    return v;
}

} // namespace detail

// g(m) for m <= N.
inline std::vector<double> g_table(u64 q, u64 N, const Limits& limits = default_limits())
{
    detail::require_positive_q(q);
    return detail::multiplicative_table(N, q, limits, [](u64 pp, unsigned e, bool divides_q) {
        const double p = static_cast<double>(pp);
        if (divides_q) return e == 1 ? -1.0 : 0.0;
        if (e == 1) return -1.0 / p;
        if (e == 2) return -(p - 1) / p;
        return 0.0;
    });
}

// g(m) from its defining sum over m = k^2 l r, exact.
inline Rational g_direct(u64 q, u64 m)
{
    detail::require_positive_q(q);
    Rational s = 0;
    for (u64 k = 1; k * k <= m; ++k) {
        if (m % (k * k) != 0 || std::gcd(k, q) != 1) continue;
        const u64 rest = m / (k * k);
        for (u64 r = 1; r <= rest; ++r) {
            if (rest % r != 0 || q % r != 0) continue;
            const u64 l = rest / r;
            if (std::gcd(l, q) != 1 || std::gcd(k, l) != 1) continue;
            const int mu = mobius(r * k * l);
            if (mu == 0) continue;
            s += Rational(static_cast<long>(mu) * static_cast<long>(totient(k)), static_cast<unsigned long>(k * l));
        }
    }
    return s;
}

// G*_q(n) for n = 0..N.
inline std::vector<double> gstar_prefix(u64 q, u64 N, const Limits& limits = default_limits())
{
    detail::require_positive_q(q);
    if (N + 1 > limits.memory_bytes / sizeof(double)) throw BudgetExceeded("G* prefix exceeds memory budget");
    std::vector<double> out(N + 1, 0.0);
    NeumaierSum s;
    for_each_factored_segment(1, N, limits, [&](const FactoredBlock& b) {
        for (u64 d = b.lo; d <= b.hi; ++d) {
            if (b.mu_at(d) != 0) {
                bool coprime_q = true;
                double phi_over_d = 1;
                for (u64 p : b.primes_of(d)) {
                    if (q % p == 0) {
                        coprime_q = false;
                        break;
                    }
                    phi_over_d *= 1.0 - 1.0 / static_cast<double>(p);
                }
                if (coprime_q) s.add(phi_over_d / static_cast<double>(d));
            }
            out[d] = s.value();
        }
    });
    return out;
}

inline double gstar(u64 q, double X, const Limits& limits = default_limits())
{
    detail::require(X >= 0, "gstar needs X >= 0");
    const u64 n = floor_to_u64(X);
    if (n == 0) return 0;
    return gstar_prefix(q, n, limits)[n];
}

// Exact rational G*_q(X); intended for X up to about 10^4.
inline Rational gstar_exact(u64 q, double X)
{
    detail::require_positive_q(q);
    detail::require(X >= 0, "gstar needs X >= 0");
    const u64 n = floor_to_u64(X);
    Rational s = 0;
    for (u64 d = 1; d <= n; ++d) {
        if (std::gcd(d, q) != 1 || !is_squarefree(d)) continue;
        s += Rational(static_cast<unsigned long>(totient(d)), static_cast<unsigned long>(d * d));
    }
    return s;
}

struct GstarAsymptotic {
    double main = 0;
    double error_radius = 0;
    double main_slack = 0;  // uncertainty of main from the certified constants
};

inline GstarAsymptotic gstar_asymptotic(const GqConstants& k, double X)
{
    detail::require(X > 0, "gstar_asymptotic needs X > 0");
    const double L = std::log(X) + k.cq.value;
    GstarAsymptotic out;
    out.main = k.Hq1 * L;
    out.error_radius = 4.73 * j1_star(k.q) / std::sqrt(X);
    out.main_slack = std::max(k.Hq1_upper - k.Hq1, k.Hq1 - k.Hq1_lower) * std::fabs(L) + k.Hq1_upper * k.cq.slack;
    return out;
}

inline GstarAsymptotic gstar_asymptotic(u64 q, double X) { return gstar_asymptotic(gq_constants(q), X); }

// Radius for G*_q(X) - G*_q(Y) - H_q(1) log(X/Y).
inline double gstar_difference_bound(u64 q, double X, double Y)
{
    detail::require(Y > 0 && X >= Y, "gstar_difference_bound needs X >= Y > 0");
    const double c = 2 * (std::exp(euler_gamma / 2) - 1);
    const double e = std::exp(euler_gamma);
    return 2.18 * j1_star(q) *
           (c / std::sqrt(X) + c / std::sqrt(Y) + 2 / std::sqrt(e * Y) - 2 / std::sqrt(e * X));
}

// r1*(n; q) for n = 0..N.
inline std::vector<double> r1_star_prefix(u64 q, u64 N, const Limits& limits = default_limits())
{
    auto w = g_table(q, N, limits);
    NeumaierSum s;
    for (u64 n = 1; n <= N; ++n) {
        s.add(std::fabs(w[n]));
        w[n] = s.value();
    }
    return w;
}

inline double r1_star(double X, u64 q, const Limits& limits = default_limits())
{
    detail::require(X >= 0, "r1_star needs X >= 0");
    const u64 n = floor_to_u64(X);
    if (n == 0) return 0;
    return r1_star_prefix(q, n, limits)[n];
}

// r1* from its defining sum over triples (k, l, r); exact.
inline Rational r1_star_direct(double X, u64 q)
{
    detail::require_positive_q(q);
    const u64 n = floor_to_u64(X);
    Rational s = 0;
    for (u64 k = 1; k * k <= n; ++k) {
        if (std::gcd(k, q) != 1) continue;
        for (u64 r = 1; k * k * r <= n; ++r) {
            if (q % r != 0) continue;
            for (u64 l = 1; k * k * l * r <= n; ++l) {
                if (std::gcd(l, q) != 1 || std::gcd(k, l) != 1) continue;
                if (mobius(r * k * l) == 0) continue;
                s += Rational(static_cast<unsigned long>(totient(k)), static_cast<unsigned long>(k * l));
            }
        }
    }
    return s;
}

// sum_{m <= n} g(m)/m for n = 0..N.
inline std::vector<double> g_over_m_prefix(u64 q, u64 N, const Limits& limits = default_limits())
{
    auto w = g_table(q, N, limits);
    NeumaierSum s;
    for (u64 n = 1; n <= N; ++n) {
        s.add(w[n] / static_cast<double>(n));
        w[n] = s.value();
    }
    return w;
}

// r2*(X; q) = H_q(1) - sum_{m <= X} g(m)/m; the radius carries the
// certified uncertainty of H_q(1).
inline Certified r2_star(double X, const GqConstants& k, const Limits& limits = default_limits())
{
    detail::require(X >= 0, "r2_star needs X >= 0");
    const u64 n = floor_to_u64(X);
    const double partial = n == 0 ? 0.0 : g_over_m_prefix(k.q, n, limits)[n];
    const double rad = std::max(k.Hq1_upper - k.Hq1, k.Hq1 - k.Hq1_lower);
    return {k.Hq1 - partial, rad + 1e-15 * static_cast<double>(n)};
}

inline Certified r2_star(double X, u64 q, const Limits& limits = default_limits())
{
    return r2_star(X, gq_constants(q), limits);
}

// sum_{X < m <= T} g(m)/m, the part of r2* below a finite cutoff.
inline double r2_star_window(double X, u64 T, u64 q, const Limits& limits = default_limits())
{
    const u64 n = floor_to_u64(X);
    detail::require(T >= n, "r2_star_window needs T >= X");
    const auto pre = g_over_m_prefix(q, T, limits);
    return pre[T] - pre[n];
}

// ---------------------------------------------------------------------------
// Scans of r1*.

inline bool primes_below_30(u64 q)
{
    for (u64 p : squarefree_primes(q))
        if (p >= 30) return false;
    return true;
}

// r1*(X; q) <= 2.18 sqrt(X) j1*(q); r1* <= 1.17 sqrt(X) j1*(q) for q with
// all prime factors below 30 and X <= 10^6; and the second form
// r1* <= 0.931 sqrt(X) j1* + 1.96 X^(1/4) j5*. r1* is a non-decreasing
// step function, so each ratio over real X peaks at an integer.
inline BoundReport scan_majorstar(u64 X_max, std::span<const u64> q_set, const Limits& limits = default_limits(),
                                  u64 starter_limit = 1000000)
{
    std::vector<BoundReport> first(q_set.size()), starter(q_set.size()), second(q_set.size());
    std::vector<bool> has_starter(q_set.size(), false);
    parallel_for(q_set.size(), limits.threads, [&](std::size_t i) {
        const u64 q = q_set[i];
        const double j1 = j1_star(q), j5 = j5_star(q);
        const auto r1 = r1_star_prefix(q, X_max, limits);
        const std::string tag = " q=" + std::to_string(q);
        BoundReport a("majorstar1" + tag, 1, static_cast<double>(X_max), 2.18);
        BoundReport c("majorstar1-second" + tag, 1, static_cast<double>(X_max), 1.0);
        const u64 s_lim = std::min(X_max, starter_limit);
        BoundReport b("major1starter" + tag, 1, static_cast<double>(s_lim), 1.17);
        for (u64 n = 1; n <= X_max; ++n) {
            const double x = static_cast<double>(n);
            const double rt = std::sqrt(x);
            const double ratio = r1[n] / (rt * j1);
            a.observe(ratio, x);
            if (n <= s_lim) b.observe(ratio, x);
            c.observe(r1[n] / (0.931 * rt * j1 + 1.96 * std::sqrt(rt) * j5), x);
        }
        a.finish_upper();
        b.finish_upper();
        c.finish_upper();
        first[i] = std::move(a);
        second[i] = std::move(c);
        if (primes_below_30(q)) {
            starter[i] = std::move(b);
            has_starter[i] = true;
        }
    });
    BoundReport r("majorstar", 1, static_cast<double>(X_max));
    for (std::size_t i = 0; i < q_set.size(); ++i) {
        r.add_part(std::move(first[i]));
        if (has_starter[i]) r.add_part(std::move(starter[i]));
        r.add_part(std::move(second[i]));
    }
    return r;
}

// |r2*(X; q)| <= 2.18 j1*(q)/sqrt(X). r2* is constant on [n, n+1), so the
// ratio |r2*| sqrt(X) is largest as X -> n+1.
inline BoundReport scan_majorstar2(u64 X_max, std::span<const u64> q_set, const Limits& limits = default_limits())
{
    BoundReport r("majorstar2", 1, static_cast<double>(X_max));
    for (u64 q : q_set) {
        const auto k = gq_constants(q);
        const double j1 = j1_star(q);
        const auto pre = g_over_m_prefix(q, X_max, limits);
        const double rad = std::max(k.Hq1_upper - k.Hq1, k.Hq1 - k.Hq1_lower);
        BoundReport part("majorstar2 q=" + std::to_string(q), 1, static_cast<double>(X_max), 2.18);
        for (u64 n = 1; n <= X_max; ++n) {
            const double v = std::fabs(k.Hq1 - pre[n]) + rad;
            part.observe(v * std::sqrt(static_cast<double>(n + 1)) / j1, static_cast<double>(n));
        }
        part.finish_upper();
        r.add_part(std::move(part));
    }
    return r;
}

// ---------------------------------------------------------------------------
// S(K, M) = sum_{k >= K, (k, M) = 1} mu(k) phi(k) / k^3.

class AuxKSums {
public:
    // Terms are summed exactly up to `cutoff`; the rest is bounded by
    // sum_{k > C} 1/k^2 < 1/C.
    AuxKSums(u64 M, u64 cutoff = 1000000, const Limits& limits = default_limits()) : M_(M), cutoff_(cutoff)
    {
        detail::require(M >= 1, "M must be >= 1");
        detail::require(cutoff >= 1, "cutoff must be >= 1");
        const auto block = sieve_range(1, cutoff, limits);
        prefix_.assign(cutoff + 1, 0.0);
        NeumaierSum s;
        for (u64 k = 1; k <= cutoff; ++k) {
            const int mu = block.mu_at(k);
            if (mu != 0 && std::gcd(k, M) == 1) {
                const double kk = static_cast<double>(k);
                s.add(mu * static_cast<double>(block.phi_at(k)) / (kk * kk * kk));
            }
            prefix_[k] = s.value();
        }
    }

    u64 modulus() const { return M_; }
    u64 cutoff() const { return cutoff_; }

    Certified operator()(double K) const
    {
        detail::require(K > 0, "aux_k_sum needs K > 0");
        const double first = std::ceil(K);
        if (first > static_cast<double>(cutoff_)) throw InvalidArgument("aux_k_sum: K beyond the summation cutoff");
        const u64 k0 = static_cast<u64>(first);
        return {prefix_[cutoff_] - prefix_[k0 - 1], 1.0 / static_cast<double>(cutoff_)};
    }

private:
    u64 M_;
    u64 cutoff_;
    std::vector<double> prefix_;
};

inline Certified aux_k_sum(double K, u64 M, const Limits& limits = default_limits())
{
    const u64 cutoff = std::max<u64>(1000000, 4 * static_cast<u64>(std::ceil(K)));
    return AuxKSums(M, cutoff, limits)(K);
}

// K |S(K, M)| <= 1 over the K grid step, 2 step, ..., K_max for each M.
inline BoundReport aux_k_scan(double K_max, double step, std::span<const u64> moduli, const Limits& limits = default_limits())
{
    BoundReport r("auxmajorstar2", step, K_max);
    for (u64 M : moduli) {
        const AuxKSums sums(M, std::max<u64>(1000000, 4 * static_cast<u64>(std::ceil(K_max))), limits);
        BoundReport part("auxmajorstar2 M=" + std::to_string(M), step, K_max, 1.0);
        for (double K = step; K <= K_max + 1e-12; K += step) {
            const auto s = sums(K);
            part.observe(K * (std::fabs(s.value) + s.radius), K);
        }
        part.finish_upper();
        r.add_part(std::move(part));
    }
    return r;
}

inline constexpr double aux_k_anchor = -0.252;
inline constexpr double aux_k_band_lo = -0.2523;
inline constexpr double aux_k_band_hi = -0.2519;

// For 1 < K <= 2 and M = 1 the sum is prod_p (1 - 1/p^2 + 1/p^3) - 1.
// Part one checks it against the anchor -0.252, part two against the band
// [-0.2523, -0.2519]; worst_ratio of the band part is the distance outside it.
inline BoundReport aux_k_anchor_check(const Limits& limits = default_limits())
{
    const AuxKSums sums(1, 1000000, limits);
    BoundReport r("auxmajorstar2:anchor", 1, 2);
    BoundReport anchor("auxmajorstar2:anchor >= -0.252", 1, 2, 1.0);
    BoundReport band("auxmajorstar2:band", 1, 2, 0.0);
    for (double K = 1.125; K <= 2 + 1e-12; K += 0.125) {
        const auto s = sums(K);
        anchor.observe((s.value - s.radius) / aux_k_anchor, K);
        band.observe(std::max(aux_k_band_lo - (s.value - s.radius), (s.value + s.radius) - aux_k_band_hi), K);
    }
    const auto s = sums(1.5);
    anchor.details["value"] = s.value;
    band.details = {{"value", s.value}, {"band", {aux_k_band_lo, aux_k_band_hi}}};
    anchor.finish_upper();
    band.finish_upper();
    r.add_part(std::move(anchor));
    r.add_part(std::move(band));
    return r;
}

// ---------------------------------------------------------------------------
// Convolution identities, checked exactly after multiplying both sides by d.

namespace detail {

inline std::vector<u64> divisors_from(const std::vector<std::pair<u64, int>>& f)
{
    std::vector<u64> out{1};
    for (auto [p, e] : f) {
        const std::size_t n = out.size();
        u64 pk = 1;
        for (int i = 1; i <= e; ++i) {
            pk *= p;
            for (std::size_t j = 0; j < n; ++j) out.push_back(out[j] * pk);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<std::pair<u64, int>> factor_with_spf(u64 n, const MultiplicativeBlock& b)
{
    std::vector<std::pair<u64, int>> f;
    while (n > 1) {
        const u64 p = b.spf_at(n);
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        f.emplace_back(p, e);
    }
    return f;
}

} // namespace detail

// mu^2(d) phi(d)/d = sum_{lm = d} mu^2(l) g0(m) with g0(p^k) = (-1)^k / p,
// and, for each q, 1_{(d,q)=1} mu^2(d) phi(d)/d = sum_{k^2 l r | d, r | q,
// (kl, q) = (k, l) = 1} mu(rkl) phi(k)/(kl), for all d <= N.
inline BoundReport convolution_identity_checks(u64 N, std::span<const u64> q_set, const Limits& limits = default_limits())
{
    if (N > 100000) throw BudgetExceeded("convolution checks are limited to N <= 100000");
    const auto b = sieve_range(1, std::max<u64>(N, 1), limits);
    BoundReport r("convol", 1, static_cast<double>(N));

    BoundReport c0("convol0", 1, static_cast<double>(N), 0.0);
    u64 mismatches = 0;
    for (u64 d = 1; d <= N; ++d) {
        const auto f = detail::factor_with_spf(d, b);
        const i64 lhs = b.mu_at(d) != 0 ? static_cast<i64>(b.phi_at(d)) : 0;
        i64 rhs = 0;
        for (u64 m : detail::divisors_from(f)) {
            const u64 l = d / m;
            if (b.mu_at(l) == 0) continue;
            u64 rad = 1;
            int omega = 0;
            for (auto [p, e] : detail::factor_with_spf(m, b)) {
                rad *= p;
                omega += e;
            }
            const i64 t = static_cast<i64>(d / rad);
            rhs += omega % 2 == 0 ? t : -t;
        }
        const double diff = std::fabs(static_cast<double>(lhs - rhs));
        c0.observe(diff, static_cast<double>(d));
        if (lhs != rhs) ++mismatches;
    }
    c0.finish_upper();
    c0.details["mismatches"] = mismatches;
    r.add_part(std::move(c0));

    for (u64 q : q_set) {
        detail::require_positive_q(q);
        BoundReport c("convol q=" + std::to_string(q), 1, static_cast<double>(N), 0.0);
        u64 bad = 0;
        for (u64 d = 1; d <= N; ++d) {
            const i64 lhs = (std::gcd(d, q) == 1 && b.mu_at(d) != 0) ? static_cast<i64>(b.phi_at(d)) : 0;
            i64 rhs = 0;
            const auto divs = detail::divisors_from(detail::factor_with_spf(d, b));
            for (u64 k : divs) {
                if (k * k > d) break;
                if (d % (k * k) != 0 || std::gcd(k, q) != 1) continue;
                const u64 rest = d / (k * k);
                for (u64 l : divs) {
                    if (l > rest) break;
                    if (rest % l != 0 || std::gcd(l, q) != 1 || std::gcd(k, l) != 1) continue;
                    const u64 rest2 = rest / l;
                    for (u64 rr : divs) {
                        if (rr > rest2) break;
                        if (rest2 % rr != 0 || q % rr != 0) continue;
                        const u64 rkl = rr * k * l;
                        const int mu = b.mu_at(rkl);
                        if (mu == 0) continue;
                        rhs += mu * static_cast<i64>(b.phi_at(k)) * static_cast<i64>(d / (k * l));
                    }
                }
            }
            c.observe(std::fabs(static_cast<double>(lhs - rhs)), static_cast<double>(d));
            if (lhs != rhs) ++bad;
        }
        c.finish_upper();
        c.details["mismatches"] = bad;
        r.add_part(std::move(c));
    }
    return r;
}

// ---------------------------------------------------------------------------
// The smoothing identity with eta = e^gamma and its error bound.

struct KeybResult {
    double D = 0;
    double lhs = 0;              // G*_q(D)
    double finite_form = 0;      // sum_{m <= eta D} g(m)/m (log(D/m) + gamma + R(D/m))
    double main = 0;             // H_q(1)(log D + c_q)
    double integral = 0;         // int_{eta D}^oo r2*(t) dt/t, central value
    double integral_slack = 0;
    double radius = 0;           // (1/D) int_1^{e^gamma} r1*(uD) du/u
};

inline KeybResult keyb_evaluate(const GqConstants& k, u64 D, u64 T, const Limits& limits = default_limits())
{
    const double eta = std::exp(euler_gamma);
    const double etaD = eta * static_cast<double>(D);
    detail::require(static_cast<double>(T) > etaD, "keyb: cutoff T must exceed e^gamma D");
    const auto g = g_table(k.q, T, limits);
    KeybResult out;
    out.D = static_cast<double>(D);
    out.lhs = gstar_prefix(k.q, D, limits)[D];

    // Harmonic numbers H(t) = sum_{n <= t} 1/n for t <= D.
    std::vector<double> harmonic(D + 1, 0.0);
    {
        NeumaierSum h;
        for (u64 n = 1; n <= D; ++n) {
            h.add(1.0 / static_cast<double>(n));
            harmonic[n] = h.value();
        }
    }
    NeumaierSum fin;
    const u64 m_end = floor_to_u64(etaD);
    for (u64 m = 1; m <= m_end; ++m) {
        if (g[m] == 0) continue;
        const double t = static_cast<double>(D) / static_cast<double>(m);
        const double R = harmonic[floor_to_u64(t)] - std::log(t) - euler_gamma;
        fin.add(g[m] / static_cast<double>(m) * (std::log(t) + euler_gamma + R));
    }
    out.finite_form = fin.value();
    out.main = k.Hq1 * (std::log(static_cast<double>(D)) + k.cq.value);

    // r2*(t) = H_q(1) - S(floor t) is piecewise constant.
    NeumaierSum S;
    for (u64 m = 1; m <= m_end; ++m) S.add(g[m] / static_cast<double>(m));
    NeumaierSum integral;
    double a = etaD;
    for (u64 n = m_end; n < T; ++n) {
        const double b = static_cast<double>(n + 1);
        integral.add((k.Hq1 - S.value()) * std::log(b / a));
        a = b;
        S.add(g[n + 1] / static_cast<double>(n + 1));
    }
    out.integral = integral.value();
    const double hq_rad = std::max(k.Hq1_upper - k.Hq1, k.Hq1 - k.Hq1_lower);
    out.integral_slack = hq_rad * std::log(static_cast<double>(T) / etaD) +
                         2 * 2.18 * j1_star(k.q) / std::sqrt(static_cast<double>(T)) + k.Hq1_upper * k.cq.slack;

    // r1*(uD) is a step function of u; integrate it exactly on [1, e^gamma].
    NeumaierSum r1;
    for (u64 m = 1; m <= D; ++m) r1.add(std::fabs(g[m]));
    NeumaierSum rad;
    double lo = static_cast<double>(D);
    for (u64 n = D; static_cast<double>(n) < etaD; ++n) {
        const double hi = std::min(static_cast<double>(n + 1), etaD);
        rad.add(r1.value() * std::log(hi / lo));
        lo = hi;
        r1.add(std::fabs(g[n + 1]));
    }
    out.radius = rad.value() / static_cast<double>(D);
    return out;
}

inline BoundReport keyb_check(std::span<const u64> D_list, std::span<const u64> q_set, const Limits& limits = default_limits())
{
    BoundReport r("keyb", D_list.empty() ? 0.0 : static_cast<double>(D_list.front()),
                  D_list.empty() ? 0.0 : static_cast<double>(D_list.back()));
    for (u64 q : q_set) {
        const auto k = gq_constants(q);
        BoundReport ident("keyb:identity q=" + std::to_string(q), r.range_lo, r.range_hi, 1e-9);
        BoundReport bound("keyb:bound q=" + std::to_string(q), r.range_lo, r.range_hi, 1.0);
        for (u64 D : D_list) {
            const u64 T = std::max<u64>(1000000, 1000 * D);
            const auto e = keyb_evaluate(k, D, T, limits);
            ident.observe(std::fabs(e.lhs - e.finite_form), e.D);
            const double dev = std::fabs(e.lhs - e.main - e.integral);
            bound.observe((dev - e.integral_slack) / e.radius, e.D);
            nlohmann::json j;
            j["D"] = D;
            j["G*"] = e.lhs;
            j["main"] = e.main;
            j["integral"] = e.integral;
            j["radius"] = e.radius;
            bound.details["rows"].push_back(j);
        }
        ident.finish_upper();
        bound.finish_upper();
        r.add_part(std::move(ident));
        r.add_part(std::move(bound));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Asymptotic of G*_q checked against exact values.

inline BoundReport getgstarq_check(std::span<const u64> q_set, std::span<const u64> X_list,
                                   const Limits& limits = default_limits())
{
    const u64 X_max = X_list.empty() ? 0 : *std::max_element(X_list.begin(), X_list.end());
    BoundReport r("getgstarq", 0, static_cast<double>(X_max));
    for (u64 q : q_set) {
        const auto k = gq_constants(q);
        const auto G = gstar_prefix(q, X_max, limits);
        BoundReport asym("getgstarq:asymptotic q=" + std::to_string(q), 0, static_cast<double>(X_max), 1.0);
        for (u64 X : X_list) {
            const auto a = gstar_asymptotic(k, static_cast<double>(X));
            asym.observe((std::fabs(G[X] - a.main) + a.main_slack) / a.error_radius, static_cast<double>(X));
        }
        asym.finish_upper();
        r.add_part(std::move(asym));

        BoundReport diff("getgstarq:difference q=" + std::to_string(q), 0, static_cast<double>(X_max), 1.0);
        const double hq_rad = std::max(k.Hq1_upper - k.Hq1, k.Hq1 - k.Hq1_lower);
        for (u64 Y : X_list)
            for (u64 X : X_list) {
                if (X < Y) continue;
                const double lg = std::log(static_cast<double>(X) / static_cast<double>(Y));
                const double dev = std::fabs(G[X] - G[Y] - k.Hq1 * lg) + hq_rad * lg;
                diff.observe(dev / gstar_difference_bound(q, static_cast<double>(X), static_cast<double>(Y)),
                             static_cast<double>(Y));
            }
        diff.finish_upper();
        r.add_part(std::move(diff));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Squarefree counts and the initial bound.

struct MoebiusSquareRow {
    u64 X0;
    double c;
};

inline const std::vector<MoebiusSquareRow>& moebius_square_rows()
{
    static const std::vector<MoebiusSquareRow> rows{
        {0, 1.0}, {8, 0.5}, {1664, 0.1333}, {82005, 0.036438}, {438653, 0.02767}};
    return rows;
}

// |Q(X) - 6X/pi^2| <= c sqrt(X) for X0 <= X <= X_max, X real. On [n, n+1)
// the ratio (Q(n) - aX)/sqrt(X) decreases, so its extremes are at X = n
// and X -> n+1.
inline BoundReport moebius_square_table_check(std::span<const MoebiusSquareRow> rows, u64 X_max,
                                              const Limits& limits = default_limits())
{
    if (X_max > limits.scan_limit) throw BudgetExceeded("moebius-square scan beyond scan budget");
    const double a = six_over_pi_sq;
    BoundReport r("moebius-square", 0, static_cast<double>(X_max));
    std::vector<BoundReport> parts;
    std::vector<double> integer_worst(rows.size(), 0.0), integer_arg(rows.size(), 0.0);
    for (const auto& row : rows)
        parts.emplace_back("moebius-square X0=" + std::to_string(row.X0), static_cast<double>(row.X0),
                           static_cast<double>(X_max), row.c);
    u64 Q = 0;
    auto visit = [&](u64 n, u64 Qn) {
        // Interval [n, n+1) intersected with [X0, X_max].
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (n + 1 <= rows[i].X0) continue;
            const double lo = static_cast<double>(std::max(n, rows[i].X0));
            const double q = static_cast<double>(Qn);
            if (lo > 0) {
                const double v = std::fabs(q - a * lo) / std::sqrt(lo) / rows[i].c;
                parts[i].observe(v, lo);
                if (lo == static_cast<double>(n) && v > integer_worst[i]) {
                    integer_worst[i] = v;
                    integer_arg[i] = lo;
                }
            }
            if (n < X_max) {
                const double hi = static_cast<double>(n + 1);
                parts[i].observe(std::fabs(q - a * hi) / std::sqrt(hi) / rows[i].c, hi);
            }
        }
    };
    visit(0, 0);
    for_each_mobius_segment(1, X_max, limits, [&](u64 lo, std::span<const std::int8_t> mu) {
        for (std::size_t i = 0; i < mu.size(); ++i) {
            if (mu[i] != 0) ++Q;
            visit(lo + i, Q);
        }
    });
    for (std::size_t i = 0; i < rows.size(); ++i) {
        parts[i].bound = 1.0;
        parts[i].finish_upper();
        parts[i].details["c"] = rows[i].c;
        parts[i].details["integer_points_worst_ratio"] = integer_worst[i];
        parts[i].details["integer_points_worst_arg"] = integer_arg[i];
        r.add_part(std::move(parts[i]));
    }
    return r;
}

// sum_{d <= X} mu^2(d) phi(d)/d <= AX + (1 - A) sqrt(X) for X <= X_max, with
// max_X (sum - AX)/sqrt(X) = 1 - A attained at X = 1. The right side
// increases with A for X >= 1, so the certified lower bound of A is used.
inline BoundReport init_bound_check(u64 X_max, const Limits& limits = default_limits())
{
    if (X_max > limits.scan_limit) throw BudgetExceeded("init scan beyond scan budget");
    const auto Acert = constant_A();
    const double A = *Acert.lower();
    BoundReport r("init", 1, static_cast<double>(X_max), 1 - A);
    NeumaierSum s;
    for_each_factored_segment(1, X_max, limits, [&](const FactoredBlock& b) {
        for (u64 d = b.lo; d <= b.hi; ++d) {
            if (b.mu_at(d) != 0) {
                double v = 1;
                for (u64 p : b.primes_of(d)) v *= 1.0 - 1.0 / static_cast<double>(p);
                s.add(v);
            }
            const double x = static_cast<double>(d);
            r.observe((s.value() - A * x) / std::sqrt(x), x);
        }
    });
    r.pass = r.worst_ratio <= (1 - A) + rounding_slack && r.worst_arg == 1;
    r.details["A_lower"] = A;
    r.details["one_minus_A"] = 1 - A;
    return r;
}

} // namespace dmsum
