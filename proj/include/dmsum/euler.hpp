#pragma once

// Certified Euler products over primes and prime-indexed tail sums.
//
// Tails beyond the prime cutoff P are bounded with the explicit inequality
//   sum_{p >= P} F(p) log p <= (1+eps) int_P^oo F + eps P F(P) + P F(P) / (c log^2 P)
// with eps = 1/914, valid for C^1, non-negative, non-increasing F with
// t F(t) -> 0. c = 5 needs P >= 3 600 000 ("strong"); the "weak" form
// replaces 1/c by 4 and holds for any P >= 2.
//
// A product prod_p (1 + f(p)) is bounded through log(1 + f) <= h with a
// real-variable majorant h, so the tail is fed F(t) = h(t) / log t.

#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "error.hpp"
#include "mertens.hpp"
#include "numeric.hpp"
#include "quadrature.hpp"
#include "report.hpp"
#include "sieve.hpp"

namespace dmsum {

inline constexpr double spe_epsilon = 1.0 / 914.0;
inline constexpr double spe_strong_threshold = 3600000.0;
inline constexpr u64 default_prime_cutoff = 10000000;

enum class TailMode { strong, weak };

inline TailMode tail_mode_for(double P) { return P >= spe_strong_threshold ? TailMode::strong : TailMode::weak; }

inline const char* to_string(TailMode m) { return m == TailMode::strong ? "strong" : "weak"; }

// Shared, grow-only cache of the primes up to some bound.
inline std::shared_ptr<const std::vector<u64>> shared_primes(u64 n)
{
    static std::mutex mutex;
    static std::shared_ptr<const std::vector<u64>> cache = std::make_shared<const std::vector<u64>>();
    static u64 cached_bound = 0;
    std::lock_guard lock(mutex);
    if (n > cached_bound) {
        cache = std::make_shared<const std::vector<u64>>(primes_upto(n));
        cached_bound = n;
    }
    return cache;
}

// A real function F on [P, oo) together with the information needed to
// bound its integral: either a closed form (or upper bound) for
// int_P^oo F, or an exponent sigma > 1 such that t^sigma F(t) is
// non-increasing beyond the quadrature window [P, window * P].
struct TailIntegrand {
    std::function<double(double)> f;
    std::function<double(double)> closed_form;
    double decay_exponent = 0;
    double window = 1e6;
};

struct TailBoundParts {
    double integral = 0;
    double eps_term = 0;
    double log_term = 0;
    double total = 0;
    double quadrature_error = 0;
    double remainder = 0;
};

namespace detail {

inline void check_non_increasing(const std::function<double(double)>& f, double a, double b, const char* what)
{
    constexpr int samples = 64;
    const double ratio = std::pow(b / a, 1.0 / samples);
    double t = a;
    double prev = f(a);
    if (!(prev >= 0)) throw InvalidArgument(std::string(what) + ": integrand is negative or NaN");
    for (int i = 1; i <= samples; ++i) {
        t *= ratio;
        const double v = f(t);
        if (!(v >= 0)) throw InvalidArgument(std::string(what) + ": integrand is negative or NaN");
        if (v > prev * (1 + 1e-12)) throw InvalidArgument(std::string(what) + ": integrand is not non-increasing");
        prev = v;
    }
}

} // namespace detail

// int_P^oo F, with quadrature over the window plus the power-law remainder
// f(R) R / (sigma - 1) when no closed form is supplied.
inline TailBoundParts tail_integral(const TailIntegrand& F, double P)
{
    TailBoundParts parts;
    detail::require(static_cast<bool>(F.f), "tail integrand missing");
    const double fP = F.f(P);
    detail::check_non_increasing(F.f, P, P * std::max(F.window, 2.0), "tail integrand");
    if (fP == 0) return parts;
    if (F.closed_form) {
        parts.integral = F.closed_form(P);
        return parts;
    }
    if (!(F.decay_exponent > 1))
        throw InvalidArgument("tail integral does not converge: no closed form and decay exponent <= 1");
    const double R = P * F.window;
    const double sigma = F.decay_exponent;
    detail::check_non_increasing([&](double t) { return std::pow(t, sigma) * F.f(t); }, R, R * 1e3,
                                 "power-law remainder");
    const auto q = integrate_log_variable(F.f, P, R, 1e-10 * P * fP);
    parts.quadrature_error = q.error_estimate;
    parts.remainder = F.f(R) * R / (sigma - 1);
    parts.integral = q.value + q.error_estimate + parts.remainder;
    return parts;
}

inline TailBoundParts prime_tail_bound_parts(const TailIntegrand& F, double P, TailMode mode)
{
    if (mode == TailMode::strong)
        detail::require(P >= spe_strong_threshold, "strong tail mode needs P >= 3600000");
    else
        detail::require(P >= 2, "weak tail mode needs P >= 2");
    TailBoundParts parts = tail_integral(F, P);
    const double fP = F.f(P);
    const double lg = std::log(P);
    parts.integral *= 1 + spe_epsilon;
    parts.eps_term = spe_epsilon * P * fP;
    parts.log_term = mode == TailMode::strong ? P * fP / (5 * lg * lg) : 4 * P * fP / (lg * lg);
    parts.total = parts.integral + parts.eps_term + parts.log_term;
    return parts;
}

// Upper bound on sum_{p >= P} F(p) log p.
inline double prime_tail_bound(const TailIntegrand& F, double P, TailMode mode)
{
    return prime_tail_bound_parts(F, P, mode).total;
}

enum class Direction { upper, two_sided };

// A truncated product `value` with multiplicative slack: the infinite
// product lies below value * tail_factor, and (two-sided) above
// value / tail_factor.
struct CertifiedValue {
    double value = 1;
    double tail_factor = 1;
    Direction direction = Direction::upper;
    u64 cutoff = 0;

    double upper() const { return value * tail_factor; }
    std::optional<double> lower() const
    {
        if (direction == Direction::two_sided) return value / tail_factor;
        return std::nullopt;
    }
};

struct EulerProductSpec {
    std::string name;
    std::function<double(double)> local_term;     // f(p)
    std::function<double(double)> tail_majorant;  // h(t) >= log(1 + f(t)) on [P, oo); defaults to f
    std::function<double(double)> tail_closed_form;  // optional bound on int_P^oo h(t)/log t dt
    double decay_exponent = 0;
    double window = 1e6;
    u64 cutoff = default_prime_cutoff;
    std::optional<TailMode> mode;
    Direction direction = Direction::upper;
};

inline CertifiedValue euler_product(const EulerProductSpec& spec, std::span<const u64> primes)
{
    detail::require(static_cast<bool>(spec.local_term), "Euler product without a local term");
    detail::require(spec.cutoff >= 2, "Euler product cutoff must be >= 2");
    detail::require(!primes.empty(), "empty prime list");
    NeumaierSum log_sum;
    for (u64 p : primes) {
        if (p > spec.cutoff) break;
        const double f = spec.local_term(static_cast<double>(p));
        if (!(1 + f > 0)) throw InvalidArgument(spec.name + ": local factor 1+f(p) is not positive at p=" + std::to_string(p));
        log_sum.add(std::log1p(f));
    }
    CertifiedValue out;
    out.value = std::exp(log_sum.value());
    out.direction = spec.direction;
    out.cutoff = spec.cutoff;
    const auto h = spec.tail_majorant ? spec.tail_majorant : spec.local_term;
    TailIntegrand F;
    F.f = [h](double t) { return h(t) / std::log(t); };
    F.closed_form = spec.tail_closed_form;
    F.decay_exponent = spec.decay_exponent;
    F.window = spec.window;
    // Lemma-style bounds are for p >= P; P = cutoff + 1 excludes the
    // primes already in the product.
    const double P = static_cast<double>(spec.cutoff + 1);
    const TailMode mode = spec.mode ? *spec.mode : tail_mode_for(P);
    out.tail_factor = std::exp(prime_tail_bound(F, P, mode));
    return out;
}

inline CertifiedValue euler_product(const EulerProductSpec& spec)
{
    const auto primes = shared_primes(spec.cutoff);
    return euler_product(spec, std::span<const u64>(*primes));
}

// A = prod_p (1 - 2/p^2 + 1/p^3), two-sided. The local terms are negative,
// so the tail is bracketed with |log(1+f)| <= 2c/p^2, c = 1/(1 - 2/P^2).
inline CertifiedValue constant_A(u64 cutoff = default_prime_cutoff)
{
    EulerProductSpec spec;
    spec.name = "A";
    spec.cutoff = cutoff;
    spec.direction = Direction::two_sided;
    spec.local_term = [](double p) { return -2.0 / (p * p) + 1.0 / (p * p * p); };
    const double P = static_cast<double>(cutoff + 1);
    const double c = 1.0 / (1.0 - 2.0 / (P * P));
    spec.tail_majorant = [c](double t) { return 2.0 * c / (t * t); };
    spec.tail_closed_form = [c](double P0) { return 2.0 * c / (P0 * std::log(P0)); };
    return euler_product(spec);
}

// ---------------------------------------------------------------------------
// The three auxiliary multiplicative functions G in {g0^2, g0 g1, g1^2}.

enum class AuxFunction { g0_squared, g0_g1, g1_squared };

struct AuxConstants {
    const char* name;
    double H1_bound;
    double Hbar_bound;
    double linear_coeff;
    double power23_coeff;
    double max_ratio;
    u64 argmax_D;
    double H1_decay;    // decay exponents for the tail integrands
    double Hbar_decay;
};

inline const AuxConstants& aux_constants(AuxFunction g)
{
    static const AuxConstants table[] = {
        {"g0^2", 2.0004, 72.9, 2.0004, 106, 2.07, 42, 1.5, 7.0 / 6.0},
        {"g0*g1", 1.34, 23.4, 1.34, 33.8, 1.60, 7, 1.5, 7.0 / 6.0},
        {"g1^2", 1.06, 9.20, 1.06, 13.3, 1.57, 3, 1.9, 4.0 / 3.0},
    };
    return table[static_cast<int>(g)];
}

inline constexpr AuxFunction all_aux_functions[] = {AuxFunction::g0_squared, AuxFunction::g0_g1,
                                                    AuxFunction::g1_squared};

// G(p) - 1 without cancellation for large p.
inline double aux_G_minus_one_at_prime(AuxFunction g, double p)
{
    const double a = p == 2.0 ? g0_at_prime(2) - 1 : 1 / (std::sqrt(p) - 1);
    const double b = p == 2.0 ? g1_at_prime(2) - 1 : 1 / (std::pow(p, EnvelopeParams::xi) - 1);
    switch (g) {
    case AuxFunction::g0_squared: return a * (2 + a);
    case AuxFunction::g0_g1: return a + b + a * b;
    case AuxFunction::g1_squared: return b * (2 + b);
    }
    return 0;
}

inline double aux_G_at_prime(AuxFunction g, double p) { return 1 + aux_G_minus_one_at_prime(g, p); }

// a_p = (p-1)G(p) - p = (p-1)(G(p)-1) - 1.
inline double aux_a_at_prime(AuxFunction g, double p) { return (p - 1) * aux_G_minus_one_at_prime(g, p) - 1; }

inline double aux_G(AuxFunction g, u64 d)
{
    double v = 1;
    for (u64 p : squarefree_primes(d)) v *= aux_G_at_prime(g, static_cast<double>(p));
    return v;
}

// H(1) = prod_p (1 + ((p-1)G(p) - p)/p^2 - (p-1)G(p)/p^3), upper bound.
inline CertifiedValue aux_H1(AuxFunction g, u64 cutoff = default_prime_cutoff)
{
    EulerProductSpec spec;
    spec.name = std::string("H(1) ") + aux_constants(g).name;
    spec.cutoff = cutoff;
    spec.local_term = [g](double p) {
        return aux_a_at_prime(g, p) / (p * p) - (p - 1) * aux_G_at_prime(g, p) / (p * p * p);
    };
    spec.tail_majorant = [g](double t) { return aux_a_at_prime(g, t) / (t * t); };
    spec.decay_exponent = aux_constants(g).H1_decay;
    return euler_product(spec);
}

// The slow t^(-7/6) decay makes the power-law remainder coarse, so the
// quadrature runs further out than for the other products.
inline constexpr double hbar_window = 1e12;

// Hbar(2/3) = prod_p (1 + |a_p|/p^(5/3) + |b_p|/p^(7/3)), a_p = (p-1)G(p) - p,
// b_p = (p-1)G(p); the absolute-value majorant of H at s = 2/3. With
// signed_a the sign of a_p is kept, which differs only at p = 2 for g0^2
// where a_2 = -1/2.
inline CertifiedValue aux_Hbar(AuxFunction g, u64 cutoff = default_prime_cutoff, bool signed_a = false)
{
    EulerProductSpec spec;
    spec.name = std::string("Hbar(2/3) ") + aux_constants(g).name;
    spec.cutoff = cutoff;
    auto term = [g, signed_a](double p) {
        const double a = aux_a_at_prime(g, p);
        return (signed_a ? a : std::fabs(a)) / std::pow(p, 5.0 / 3.0) +
               (p - 1) * aux_G_at_prime(g, p) / std::pow(p, 7.0 / 3.0);
    };
    spec.local_term = term;
    spec.tail_majorant = [g](double p) {
        return std::fabs(aux_a_at_prime(g, p)) / std::pow(p, 5.0 / 3.0) +
               (p - 1) * aux_G_at_prime(g, p) / std::pow(p, 7.0 / 3.0);
    };
    spec.decay_exponent = aux_constants(g).Hbar_decay;
    spec.window = hbar_window;
    return euler_product(spec);
}

// Calls fn(D, S(D)) for D = 1..D_max with S(D) = sum_{d<=D} mu^2(d) phi(d)/d G(d).
template <class Fn>
void for_each_aux_prefix(AuxFunction g, u64 D_max, const Limits& limits, Fn&& fn)
{
    if (D_max > limits.scan_limit) throw BudgetExceeded("aux scan beyond scan budget");
    // Local factor (p-1)/p G(p) for small primes, cached.
    std::vector<double> small(1 << 16, 0.0);
    for (u64 p = 2; p < small.size(); ++p) small[p] = (p - 1.0) / p * aux_G_at_prime(g, static_cast<double>(p));
    NeumaierSum s;
    for_each_factored_segment(1, D_max, limits, [&](const FactoredBlock& b) {
        for (u64 d = b.lo; d <= b.hi; ++d) {
            if (b.mu_at(d) != 0) {
                double w = 1;
                for (u64 p : b.primes_of(d))
                    w *= p < small.size() ? small[p] : (p - 1.0) / p * aux_G_at_prime(g, static_cast<double>(p));
                s.add(w);
            }
            fn(d, s.value());
        }
    });
}

inline double aux_sum(AuxFunction g, u64 D, const Limits& limits = default_limits())
{
    double out = 0;
    for_each_aux_prefix(g, D, limits, [&](u64, double s) { out = s; });
    return out;
}

// max_D S(D)/D over integers D <= D_max (S is a step function, so S(x)/x
// peaks at integers); passes iff the max is within the constant and is
// attained at the expected D.
inline BoundReport aux_ratio_scan(AuxFunction g, u64 D_max, const Limits& limits = default_limits())
{
    const auto& c = aux_constants(g);
    BoundReport r(std::string("aux-ratio ") + c.name, 1, static_cast<double>(D_max), c.max_ratio);
    for_each_aux_prefix(g, D_max, limits, [&](u64 D, double s) { r.observe(s / static_cast<double>(D), static_cast<double>(D)); });
    r.finish_upper();
    r.pass = r.pass && static_cast<u64>(r.worst_arg) == c.argmax_D;
    r.details["expected_argmax"] = c.argmax_D;
    return r;
}

// S(D) <= linear D + power23 D^(2/3) for all D <= D_max; worst_ratio is
// max S(D) / (linear D + power23 D^(2/3)), bound 1.
inline BoundReport aux_asymptotic_check(AuxFunction g, u64 D_max, const Limits& limits = default_limits())
{
    const auto& c = aux_constants(g);
    BoundReport r(std::string("aux-asymptotic ") + c.name, 1, static_cast<double>(D_max), 1.0);
    for_each_aux_prefix(g, D_max, limits, [&](u64 D, double s) {
        const double x = static_cast<double>(D);
        r.observe(s / (c.linear_coeff * x + c.power23_coeff * std::cbrt(x * x)), x);
    });
    r.finish_upper();
    r.details["linear_coeff"] = c.linear_coeff;
    r.details["power23_coeff"] = c.power23_coeff;
    return r;
}

// ---------------------------------------------------------------------------
// Constants of the G*_q asymptotic: H_q(1) and c_q.

// value <= true value <= value + slack.
struct CertifiedSum {
    double value = 0;
    double slack = 0;
    double upper() const { return value + slack; }
};

struct GqConstants {
    u64 q = 1;
    CertifiedValue A;
    double Hq1 = 0;           // A prod_{p|q} p^2/(p^2+p-1), from A's midpoint
    double Hq1_lower = 0;
    double Hq1_upper = 0;
    CertifiedSum cq;          // gamma + sum_{p|q} ... + sum_p ...
    double cq_pre_rewrite = 0;  // gamma + sum_{p|q} log p/(p-1) + sum_{p not | q} ...
};

// sum_p (3p-2) log p / ((p-1)(p^2+p-1)), certified with a one-sided tail.
inline CertifiedSum cq_prime_sum(u64 cutoff = default_prime_cutoff)
{
    const auto primes = shared_primes(cutoff);
    NeumaierSum s;
    for (u64 pp : *primes) {
        if (pp > cutoff) break;
        const double p = static_cast<double>(pp);
        s.add((3 * p - 2) * std::log(p) / ((p - 1) * (p * p + p - 1)));
    }
    TailIntegrand F;
    F.f = [](double t) { return (3 * t - 2) / ((t - 1) * (t * t + t - 1)); };
    // (3t-2)/((t-1)(t^2+t-1)) <= 3/(t-1)^2 for t >= 1.
    F.closed_form = [](double P) { return 3.0 / (P - 1); };
    const double P = static_cast<double>(cutoff + 1);
    return {s.value(), prime_tail_bound(F, P, tail_mode_for(P))};
}

inline GqConstants gq_constants(u64 q, u64 cutoff = default_prime_cutoff)
{
    const auto ps = squarefree_primes(q);
    GqConstants out;
    out.q = q;
    out.A = constant_A(cutoff);
    double factor = 1;
    for (u64 pp : ps) {
        const double p = static_cast<double>(pp);
        factor *= p * p / (p * p + p - 1);
    }
    out.Hq1 = out.A.value * factor;
    out.Hq1_lower = *out.A.lower() * factor;
    out.Hq1_upper = out.A.upper() * factor;

    const CertifiedSum all = cq_prime_sum(cutoff);
    double local = euler_gamma;
    double pre = euler_gamma;
    for (u64 pp : ps) {
        const double p = static_cast<double>(pp);
        local += (p - 1) * std::log(p) / (p * p + p - 1);
        pre += std::log(p) / (p - 1);
    }
    out.cq = {local + all.value, all.slack};

    // Independent evaluation of the sum over p not dividing q.
    const auto primes = shared_primes(cutoff);
    NeumaierSum coprime_part;
    for (u64 pp : *primes) {
        if (pp > cutoff) break;
        if (q % pp == 0) continue;
        const double p = static_cast<double>(pp);
        coprime_part.add((3 * p - 2) * std::log(p) / ((p - 1) * (p * p + p - 1)));
    }
    out.cq_pre_rewrite = pre + coprime_part.value();
    return out;
}

inline nlohmann::json to_json(const CertifiedValue& v)
{
    nlohmann::json j;
    j["value"] = v.value;
    j["tail_factor"] = v.tail_factor;
    j["upper"] = v.upper();
    if (auto lo = v.lower()) j["lower"] = *lo;
    j["direction"] = v.direction == Direction::upper ? "upper" : "two-sided";
    j["cutoff"] = v.cutoff;
    return j;
}

// Every named constant with its certified slack and cutoff.
inline nlohmann::json constants_registry(u64 cutoff = default_prime_cutoff)
{
    nlohmann::json j;
    j["prime_cutoff"] = cutoff;
    const auto A = constant_A(cutoff);
    j["A"] = to_json(A);
    j["A"]["target_value"] = 0.428257;
    j["one_minus_A_upper"] = 1 - *A.lower();
    for (AuxFunction g : all_aux_functions) {
        const auto& c = aux_constants(g);
        auto h1 = to_json(aux_H1(g, cutoff));
        h1["target_bound"] = c.H1_bound;
        auto hb = to_json(aux_Hbar(g, cutoff));
        hb["target_bound"] = c.Hbar_bound;
        hb["signed_a_upper"] = aux_Hbar(g, cutoff, true).upper();
        j["H1"][c.name] = h1;
        j["Hbar_2_3"][c.name] = hb;
    }
    for (u64 q : {1ull, 2ull, 3ull, 6ull, 30ull, 210ull}) {
        const auto k = gq_constants(q, cutoff);
        nlohmann::json e;
        e["H_q(1)"] = k.Hq1;
        e["H_q(1)_lower"] = k.Hq1_lower;
        e["H_q(1)_upper"] = k.Hq1_upper;
        e["c_q"] = k.cq.value;
        e["c_q_slack"] = k.cq.slack;
        e["c_q_pre_rewrite"] = k.cq_pre_rewrite;
        j["c_q"][std::to_string(q)] = e;
    }
    return j;
}

} // namespace dmsum
