#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "dmsum/assembly.hpp"
#include "dmsum/config.hpp"
#include "dmsum/error.hpp"
#include "dmsum/euler.hpp"
#include "dmsum/gstar.hpp"
#include "dmsum/mertens.hpp"
#include "dmsum/report.hpp"
#include "dmsum/sigma.hpp"

namespace dmsum {

// ---------------------------------------------------------------------------
// Checks that only the registry needs.

inline constexpr double direct_max_late = 0.445;
inline constexpr double direct_max_all = 19.0 / 30.0;
inline constexpr double direct_witness = 0.44455;
inline constexpr double direct_min_late = 0.437;

// The direct-computation lemma on [2, X_max]: 0 <= Sigma, max <= 0.445 on
// [422, X_max], max <= 19/30 on [2, X_max], some value > 0.44455 in
// [1300, 1350], min >= 0.437 on [1000, X_max].
inline BoundReport direct_lemma_check(u64 X_max, const Limits& limits = default_limits())
{
    detail::require(X_max >= 1350, "direct lemma check needs X_max >= 1350");
    SigmaScanOptions opt;
    opt.windows = {{2, X_max}, {422, X_max}, {1300, 1350}, {1000, X_max}};
    const auto t = sigma_scan(X_max, opt, limits);
    const double hi = static_cast<double>(X_max);
    BoundReport nonneg("direct:nonnegative", 1, hi, 0.0);
    nonneg.observe(-t.overall.min, static_cast<double>(t.overall.argmin));
    BoundReport all("direct:max [2,X]", 2, hi, direct_max_all);
    all.observe(t.windows[0].max, static_cast<double>(t.windows[0].argmax));
    BoundReport late("direct:max [422,X]", 422, hi, direct_max_late);
    late.observe(t.windows[1].max, static_cast<double>(t.windows[1].argmax));
    BoundReport witness("direct:value > 0.44455 in [1300,1350]", 1300, 1350, 1.0);
    witness.observe(direct_witness / t.windows[2].max, static_cast<double>(t.windows[2].argmax));
    BoundReport floor("direct:min [1000,X]", 1000, hi, 1.0);
    floor.observe(direct_min_late / t.windows[3].min, static_cast<double>(t.windows[3].argmin));
    for (auto* r : {&nonneg, &all, &late, &floor}) r->finish_upper();
    witness.pass = witness.worst_ratio < 1;
    BoundReport out("direct", 1, hi);
    out.add_part(std::move(nonneg));
    out.add_part(std::move(all));
    out.add_part(std::move(late));
    out.add_part(std::move(witness));
    out.add_part(std::move(floor));
    out.details = {{"max_late", t.windows[1].max},
                   {"max_all", t.windows[0].max},
                   {"witness_max", t.windows[2].max},
                   {"min_late", t.windows[3].min},
                   {"drift_bound", t.drift_bound}};
    return out;
}

// The prime tail lemma on 1/zeta(2): the certified bracket contains 6/pi^2,
// and quadrature reproduces the closed-form tail integral.
inline BoundReport spe_check(u64 cutoff = default_prime_cutoff)
{
    BoundReport bracket("spe:bracket 1/zeta(2)", 0, static_cast<double>(cutoff), 0.0);
    EulerProductSpec spec;
    spec.name = "1/zeta(2)";
    spec.cutoff = cutoff;
    spec.local_term = [](double p) { return -1 / (p * p); };
    // |log(1 - 1/t^2)| <= c/t^2 with c = 1/(1 - 1/P^2).
    const double P0 = static_cast<double>(cutoff + 1);
    const double c = 1 / (1 - 1 / (P0 * P0));
    spec.tail_majorant = [c](double t) { return c / (t * t); };
    spec.tail_closed_form = [c](double P) { return c / (P * std::log(P)); };
    spec.decay_exponent = 2;
    spec.direction = Direction::two_sided;
    const auto v = euler_product(spec);
    const double target = 6 / (std::numbers::pi * std::numbers::pi);
    bracket.observe(std::max(target - v.upper(), *v.lower() - target), static_cast<double>(cutoff));
    bracket.finish_upper();
    bracket.details = {{"lower", *v.lower()}, {"upper", v.upper()}};

    BoundReport quad("spe:quadrature", 0, static_cast<double>(cutoff), 1e-6);
    const double P = static_cast<double>(cutoff) + 1;
    TailIntegrand closed, numeric;
    closed.f = numeric.f = [](double t) { return 1 / (t * t); };
    closed.closed_form = [](double x) { return 1 / x; };
    numeric.decay_exponent = 2;
    const double exact = tail_integral(closed, P).integral;
    const double q = tail_integral(numeric, P).integral;
    quad.observe(std::fabs(q - exact) / exact, P);
    quad.finish_upper();
    // The quadrature route must not undercut the exact integral.
    quad.pass = quad.pass && q >= exact * (1 - 1e-12);

    BoundReport out("spe", 0, static_cast<double>(cutoff));
    out.add_part(std::move(bracket));
    out.add_part(std::move(quad));
    return out;
}

// Landau's formula in exact arithmetic for d <= d_max and every real
// cutoff y <= y_max (the sums only change at integers).
inline BoundReport landau_check(u64 d_max, u64 y_max)
{
    detail::require(d_max >= 1 && y_max >= 1, "landau check needs d_max, y_max >= 1");
    BoundReport r("landau", 1, static_cast<double>(y_max), 0.0);
    const auto m = mertens_prefix<Rational>(y_max);
    const auto mu = mobius_upto(y_max);
    u64 mismatches = 0;
    for (u64 d = 1; d <= d_max; ++d) {
        Rational direct = 0;
        for (u64 N = 0; N < y_max; ++N) {
            if (N >= 1 && mu[N] != 0 && std::gcd(N, d) == 1) direct += Rational(mu[N], static_cast<unsigned long>(N));
            const Rational landau = landau_sum<Rational>(d, N, [&](u64 t) -> const Rational& { return m[t]; });
            if (landau != direct) {
                ++mismatches;
                r.observe(1, static_cast<double>(d));
            }
        }
    }
    if (mismatches == 0) r.observe(0, 0);
    r.finish_upper();
    r.details = {{"d_max", d_max}, {"mismatches", mismatches}};
    return r;
}

// ---------------------------------------------------------------------------
// Registry.

struct LemmaTarget {
    std::string name;
    std::string summary;
    u64 default_limit = 0;  // the scan range when the caller gives none
    std::function<BoundReport(u64 limit, const Limits&)> run;
};

namespace detail {

inline BoundReport select_parts(BoundReport all, std::string name, std::string_view prefix)
{
    BoundReport out(std::move(name), all.range_lo, all.range_hi);
    for (auto& p : all.parts)
        if (p.lemma.rfind(prefix, 0) == 0) out.add_part(std::move(p));
    return out;
}

inline BoundReport aux_target(AuxFunction g, u64 limit, const Limits& limits)
{
    BoundReport out(std::string("aux ") + aux_constants(g).name, 1, static_cast<double>(limit));
    out.add_part(aux_ratio_scan(g, limit, limits));
    out.add_part(aux_asymptotic_check(g, limit, limits));
    return out;
}

inline const std::vector<u64>& lemma_moduli()
{
    static const std::vector<u64> q{1, 2, 3, 6, 30, 210};
    return q;
}

} // namespace detail

inline const std::vector<LemmaTarget>& lemma_registry()
{
    static const std::vector<LemmaTarget> targets = [] {
        std::vector<LemmaTarget> t;
        t.push_back({"m1", "|m(x)| sqrt x <= sqrt 2 and |m_2(x)| sqrt x <= sqrt 3", 10000000,
                     [](u64 n, const Limits& l) { return check_envelope_m1(n, l); }});
        t.push_back({"m2", "|m(x)| <= 0.0144/log x and |m_2(x)| <= 0.0296/log x beyond the thresholds", 10000000,
                     [](u64 n, const Limits& l) { return check_envelope_m2(n, l); }});
        t.push_back({"m3", "coprime Mertens envelope for all t <= y", 1000000,
                     [](u64 n, const Limits& l) { return check_envelope_m3(n, l); }});
        t.push_back({"m4", "|m_d(y)| <= g0(d) sqrt(2/y) + 1_{y >= 10^12} 0.0144 g1(d)/log y for d <= 100", 100000,
                     [](u64 n, const Limits&) { return check_envelope_m4(100, n); }});
        t.push_back({"spe", "prime tail bound for Euler products", default_prime_cutoff,
                     [](u64 n, const Limits&) { return spe_check(n); }});
        t.push_back({"aux1", "sum of mu^2 phi g0^2 / d: max ratio 2.07 at D = 42, 2.0004 D + 106 D^(2/3)", 1000000,
                     [](u64 n, const Limits& l) { return detail::aux_target(AuxFunction::g0_squared, n, l); }});
        t.push_back({"aux2", "sum of mu^2 phi g0 g1 / d: max ratio 1.60 at D = 7, 1.34 D + 33.8 D^(2/3)", 1000000,
                     [](u64 n, const Limits& l) { return detail::aux_target(AuxFunction::g0_g1, n, l); }});
        t.push_back({"aux3", "sum of mu^2 phi g1^2 / d: max ratio 1.57 at D = 3, 1.06 D + 13.3 D^(2/3)", 1000000,
                     [](u64 n, const Limits& l) { return detail::aux_target(AuxFunction::g1_squared, n, l); }});
        t.push_back({"le1", "sum over d <= min(D, x/10^12) of mu^2 phi g0 g1 / (d^(3/2) log(x/d)) <= 0.05 sqrt D", 0,
                     [](u64, const Limits&) { return le1_verify(default_le_grid()); }});
        t.push_back({"le2", "sum over d <= min(D, x/10^12) of mu^2 phi g1^2 / (d^2 log^2(x/d)) <= 0.047", 0,
                     [](u64, const Limits&) { return le2_verify(default_le_grid()); }});
        t.push_back({"tail", "sum over d <= D of mu^2 phi / d^2 m_d(x/d)^2 <= 4.14 D/x + 0.00205", 2000,
                     [](u64 n, const Limits& l) {
                         const u64 extra[] = {10000, 100000};
                         BoundReport out("tail", 1, static_cast<double>(std::max<u64>(n, 100000)));
                         out.add_part(tail_component_audit());
                         out.add_part(tail_direct_check(n, extra, l));
                         return out;
                     }});
        t.push_back({"auxmajorstar2", "K |sum_{k >= K, (k,M)=1} mu(k) phi(k)/k^3| <= 1", 200,
                     [](u64 n, const Limits& l) {
                         const std::vector<u64> moduli{1, 2, 3, 5, 7, 11, 13, 6, 30, 105};
                         BoundReport out = aux_k_scan(static_cast<double>(n), 0.25, moduli, l);
                         out.add_part(aux_k_anchor_check(l));
                         return out;
                     }});
        t.push_back({"convol0", "mu^2(d) phi(d)/d = sum_{lm = d} mu^2(l) g(m)", 100000,
                     [](u64 n, const Limits& l) {
                         return detail::select_parts(convolution_identity_checks(n, detail::lemma_moduli(), l), "convol0",
                                                     "convol0");
                     }});
        t.push_back({"moebius-square", "|Q(X) - 6X/pi^2| <= c sqrt X for X >= X0, five rows", 10000000,
                     [](u64 n, const Limits& l) { return moebius_square_table_check(moebius_square_rows(), n, l); }});
        t.push_back({"init", "|G*(X) - A(log X + c)| bound with maximum at X = 1", 10000000,
                     [](u64 n, const Limits& l) { return init_bound_check(n, l); }});
        t.push_back({"keyb", "G*_q(D) identity and remainder bound", 10000,
                     [](u64 n, const Limits& l) {
                         std::vector<u64> Ds;
                         for (u64 D = 10; D <= n; D *= 10) Ds.push_back(D);
                         const u64 qs[] = {1, 2, 6, 30};
                         return keyb_check(Ds, qs, l);
                     }});
        t.push_back({"getgstarq", "|G*_q(X) - main| <= 4.73 j1*(q)/sqrt X and the difference estimate", 1000000,
                     [](u64 n, const Limits& l) {
                         std::vector<u64> xs;
                         for (u64 X = 100; X <= n; X *= 10) xs.push_back(X);
                         return getgstarq_check(detail::lemma_moduli(), xs, l);
                     }});
        t.push_back({"convol", "coprime convolution identity for q in {1, 2, 3, 6, 30, 210}", 100000,
                     [](u64 n, const Limits& l) {
                         return detail::select_parts(convolution_identity_checks(n, detail::lemma_moduli(), l), "convol",
                                                     "convol q=");
                     }});
        t.push_back({"majorstar1", "r1*(X; q) <= 2.18 j1*(q) sqrt X", 1000000,
                     [](u64 n, const Limits& l) {
                         return detail::select_parts(scan_majorstar(n, detail::lemma_moduli(), l), "majorstar1",
                                                     "majorstar1");
                     }});
        t.push_back({"majorstar2", "|r2*(X; q)| <= 2.18 j1*(q)/sqrt X", 1000000,
                     [](u64 n, const Limits& l) { return scan_majorstar2(n, detail::lemma_moduli(), l); }});
        t.push_back({"major1starter", "r1*(X; q) <= 1.17 j1*(q) sqrt X when all primes of q are < 30", 1000000,
                     [](u64 n, const Limits& l) {
                         return detail::select_parts(scan_majorstar(n, detail::lemma_moduli(), l), "major1starter",
                                                     "major1starter");
                     }});
        t.push_back({"landau", "Landau's formula for the coprime Mertens sum, exact, d <= 50", 1000,
                     [](u64 n, const Limits&) { return landau_check(50, n); }});
        t.push_back({"direct", "0 <= Sigma(X) <= 0.445 on [422, X], <= 19/30 on [2, X], >= 0.437 on [1000, X]", 1000000,
                     [](u64 n, const Limits& l) { return direct_lemma_check(n, l); }});
        return t;
    }();
    return targets;
}

inline const LemmaTarget& find_lemma(std::string_view name)
{
    for (const auto& t : lemma_registry())
        if (t.name == name) return t;
    throw InvalidArgument("unknown lemma: " + std::string(name));
}

} // namespace dmsum
