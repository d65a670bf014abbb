#pragma once

// Sigma(X) = sum_{d1, d2 <= X} mu(d1) mu(d2) / lcm(d1, d2), computed by
//  * the double sum itself,
//  * sum_{d <= X} mu^2(d) phi(d)/d^2 m_d(X/d)^2, with m_d the Mertens-type sum
//    restricted to integers coprime to d,
//  * the increment
//      Sigma(d) - Sigma(d-1) = mu^2(d)/d
//          + (2 mu(d)/d) sum_{k | d^oo} (-1)^Omega(k) phi(k)/k^2 m((d-1)/k),
//    where only k <= d-1 contribute.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "config.hpp"
#include "error.hpp"
#include "mertens.hpp"
#include "numeric.hpp"
#include "sieve.hpp"

namespace dmsum {

namespace detail {

inline void require_quadratic(u64 X, const Limits& limits)
{
    if (X > limits.quadratic_limit) throw BudgetExceeded("X beyond the quadratic brute-force budget");
}

} // namespace detail

// Sigma(n) for n = 0..X from the double sum, organised by increments
// mu^2(d)/d + 2 mu(d) sum_{d' < d} mu(d') gcd(d, d') / (d d').
inline std::vector<double> sigma_bruteforce_prefix(u64 X, const Limits& limits = default_limits())
{
    detail::require_quadratic(X, limits);
    const auto mu = mobius_upto(X);
    std::vector<double> out(X + 1, 0.0);
    NeumaierSum total;
    for (u64 d = 1; d <= X; ++d) {
        if (mu[d] != 0) {
            NeumaierSum inner;
            for (u64 e = 1; e < d; ++e)
                if (mu[e] != 0) inner.add(mu[e] * static_cast<double>(std::gcd(d, e)) / static_cast<double>(e));
            const double dd = static_cast<double>(d);
            total.add(1.0 / dd + 2.0 * mu[d] * inner.value() / dd);
        }
        out[d] = total.value();
    }
    return out;
}

// Exact Sigma(X): every lcm of two squarefree integers <= X divides the
// product P of the primes <= X, so Sigma(X) = (sum_L c_L P/L) / P with
// integer multiplicities c_L.
inline Rational sigma_bruteforce_exact(u64 X, const Limits& limits = default_limits())
{
    detail::require_quadratic(X, limits);
    if (X == 0) return 0;
    const auto mu = mobius_upto(X);
    std::vector<u64> sf;
    for (u64 n = 1; n <= X; ++n)
        if (mu[n] != 0) sf.push_back(n);
    std::unordered_map<u64, i64> count;
    for (std::size_t i = 0; i < sf.size(); ++i) {
        const u64 a = sf[i];
        count[a] += 1;
        for (std::size_t j = 0; j < i; ++j) {
            const u64 b = sf[j];
            count[a / std::gcd(a, b) * b] += 2 * mu[a] * mu[b];
        }
    }
    mpz_class P = 1;
    for (u64 p : primes_upto(X)) P *= static_cast<unsigned long>(p);
    mpz_class num = 0;
    std::vector<std::pair<u64, i64>> entries(count.begin(), count.end());
    std::sort(entries.begin(), entries.end());
    for (auto [L, c] : entries) {
        if (c == 0) continue;
        mpz_class t = P / mpz_class(static_cast<unsigned long>(L));
        t *= static_cast<long>(c);
        num += t;
    }
    Rational r(num, P);
    r.canonicalize();
    return r;
}

inline double sigma_bruteforce(u64 X, const Limits& limits = default_limits())
{
    return sigma_bruteforce_prefix(X, limits)[X];
}

// sum_{n <= N, (n, d) = 1} mu(n)/n as sum_{l | d^oo, l <= N} (1/l) m(N / l),
// with m given on integers by `m_at`.
template <class T, class M>
T landau_sum(u64 d, u64 N, M&& m_at)
{
    Accumulator<T> acc;
    if (N == 0) return acc.value();
    const auto primes = distinct_primes(d);
    for_each_smooth(std::span<const u64>(primes), N, [&](u64 l, int, u64) {
        if constexpr (std::is_same_v<T, Rational>)
            acc.add(Rational(1, static_cast<unsigned long>(l)) * m_at(N / l));
        else
            acc.add(static_cast<double>(m_at(N / l)) / static_cast<double>(l));
    });
    return acc.value();
}

namespace detail {

// Largest integer strictly below y.
inline u64 strict_floor(double y)
{
    if (y <= 1) return 0;
    return static_cast<u64>(std::ceil(y)) - 1;
}

} // namespace detail

// sum_{d' < y, (d', d) = 1} mu(d')/d' via the Landau formula.
template <class T = double>
T landau_coprime_m(u64 d, double y)
{
    detail::require(d >= 1, "landau_coprime_m needs d >= 1");
    const u64 N = detail::strict_floor(y);
    const auto m = mertens_prefix<T>(N);
    return landau_sum<T>(d, N, [&](u64 t) -> const T& { return m[t]; });
}

// The same sum computed directly.
template <class T = double>
T coprime_m_direct(u64 d, double y)
{
    detail::require(d >= 1, "coprime_m_direct needs d >= 1");
    const u64 N = detail::strict_floor(y);
    const auto mu = mobius_upto(N);
    Accumulator<T> acc;
    for (u64 n = 1; n <= N; ++n)
        if (mu[n] != 0 && std::gcd(n, d) == 1) acc.add(make_ratio<T>(mu[n], static_cast<long long>(n)));
    return acc.value();
}

// Sigma(X) = sum_{d <= X} mu^2(d) phi(d)/d^2 m_d(X/d)^2.
template <class T = double>
T sigma_via_gstar_identity(u64 X, const Limits& limits = default_limits())
{
    if (X > limits.scan_limit / 100) throw BudgetExceeded("X beyond the G* identity budget");
    const auto m = mertens_prefix<T>(X);
    const auto b = sieve_range(1, std::max<u64>(X, 1), limits);
    Accumulator<T> acc;
    for (u64 d = 1; d <= X; ++d) {
        if (b.mu_at(d) == 0) continue;
        const T md = landau_sum<T>(d, X / d, [&](u64 t) -> const T& { return m[t]; });
        acc.add(make_ratio<T>(static_cast<long long>(b.phi_at(d)), static_cast<long long>(d * d)) * md * md);
    }
    return acc.value();
}

namespace detail {

// Visits k <= limit with k | d^infinity together with prod_{p | k} (1 - p).
template <class Visit>
void for_each_smooth_signed(std::span<const u64> ps, std::size_t idx, u64 k, i64 c, u64 limit, Visit& visit)
{
    if (idx == ps.size()) {
        visit(k, c);
        return;
    }
    const u64 p = ps[idx];
    for_each_smooth_signed(ps, idx + 1, k, c, limit, visit);
    const i64 cp = c * (1 - static_cast<i64>(p));
    for (u64 kk = k; kk <= limit / p;) {
        kk *= p;
        for_each_smooth_signed(ps, idx + 1, kk, cp, limit, visit);
    }
}

} // namespace detail

// Sigma(d) - Sigma(d-1) given the primes of d and an evaluator m_at(t) of
// m on integers t <= d-1. The k-weight is (1/k) prod_{p | k} (1 - p).
template <class T, class M>
T delta_sigma_with(u64 d, int mu_d, std::span<const u64> primes, M&& m_at)
{
    if (mu_d == 0) return T(0);
    detail::require(d >= 1, "delta_sigma needs d >= 1");
    Accumulator<T> acc;
    if (d >= 2) {
        auto visit = [&](u64 k, i64 c) {
            const T mv = m_at((d - 1) / k);
            acc.add(make_ratio<T>(c, static_cast<long long>(k)) * mv);
        };
        detail::for_each_smooth_signed(primes, 0, 1, 1, d - 1, visit);
    }
    const T inv_d = make_ratio<T>(1, static_cast<long long>(d));
    return inv_d + T(2 * mu_d) * inv_d * acc.value();
}

inline double delta_sigma(u64 d, const MertensTable& table)
{
    detail::require(d >= 1, "delta_sigma needs d >= 1");
    if (d >= 2 && table.limit() < d - 1) throw InvalidArgument("Mertens table does not cover d-1");
    const int mu_d = mobius(d);
    if (mu_d == 0) return 0.0;
    const auto primes = distinct_primes(d);
    return delta_sigma_with<double>(d, mu_d, primes, [&](u64 t) { return table.m(t); });
}

inline Rational delta_sigma_exact(u64 d)
{
    detail::require(d >= 1, "delta_sigma needs d >= 1");
    const int mu_d = mobius(d);
    if (mu_d == 0) return 0;
    const auto m = mertens_prefix<Rational>(d - 1);
    const auto primes = distinct_primes(d);
    return delta_sigma_with<Rational>(d, mu_d, primes, [&](u64 t) -> const Rational& { return m[t]; });
}

// ---------------------------------------------------------------------------
// The scan.

struct WindowExtrema {
    u64 lo = 0;
    u64 hi = 0;
    double max = -std::numeric_limits<double>::infinity();
    u64 argmax = 0;
    double min = std::numeric_limits<double>::infinity();
    u64 argmin = 0;

    void observe(u64 d, double v)
    {
        if (d < lo || d > hi) return;
        if (v > max) {
            max = v;
            argmax = d;
        }
        if (v < min) {
            min = v;
            argmin = d;
        }
    }
    bool seen() const { return argmax != 0; }
};

struct SigmaScanState {
    u64 X_max = 0;
    u64 d = 0;  // last completed index
    double sum = 0;
    double compensation = 0;
    WindowExtrema overall;
    std::vector<WindowExtrema> windows;
    double shadow_drift = 0;
    u64 shadow_done = 0;
    std::string table_path;
};

struct SigmaScanOptions {
    std::vector<std::pair<u64, u64>> windows;
    u64 shadow_limit = 2000;
    bool store_values = true;
    u64 checkpoint_every = 0;
    // Called with the state every checkpoint_every steps and at the end.
    std::function<void(const SigmaScanState&)> on_checkpoint;
    std::optional<SigmaScanState> resume;
    const MertensTable* table = nullptr;  // built internally when null
};

struct SigmaTrace {
    u64 X_max = 0;
    u64 first = 1;  // values[i] is Sigma(first + i)
    std::vector<double> values;
    WindowExtrema overall;
    std::vector<WindowExtrema> windows;
    double shadow_drift = 0;
    u64 shadow_limit = 0;
    double drift_bound = 0;  // shadow drift extrapolated linearly to X_max
    SigmaScanState final_state;

    double at(u64 d) const
    {
        if (d < first || d - first >= values.size()) throw InvalidArgument("Sigma value not stored for this d");
        return values[d - first];
    }
};

inline nlohmann::json to_json(const WindowExtrema& w)
{
    nlohmann::json j;
    j["lo"] = w.lo;
    j["hi"] = w.hi;
    if (w.seen()) {
        j["max"] = w.max;
        j["argmax"] = w.argmax;
        j["min"] = w.min;
        j["argmin"] = w.argmin;
    }
    return j;
}

inline WindowExtrema window_from_json(const nlohmann::json& j)
{
    WindowExtrema w;
    w.lo = j.at("lo").get<u64>();
    w.hi = j.at("hi").get<u64>();
    if (j.contains("max")) {
        w.max = j.at("max").get<double>();
        w.argmax = j.at("argmax").get<u64>();
        w.min = j.at("min").get<double>();
        w.argmin = j.at("argmin").get<u64>();
    }
    return w;
}

inline nlohmann::json to_json(const SigmaScanState& s)
{
    nlohmann::json j;
    j["format"] = "dmsum-sigma-scan";
    j["version"] = 1;
    j["X_max"] = s.X_max;
    j["d"] = s.d;
    j["sum"] = s.sum;
    j["compensation"] = s.compensation;
    j["overall"] = to_json(s.overall);
    j["windows"] = nlohmann::json::array();
    for (const auto& w : s.windows) j["windows"].push_back(to_json(w));
    j["shadow_drift"] = s.shadow_drift;
    j["shadow_done"] = s.shadow_done;
    j["table_path"] = s.table_path;
    return j;
}

inline SigmaScanState scan_state_from_json(const nlohmann::json& j)
{
    try {
        if (j.at("format") != "dmsum-sigma-scan" || j.at("version") != 1)
            throw FormatError("not a sigma scan checkpoint");
        SigmaScanState s;
        s.X_max = j.at("X_max").get<u64>();
        s.d = j.at("d").get<u64>();
        s.sum = j.at("sum").get<double>();
        s.compensation = j.at("compensation").get<double>();
        s.overall = window_from_json(j.at("overall"));
        for (const auto& w : j.at("windows")) s.windows.push_back(window_from_json(w));
        s.shadow_drift = j.at("shadow_drift").get<double>();
        s.shadow_done = j.at("shadow_done").get<u64>();
        s.table_path = j.at("table_path").get<std::string>();
        if (s.d > s.X_max) throw FormatError("checkpoint index beyond X_max");
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed sigma scan checkpoint: ") + e.what());
    }
}

inline void save_scan_state(const SigmaScanState& s, const std::string& path)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw Error("cannot write checkpoint " + tmp);
        out << to_json(s).dump(2) << '\n';
    }
    std::rename(tmp.c_str(), path.c_str());
}

inline SigmaScanState load_scan_state(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open checkpoint " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed checkpoint JSON: ") + e.what());
    }
    return scan_state_from_json(j);
}

// Sigma(d) for d = 1..X_max from the increments, with window extrema, an
// exact-rational shadow on d <= shadow_limit and optional checkpoints.
inline SigmaTrace sigma_scan(u64 X_max, const SigmaScanOptions& opt = {}, const Limits& limits = default_limits())
{
    detail::require(X_max >= 1, "sigma_scan needs X_max >= 1");
    if (X_max > limits.scan_limit) throw BudgetExceeded("sigma scan beyond scan budget");

    std::optional<MertensTable> own;
    const MertensTable* table = opt.table;
    if (!table) {
        own = MertensTable::build(std::max<u64>(X_max - 1, 1), 6, limits);
        table = &*own;
    }
    if (table->limit() + 1 < X_max) throw InvalidArgument("Mertens table does not cover X_max - 1");

    SigmaScanState st;
    if (opt.resume) {
        st = *opt.resume;
        if (st.X_max != X_max) throw FormatError("checkpoint was written for a different X_max");
    } else {
        st.X_max = X_max;
        st.overall = {1, X_max};
        for (auto [lo, hi] : opt.windows) st.windows.push_back({lo, hi});
    }

    SigmaTrace trace;
    trace.X_max = X_max;
    trace.first = st.d + 1;
    trace.shadow_limit = opt.shadow_limit;
    if (opt.store_values) {
        if ((X_max - st.d) > limits.memory_bytes / sizeof(double)) throw BudgetExceeded("trace exceeds memory budget");
        trace.values.reserve(X_max - st.d);
    }

    const u64 shadow_end = std::min(opt.shadow_limit, X_max);
    std::vector<Rational> m_exact;
    Rational shadow_sum = 0;
    const bool run_shadow = st.d < shadow_end && st.d == 0;
    if (run_shadow) m_exact = mertens_prefix<Rational>(shadow_end);

    NeumaierSum sum(st.sum, st.compensation);
    auto m_at = [&](u64 t) { return table->m(t); };
    for_each_factored_segment(st.d + 1, X_max, limits, [&](const FactoredBlock& b) {
        for (u64 d = b.lo; d <= b.hi; ++d) {
            const int mu_d = b.mu_at(d);
            if (mu_d != 0) sum.add(delta_sigma_with<double>(d, mu_d, b.primes_of(d), m_at));
            const double v = sum.value();
            if (run_shadow && d <= shadow_end) {
                if (mu_d != 0)
                    shadow_sum += delta_sigma_with<Rational>(d, mu_d, b.primes_of(d),
                                                             [&](u64 t) -> const Rational& { return m_exact[t]; });
                st.shadow_drift = std::max(st.shadow_drift, std::fabs(v - shadow_sum.get_d()));
                st.shadow_done = d;
            }
            st.overall.observe(d, v);
            for (auto& w : st.windows) w.observe(d, v);
            if (opt.store_values) trace.values.push_back(v);
            st.d = d;
            if (opt.checkpoint_every != 0 && d % opt.checkpoint_every == 0 && opt.on_checkpoint) {
                st.sum = sum.raw_sum();
                st.compensation = sum.compensation();
                opt.on_checkpoint(st);
            }
        }
    });
    st.sum = sum.raw_sum();
    st.compensation = sum.compensation();
    if (opt.on_checkpoint) opt.on_checkpoint(st);

    trace.overall = st.overall;
    trace.windows = st.windows;
    trace.shadow_drift = st.shadow_drift;
    const double per_step = st.shadow_done > 0 ? st.shadow_drift / static_cast<double>(st.shadow_done) : 0.0;
    trace.drift_bound = std::max(st.shadow_drift, per_step * static_cast<double>(X_max));
    trace.final_state = st;
    return trace;
}

} // namespace dmsum
