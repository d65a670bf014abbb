#pragma once

// m(y) = sum_{d <= y} mu(d)/d and its coprime restriction m_q(y), the
// residue-class table used by the Sigma scan, and the explicit envelopes
// for |m|, |m_2| and |m_d|.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "error.hpp"
#include "numeric.hpp"
#include "report.hpp"
#include "sieve.hpp"

namespace dmsum {

// Floating point evaluation slack for inequalities that are attained
// with equality (e.g. |m(x)| sqrt(x) -> sqrt(2) as x -> 2).
inline constexpr double rounding_slack = 1e-12;

inline bool coprime(u64 a, u64 b) { return std::gcd(a, b) == 1; }

inline u64 floor_to_u64(double y) { return y < 1.0 ? 0 : static_cast<u64>(std::floor(y)); }

// m_q(t) for every integer t in [0, limit], exactly (Rational) or with
// compensated summation (double).
template <class T>
std::vector<T> mertens_prefix(u64 limit, u64 q = 1)
{
    const auto mu = mobius_upto(limit);
    std::vector<T> out(limit + 1);
    Accumulator<T> acc;
    out[0] = T(0);
    for (u64 n = 1; n <= limit; ++n) {
        if (mu[n] != 0 && (q == 1 || coprime(n, q))) acc.add(make_ratio<T>(mu[n], static_cast<long long>(n)));
        out[n] = acc.value();
    }
    return out;
}

// Exact m_q(y) (oracle mode, intended for y up to about 10^4).
inline Rational mertens_exact(u64 y, u64 q = 1)
{
    const auto mu = mobius_upto(y);
    Rational s = 0;
    for (u64 n = 1; n <= y; ++n)
        if (mu[n] != 0 && coprime(n, q)) s += Rational(mu[n], static_cast<unsigned long>(n));
    return s;
}

// m_q(y) for real y >= 0, compensated float mode; 0 for y < 1.
inline double mertens_mq(double y, u64 q, const Limits& limits = default_limits())
{
    detail::require(q >= 1, "m_q: q must be >= 1");
    const u64 n_max = floor_to_u64(y);
    NeumaierSum s;
    for_each_mobius_segment(1, n_max, limits, [&](u64 lo, std::span<const std::int8_t> mu) {
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const u64 n = lo + i;
            if (mu[i] != 0 && (q == 1 || coprime(n, q))) s.add(mu[i] / static_cast<double>(n));
        }
    });
    return s.value();
}

inline double mertens_m(double y, const Limits& limits = default_limits()) { return mertens_mq(y, 1, limits); }

// Prefix sums of mu(n)/n split by residue class u coprime to the modulus,
// stored only at n = u (mod modulus): m(t;u,M0) = sum_{n<=t, n=u (M0)} mu(n)/n.
class MertensTable {
public:
    static constexpr char magic[8] = {'D', 'M', 'S', 'M', 'T', 'A', 'B', '1'};
    static constexpr std::uint32_t format_version = 1;
    static constexpr std::uint32_t endian_marker = 0x01020304u;

    MertensTable() = default;

    static MertensTable build(u64 limit, u64 modulus = 6, const Limits& limits = default_limits())
    {
        detail::require(limit >= 1, "MertensTable: limit must be >= 1");
        detail::require(modulus >= 1, "MertensTable: modulus must be >= 1");
        MertensTable t;
        t.init_shape(limit, modulus);
        if (t.required_bytes() > limits.memory_bytes)
            throw BudgetExceeded("MertensTable needs " + std::to_string(t.required_bytes()) +
                                 " bytes, budget is " + std::to_string(limits.memory_bytes));
        for (std::size_t r = 0; r < t.residues_.size(); ++r) t.sums_[r].assign(t.length_for(t.residues_[r]), 0.0);

        std::vector<NeumaierSum> acc(t.residues_.size());
        for_each_mobius_segment(1, limit, limits, [&](u64 lo, std::span<const std::int8_t> mu) {
            for (std::size_t i = 0; i < mu.size(); ++i) {
                const u64 n = lo + i;
                const int r = t.slot_[n % modulus];
                if (r < 0) continue;
                if (mu[i] != 0) acc[r].add(mu[i] / static_cast<double>(n));
                t.sums_[r][(n - t.residues_[r]) / modulus] = acc[r].value();
            }
        });
        return t;
    }

    u64 limit() const { return limit_; }
    u64 modulus() const { return modulus_; }
    std::span<const u64> residues() const { return residues_; }
    std::size_t bytes() const { return required_bytes(); }

    // m(t;u,M0); u must be one of residues().
    double residue_sum(u64 t, u64 u) const
    {
        const int r = slot_.at(u % modulus_);
        detail::require(r >= 0, "residue not coprime to the table modulus");
        check_range(t);
        if (t < residues_[r]) return 0.0;
        return sums_[r][(t - residues_[r]) / modulus_];
    }

    // m_{M0}(t) = sum over coprime residues of m(t;u,M0).
    double coprime_sum(u64 t) const
    {
        check_range(t);
        double s = 0.0;
        for (std::size_t r = 0; r < residues_.size(); ++r)
            if (t >= residues_[r]) s += sums_[r][(t - residues_[r]) / modulus_];
        return s;
    }

    // m(t) = sum_{a | rad(M0)} (mu(a)/a) m_{M0}(t/a).
    double m(u64 t) const
    {
        check_range(t);
        double s = 0.0;
        for (const auto& [a, w] : divisor_weights_) s += w * coprime_sum(t / a);
        return s;
    }

    void save(const std::string& path) const
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot open " + path + " for writing");
        auto put = [&](const auto& v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
        out.write(magic, sizeof magic);
        put(format_version);
        put(endian_marker);
        put(modulus_);
        put(limit_);
        put(static_cast<u64>(residues_.size()));
        for (u64 u : residues_) put(u);
        for (const auto& arr : sums_) {
            put(static_cast<u64>(arr.size()));
            out.write(reinterpret_cast<const char*>(arr.data()),
                      static_cast<std::streamsize>(arr.size() * sizeof(double)));
        }
        if (!out) throw Error("failed writing " + path);
    }

    static MertensTable load(const std::string& path, const Limits& limits = default_limits())
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw FormatError("cannot open table file " + path);
        auto get = [&](auto& v) {
            in.read(reinterpret_cast<char*>(&v), sizeof v);
            if (!in) throw FormatError("truncated table file " + path);
        };
        char m[8];
        in.read(m, sizeof m);
        if (!in || std::memcmp(m, magic, sizeof m) != 0) throw FormatError("bad magic in " + path);
        std::uint32_t version = 0, endian = 0;
        get(version);
        get(endian);
        if (version != format_version) throw FormatError("unsupported table version in " + path);
        if (endian != endian_marker) throw FormatError("table file has foreign endianness: " + path);
        u64 modulus = 0, limit = 0, count = 0;
        get(modulus);
        get(limit);
        get(count);
        if (modulus == 0 || limit == 0) throw FormatError("degenerate table header in " + path);
        MertensTable t;
        t.init_shape(limit, modulus);
        if (count != t.residues_.size()) throw FormatError("residue count mismatch in " + path);
        if (t.required_bytes() > limits.memory_bytes) throw BudgetExceeded("table in " + path + " exceeds memory budget");
        for (u64 u : t.residues_) {
            u64 stored = 0;
            get(stored);
            if (stored != u) throw FormatError("residue list mismatch in " + path);
        }
        for (std::size_t r = 0; r < t.residues_.size(); ++r) {
            u64 len = 0;
            get(len);
            if (len != t.length_for(t.residues_[r])) throw FormatError("array length mismatch in " + path);
            t.sums_[r].resize(len);
            in.read(reinterpret_cast<char*>(t.sums_[r].data()), static_cast<std::streamsize>(len * sizeof(double)));
            if (!in) throw FormatError("truncated table file " + path);
        }
        return t;
    }

private:
    void init_shape(u64 limit, u64 modulus)
    {
        limit_ = limit;
        modulus_ = modulus;
        residues_.clear();
        slot_.assign(modulus, -1);
        for (u64 u = 1; u <= modulus; ++u) {
            if (std::gcd(u, modulus) != 1) continue;
            slot_[u % modulus] = static_cast<int>(residues_.size());
            residues_.push_back(u);
        }
        sums_.assign(residues_.size(), {});
        divisor_weights_.clear();
        const auto ps = distinct_primes(modulus);
        std::vector<u64> none;
        for (u64 mask = 0; mask < (u64{1} << ps.size()); ++mask) {
            u64 a = 1;
            int sign = 1;
            for (std::size_t i = 0; i < ps.size(); ++i)
                if (mask >> i & 1) {
                    a *= ps[i];
                    sign = -sign;
                }
            divisor_weights_.emplace_back(a, sign / static_cast<double>(a));
        }
    }

    u64 length_for(u64 u) const { return limit_ >= u ? (limit_ - u) / modulus_ + 1 : 0; }

    std::size_t required_bytes() const
    {
        std::size_t total = 0;
        for (u64 u : residues_) total += length_for(u) * sizeof(double);
        return total;
    }

    void check_range(u64 t) const
    {
        if (t > limit_)
            throw InvalidArgument("t=" + std::to_string(t) + " beyond table limit " + std::to_string(limit_));
    }

    u64 limit_ = 0;
    u64 modulus_ = 1;
    std::vector<u64> residues_;
    std::vector<int> slot_;
    std::vector<std::vector<double>> sums_;
    std::vector<std::pair<u64, double>> divisor_weights_;
};

inline MertensTable build_table(u64 limit, u64 modulus = 6, const Limits& limits = default_limits())
{
    return MertensTable::build(limit, modulus, limits);
}

inline double m_from_table(const MertensTable& table, u64 t) { return table.m(t); }

// ---------------------------------------------------------------------------
// Envelopes

struct EnvelopeParams {
    static inline const double xi = 1.0 - 1.0 / (12.0 * std::log(10.0));
    static constexpr double c_m = 0.0144;
    static constexpr double c_m2 = 0.0296;
    static constexpr u64 x_m_threshold = 463421;
    static constexpr u64 x_m2_threshold = 5379;
    static constexpr double indicator_cutoff = 1e12;
};

enum class MVariant { m, m2 };

// sqrt(c/t) + c' 1[y >= 1e12] y^(1-xi) / (log y t^(1-xi)), with (c,c') =
// (2, 0.0144) for m and (3, 0.0296) for m_2.
inline double envelope_m3(double t, double y, MVariant variant)
{
    detail::require(t > 0 && t <= y, "envelope_m3 needs 0 < t <= y");
    detail::require(y > 1, "envelope_m3 needs y > 1");
    const bool is_m = variant == MVariant::m;
    const double c = is_m ? 2.0 : 3.0;
    const double cc = is_m ? EnvelopeParams::c_m : EnvelopeParams::c_m2;
    double v = std::sqrt(c / t);
    if (y >= EnvelopeParams::indicator_cutoff) {
        const double e = 1.0 - EnvelopeParams::xi;
        v += cc * std::pow(y, e) / (std::log(y) * std::pow(t, e));
    }
    return v;
}

inline double g0_at_prime(double p)
{
    return p == 2.0 ? std::sqrt(1.5) : std::sqrt(p) / (std::sqrt(p) - 1.0);
}

inline double g1_at_prime(double p)
{
    if (p == 2.0) return 2.06;
    const double px = std::pow(p, EnvelopeParams::xi);
    return px / (px - 1.0);
}

inline double g0(u64 d)
{
    double v = 1.0;
    for (u64 p : squarefree_primes(d)) v *= g0_at_prime(static_cast<double>(p));
    return v;
}

inline double g1(u64 d)
{
    double v = 1.0;
    for (u64 p : squarefree_primes(d)) v *= g1_at_prime(static_cast<double>(p));
    return v;
}

// g0(d) sqrt(2/y) + 0.0144 g1(d) 1[y >= 1e12] / log y.
inline double envelope_m4(u64 d, double y)
{
    detail::require(y > 1, "envelope_m4 needs y > 1");
    double v = g0(d) * std::sqrt(2.0 / y);
    if (y >= EnvelopeParams::indicator_cutoff) v += EnvelopeParams::c_m * g1(d) / std::log(y);
    return v;
}

// Scans |m(x)| sqrt(x) <= sqrt 2 and |m_2(x)| sqrt(x) <= sqrt 3 for real
// 0 < x <= limit. On [n, n+1) the sum is constant, so the supremum is
// |m(n)| sqrt(n+1).
inline BoundReport check_envelope_m1(u64 limit, const Limits& limits = default_limits())
{
    detail::require(limit >= 1, "check_envelope_m1: limit must be >= 1");
    if (limit > limits.scan_limit) throw BudgetExceeded("m1 scan beyond scan budget");
    BoundReport m{"m1:m", 0, static_cast<double>(limit)};
    BoundReport m2{"m1:m2", 0, static_cast<double>(limit)};
    m.bound = std::sqrt(2.0);
    m2.bound = std::sqrt(3.0);
    NeumaierSum sm, sm2;
    for_each_mobius_segment(1, limit, limits, [&](u64 lo, std::span<const std::int8_t> mu) {
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const u64 n = lo + i;
            if (mu[i] != 0) {
                const double term = mu[i] / static_cast<double>(n);
                sm.add(term);
                if (n & 1) sm2.add(term);
            }
            const double right = std::sqrt(static_cast<double>(n == limit ? n : n + 1));
            m.observe(std::fabs(sm.value()) * right, static_cast<double>(n));
            m2.observe(std::fabs(sm2.value()) * right, static_cast<double>(n));
        }
    });
    m.pass = m.worst_ratio <= m.bound * (1 + rounding_slack);
    m2.pass = m2.worst_ratio <= m2.bound * (1 + rounding_slack);
    BoundReport out{"m1", 0, static_cast<double>(limit)};
    out.note = "sup over real x in (0, limit]; worst_arg n means x -> n+1 from the left";
    out.add_part(std::move(m));
    out.add_part(std::move(m2));
    return out;
}

// |m(x)| log x <= 0.0144 for x >= 463421 and |m_2(x)| log x <= 0.0296 for
// x >= 5379, real x up to limit.
inline BoundReport check_envelope_m2(u64 limit, const Limits& limits = default_limits())
{
    if (limit > limits.scan_limit) throw BudgetExceeded("m2 scan beyond scan budget");
    BoundReport m{"m2:m", static_cast<double>(EnvelopeParams::x_m_threshold), static_cast<double>(limit)};
    BoundReport m2{"m2:m2", static_cast<double>(EnvelopeParams::x_m2_threshold), static_cast<double>(limit)};
    m.bound = EnvelopeParams::c_m;
    m2.bound = EnvelopeParams::c_m2;
    NeumaierSum sm, sm2;
    for_each_mobius_segment(1, limit, limits, [&](u64 lo, std::span<const std::int8_t> mu) {
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const u64 n = lo + i;
            if (mu[i] != 0) {
                const double term = mu[i] / static_cast<double>(n);
                sm.add(term);
                if (n & 1) sm2.add(term);
            }
            const double right = std::log(static_cast<double>(n == limit ? n : n + 1));
            if (n >= EnvelopeParams::x_m_threshold) m.observe(std::fabs(sm.value()) * right, static_cast<double>(n));
            if (n >= EnvelopeParams::x_m2_threshold) m2.observe(std::fabs(sm2.value()) * right, static_cast<double>(n));
        }
    });
    m.finish_upper();
    m2.finish_upper();
    if (limit < EnvelopeParams::x_m_threshold) {
        m.worst_ratio = 0;
        m.pass = true;
        m.note = "range empty";
    }
    BoundReport out{"m2", static_cast<double>(EnvelopeParams::x_m2_threshold), static_cast<double>(limit)};
    out.add_part(std::move(m));
    out.add_part(std::move(m2));
    return out;
}

// |m(t)| and |m_2(t)| against envelope_m3(t, y) for t in (0, y], y = limit.
inline BoundReport check_envelope_m3(u64 y, const Limits& limits = default_limits())
{
    detail::require(y >= 2, "check_envelope_m3: y must be >= 2");
    if (y > limits.scan_limit) throw BudgetExceeded("m3 scan beyond scan budget");
    BoundReport out{"m3", 0, static_cast<double>(y)};
    out.bound = 1.0;
    NeumaierSum sm, sm2;
    const double yy = static_cast<double>(y);
    for_each_mobius_segment(1, y, limits, [&](u64 lo, std::span<const std::int8_t> mu) {
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const u64 n = lo + i;
            if (mu[i] != 0) {
                sm.add(mu[i] / static_cast<double>(n));
                if (n & 1) sm2.add(mu[i] / static_cast<double>(n));
            }
            const double t = static_cast<double>(n == y ? n : n + 1);
            out.observe(std::fabs(sm.value()) / envelope_m3(t, yy, MVariant::m), static_cast<double>(n));
            out.observe(std::fabs(sm2.value()) / envelope_m3(t, yy, MVariant::m2), static_cast<double>(n));
        }
    });
    out.pass = out.worst_ratio <= 1.0 + rounding_slack;
    out.note = "ratio |m(t)| / envelope_m3(t, y), both variants";
    return out;
}

// |m_d(y)| <= envelope_m4(d, y) for squarefree d <= d_max and real
// y in (1, y_max].
inline BoundReport check_envelope_m4(u64 d_max, u64 y_max)
{
    detail::require(y_max >= 2, "check_envelope_m4: y_max must be >= 2");
    BoundReport out{"m4", 1, static_cast<double>(y_max)};
    out.bound = 1.0;
    const auto mu = mobius_upto(y_max);
    for (u64 d = 1; d <= d_max; ++d) {
        if (!is_squarefree(d)) continue;
        NeumaierSum s;
        for (u64 n = 1; n <= y_max; ++n) {
            if (mu[n] != 0 && coprime(n, d)) s.add(mu[n] / static_cast<double>(n));
            const double y = static_cast<double>(n == y_max ? n : n + 1);
            out.observe(std::fabs(s.value()) / envelope_m4(d, y), static_cast<double>(d));
        }
    }
    out.pass = out.worst_ratio <= 1.0 + rounding_slack;
    out.note = "ratio |m_d(y)| / envelope_m4(d, y); worst_arg is d";
    out.details["d_max"] = d_max;
    return out;
}

} // namespace dmsum
