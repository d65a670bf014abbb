#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "dmsum/sieve.hpp"

using namespace dmsum;

namespace {

// Independent trial-division oracle.
struct Trial {
    int mu;
    u64 phi;
    u64 spf;
};

Trial trial(u64 n)
{
    Trial t{1, n, n == 1 ? u64{1} : u64{0}};
    u64 m = n;
    for (u64 p = 2; p * p <= m; ++p) {
        if (m % p) continue;
        if (t.spf == 0) t.spf = p;
        int e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        t.mu = e > 1 ? 0 : -t.mu;
        t.phi = t.phi / p * (p - 1);
    }
    if (m > 1) {
        if (t.spf == 0) t.spf = m;
        t.mu = -t.mu;
        t.phi = t.phi / m * (m - 1);
    }
    return t;
}

} // namespace

TEST(SieveRange, SmallExamples)
{
    const auto b = sieve_range(1, 10);
    const std::vector<std::int8_t> expected{1, -1, -1, 0, -1, 1, -1, 0, 0, 1};
    EXPECT_EQ(b.mu, expected);
    EXPECT_EQ(sieve_range(1, 1).phi, std::vector<u64>{1});
    EXPECT_EQ(sieve_range(1, 1).spf, std::vector<u64>{1});
    EXPECT_EQ(sieve_range(30, 30).mu, std::vector<std::int8_t>{-1});
}

TEST(SieveRange, MatchesTrialDivisionUpTo1e5)
{
    const u64 N = 100000;
    const auto b = sieve_range(1, N);
    for (u64 n = 1; n <= N; ++n) {
        const auto t = trial(n);
        ASSERT_EQ(b.mu_at(n), t.mu) << n;
        ASSERT_EQ(b.phi_at(n), t.phi) << n;
        ASSERT_EQ(b.spf_at(n), t.spf) << n;
    }
}

TEST(SieveRange, MobiusInversion)
{
    const u64 N = 100000;
    const auto b = sieve_range(1, N);
    std::vector<int> sum(N + 1, 0);
    for (u64 d = 1; d <= N; ++d)
        for (u64 n = d; n <= N; n += d) sum[n] += b.mu_at(d);
    for (u64 n = 1; n <= N; ++n) ASSERT_EQ(sum[n], n == 1 ? 1 : 0) << n;
}

TEST(SieveRange, TotientIsMultiplicative)
{
    const auto b = sieve_range(1, 10000);
    const SegmentedSieve big(u64{100000000});
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<u64> pick(1, 10000);
    int checked = 0;
    while (checked < 2000) {
        const u64 m = pick(rng), n = pick(rng);
        if (std::gcd(m, n) != 1) continue;
        const auto prod = big.block(m * n, m * n);
        ASSERT_EQ(prod.phi[0], b.phi_at(m) * b.phi_at(n));
        ++checked;
    }
}

TEST(SieveRange, SegmentIndependence)
{
    const u64 N = 200000;
    const auto whole = sieve_range(1, N);
    const SegmentedSieve sieve(N);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<u64> pick(1, N);
    for (int trial_no = 0; trial_no < 50; ++trial_no) {
        u64 a = pick(rng), b = pick(rng);
        if (a > b) std::swap(a, b);
        const auto part = sieve.block(a, b);
        const auto mu = sieve.mobius(a, b);
        const auto fac = sieve.factored(a, b);
        for (u64 n = a; n <= b; ++n) {
            ASSERT_EQ(part.mu_at(n), whole.mu_at(n));
            ASSERT_EQ(part.phi_at(n), whole.phi_at(n));
            ASSERT_EQ(part.spf_at(n), whole.spf_at(n));
            ASSERT_EQ(mu[n - a], whole.mu_at(n));
            ASSERT_EQ(fac.mu_at(n), whole.mu_at(n));
        }
    }
}

TEST(SieveRange, FactoredBlockListsDistinctPrimes)
{
    const SegmentedSieve sieve(u64{2000000});
    const auto fac = sieve.factored(1000000, 1010000);
    for (u64 n = fac.lo; n <= fac.hi; ++n) {
        const auto ps = fac.primes_of(n);
        std::vector<u64> got(ps.begin(), ps.end());
        std::sort(got.begin(), got.end());
        ASSERT_EQ(got, distinct_primes(n)) << n;
    }
}

TEST(SieveRange, Errors)
{
    EXPECT_THROW(sieve_range(10, 9), InvalidArgument);
    EXPECT_THROW(sieve_range(0, 9), InvalidArgument);
    Limits small;
    small.max_segment = 100;
    EXPECT_THROW(sieve_range(1, 1000, small), BudgetExceeded);
    EXPECT_NO_THROW(sieve_range(1, 100, small));
}

TEST(Primes, Examples)
{
    EXPECT_TRUE(primes_upto(0).empty());
    EXPECT_TRUE(primes_upto(1).empty());
    EXPECT_EQ(primes_upto(10), (std::vector<u64>{2, 3, 5, 7}));
    EXPECT_EQ(primes_upto(1000000).size(), 78498u);
}

TEST(Primorial, Divisors)
{
    auto sorted = [](std::vector<u64> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    EXPECT_EQ(sorted(primorial_divisors(3)), (std::vector<u64>{1, 2, 3, 6}));
    EXPECT_EQ(primorial_divisors(1), (std::vector<u64>{1}));
    const auto d29 = primorial_divisors(29);
    EXPECT_EQ(d29.size(), 1024u);
    EXPECT_EQ(std::set<u64>(d29.begin(), d29.end()).size(), 1024u);
    for (u64 d : d29) EXPECT_EQ(6469693230ull % d, 0u);
    EXPECT_EQ(sorted(primorial_divisors(10, u64{10})), (std::vector<u64>{1, 2, 3, 5, 6, 7, 10}));
}

TEST(Primorial, Budgets)
{
    EXPECT_EQ(primorial(47).value(), std::optional<u64>(614889782588491410ull));
    EXPECT_FALSE(primorial(53).value().has_value());
    EXPECT_THROW(primorial_divisors(53), BudgetExceeded);  // full product overflows
    EXPECT_NO_THROW(primorial_divisors(53, u64{1000}));
    EXPECT_THROW(primorial_divisors(101, u64{10}), BudgetExceeded);  // pi(101) = 26
    Limits tight;
    tight.max_primorial_primes = 3;
    EXPECT_THROW(primorial_divisors(7, std::nullopt, tight), BudgetExceeded);
    EXPECT_NO_THROW(primorial_divisors(5, std::nullopt, tight));
}

TEST(Smooth, Examples)
{
    EXPECT_EQ(smooth_numbers(1, 100), (std::vector<u64>{1}));
    EXPECT_EQ(smooth_numbers(6, 20), (std::vector<u64>{1, 2, 3, 4, 6, 8, 9, 12, 16, 18}));
    EXPECT_EQ(smooth_numbers(2, 8), (std::vector<u64>{1, 2, 4, 8}));
}

TEST(Smooth, MatchesFilterAndCarriesOmegaPhi)
{
    for (u64 d : {30ull, 42ull, 97ull, 2310ull}) {
        const auto ps = distinct_primes(d);
        std::vector<u64> got;
        for_each_smooth(std::span<const u64>(ps), 5000, [&](u64 k, int omega, u64 phi) {
            got.push_back(k);
            int om = 0;
            for (auto [p, e] : factorize(k)) om += e;
            EXPECT_EQ(omega, om);
            EXPECT_EQ(phi, totient(k));
        });
        std::sort(got.begin(), got.end());
        std::vector<u64> want;
        for (u64 k = 1; k <= 5000; ++k) {
            bool ok = true;
            for (auto [p, e] : factorize(k)) ok = ok && d % p == 0;
            if (ok) want.push_back(k);
        }
        EXPECT_EQ(got, want) << d;
    }
}

TEST(SquarefreeCount, Examples)
{
    EXPECT_EQ(squarefree_count(0), 0u);
    EXPECT_EQ(squarefree_count(10), 7u);
    const auto b = SegmentedSieve(1000000).mobius(1, 1000000);
    const auto oracle = static_cast<u64>(std::count_if(b.begin(), b.end(), [](auto m) { return m != 0; }));
    EXPECT_EQ(oracle, 607926u);
    EXPECT_EQ(squarefree_count(1000000), oracle);
}

TEST(SquarefreeCount, WithinSqrtOfMainTerm)
{
    const u64 N = 1000000;
    const auto mu = mobius_upto(N);
    u64 count = 0;
    for (u64 X = 1; X <= N; ++X) {
        count += mu[X] != 0;
        const double err = std::fabs(static_cast<double>(count) - 6.0 / (std::numbers::pi * std::numbers::pi) * X);
        ASSERT_LE(err, std::sqrt(static_cast<double>(X))) << X;
    }
    for (u64 X : {1ull, 17ull, 1000ull, 65537ull, 999999ull}) {
        u64 c = 0;
        for (u64 n = 1; n <= X; ++n) c += mu[n] != 0;
        EXPECT_EQ(squarefree_count(X), c);
    }
}
