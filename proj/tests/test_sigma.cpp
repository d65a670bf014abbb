#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dmsum/sigma.hpp"

using namespace dmsum;

namespace {

// Definition of Sigma(X) as a literal double sum over pairs, exact.
Rational sigma_pairs(u64 X)
{
    Rational s = 0;
    for (u64 a = 1; a <= X; ++a)
        for (u64 b = 1; b <= X; ++b) {
            const int m = mobius(a) * mobius(b);
            if (m != 0) s += Rational(m, static_cast<unsigned long>(a / std::gcd(a, b) * b));
        }
    return s;
}

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("dmsum_test_" + name)).string();
}

} // namespace

TEST(SigmaBruteforce, SmallValues)
{
    EXPECT_EQ(sigma_bruteforce_exact(1), Rational(1));
    EXPECT_EQ(sigma_bruteforce_exact(2), Rational(1, 2));
    EXPECT_EQ(sigma_bruteforce_exact(3), Rational(1, 2));
    EXPECT_DOUBLE_EQ(sigma_bruteforce(2), 0.5);
    for (u64 X = 1; X <= 40; ++X) EXPECT_EQ(sigma_bruteforce_exact(X), sigma_pairs(X)) << X;
}

TEST(SigmaBruteforce, BudgetEnforced)
{
    Limits lim = default_limits();
    lim.quadratic_limit = 100;
    EXPECT_THROW(sigma_bruteforce(101, lim), BudgetExceeded);
    EXPECT_THROW(sigma_bruteforce_exact(101, lim), BudgetExceeded);
}

TEST(SigmaBruteforce, FloatMatchesExact)
{
    const auto pre = sigma_bruteforce_prefix(600);
    for (u64 X : {1ull, 10ull, 97ull, 300ull, 600ull}) EXPECT_NEAR(pre[X], sigma_bruteforce_exact(X).get_d(), 1e-13) << X;
}

TEST(SigmaGstar, SmallValues)
{
    EXPECT_EQ(sigma_via_gstar_identity<Rational>(1), Rational(1));
    EXPECT_EQ(sigma_via_gstar_identity<Rational>(2), Rational(1, 2));
    EXPECT_EQ(sigma_via_gstar_identity<Rational>(4), sigma_bruteforce_exact(4));
    for (u64 X = 1; X <= 150; ++X) EXPECT_EQ(sigma_via_gstar_identity<Rational>(X), sigma_bruteforce_exact(X)) << X;
}

TEST(Landau, Examples)
{
    EXPECT_EQ(landau_coprime_m<Rational>(2, 4), Rational(2, 3));
    EXPECT_EQ(landau_coprime_m<Rational>(6, 2), Rational(1));
    EXPECT_EQ(landau_coprime_m<Rational>(1, 3), Rational(1, 2));  // m(3-) = m(2)
    EXPECT_EQ(landau_coprime_m<Rational>(1, 3.5), Rational(1, 6));
    EXPECT_EQ(landau_coprime_m<Rational>(5, 1), Rational(0));
}

TEST(Landau, MatchesDirectSumExactly)
{
    // d <= 50, squarefree or not; y over integers and half-integers up to 10^3.
    for (u64 d = 1; d <= 50; ++d) {
        for (double y = 0.5; y <= 1000; y += (y < 60 ? 0.5 : 37.25)) {
            ASSERT_EQ(landau_coprime_m<Rational>(d, y), coprime_m_direct<Rational>(d, y)) << d << " " << y;
        }
        ASSERT_EQ(landau_coprime_m<Rational>(d, 1000), coprime_m_direct<Rational>(d, 1000)) << d;
    }
    EXPECT_NEAR(landau_coprime_m<double>(30, 1000), coprime_m_direct<Rational>(30, 1000).get_d(), 1e-14);
}

TEST(DeltaSigma, Examples)
{
    EXPECT_EQ(delta_sigma_exact(2), Rational(-1, 2));
    EXPECT_EQ(delta_sigma_exact(4), Rational(0));
    EXPECT_EQ(delta_sigma_exact(3), Rational(0));
    const auto table = MertensTable::build(1000);
    EXPECT_DOUBLE_EQ(delta_sigma(2, table), -0.5);
    EXPECT_EQ(delta_sigma(4, table), 0.0);
    EXPECT_NEAR(delta_sigma(3, table), 0.0, 1e-16);
    EXPECT_THROW(delta_sigma(1002, table), InvalidArgument);
}

TEST(DeltaSigma, MatchesBruteforceDifferences)
{
    for (u64 d = 2; d <= 120; ++d)
        EXPECT_EQ(delta_sigma_exact(d), sigma_bruteforce_exact(d) - sigma_bruteforce_exact(d - 1)) << d;
}

TEST(SigmaScan, ThreeWayAgreementTo5000)
{
    const u64 X = 5000;
    const auto brute = sigma_bruteforce_prefix(X);
    SigmaScanOptions opt;
    opt.shadow_limit = 2000;
    const auto trace = sigma_scan(X, opt);
    double worst = 0;
    for (u64 d = 1; d <= X; ++d) worst = std::max(worst, std::fabs(trace.at(d) - brute[d]));
    EXPECT_LE(worst, 1e-10);
    for (u64 x : {1ull, 2ull, 17ull, 422ull, 1321ull, 4999ull, 5000ull})
        EXPECT_NEAR(sigma_via_gstar_identity<double>(x), brute[x], 1e-10) << x;
    EXPECT_LT(trace.shadow_drift, 1e-12);
    EXPECT_EQ(trace.final_state.shadow_done, 2000u);
}

TEST(SigmaScan, StepInvariantAndStart)
{
    const auto trace = sigma_scan(3000);
    EXPECT_EQ(trace.at(1), 1.0);
    for (u64 d = 2; d <= 3000; ++d)
        if (mobius(d) == 0) {
            ASSERT_EQ(trace.at(d), trace.at(d - 1)) << d;
        }
}

TEST(SigmaScan, WindowsAndExtrema)
{
    SigmaScanOptions opt;
    opt.windows = {{422, 100000}, {2, 100000}, {1300, 1350}, {1000, 100000}};
    const auto trace = sigma_scan(100000, opt);
    EXPECT_GE(trace.overall.min, 0.0);
    // Sigma(757) = 0.4453092302578... from the exact pair sum.
    EXPECT_EQ(trace.windows[0].argmax, 757u);
    EXPECT_NEAR(trace.windows[0].max, 0.445309230257814, 1e-12);
    EXPECT_LE(trace.windows[1].max, 19.0 / 30.0);
    EXPECT_GT(trace.windows[2].max, 0.44455);
    EXPECT_GE(trace.windows[3].min, 0.437);
    // Window extrema agree with the stored values.
    double mx = -1;
    u64 arg = 0;
    for (u64 d = 422; d <= 100000; ++d)
        if (trace.at(d) > mx) {
            mx = trace.at(d);
            arg = d;
        }
    EXPECT_EQ(trace.windows[0].max, mx);
    EXPECT_EQ(trace.windows[0].argmax, arg);
}

TEST(SigmaScan, ResumeGivesIdenticalResult)
{
    SigmaScanOptions full;
    full.windows = {{422, 20000}};
    const auto a = sigma_scan(20000, full);

    SigmaScanOptions first = full;
    first.checkpoint_every = 7000;
    std::optional<SigmaScanState> saved;
    first.on_checkpoint = [&](const SigmaScanState& s) {
        if (!saved && s.d == 14000) saved = s;
    };
    sigma_scan(20000, first);
    ASSERT_TRUE(saved.has_value());

    const std::string path = temp_path("resume.json");
    save_scan_state(*saved, path);
    SigmaScanOptions second = full;
    second.resume = load_scan_state(path);
    const auto b = sigma_scan(20000, second);
    EXPECT_EQ(b.first, 14001u);
    EXPECT_EQ(b.at(20000), a.at(20000));
    EXPECT_EQ(b.windows[0].max, a.windows[0].max);
    EXPECT_EQ(b.windows[0].argmax, a.windows[0].argmax);
    std::filesystem::remove(path);
}

TEST(SigmaScan, MalformedCheckpoint)
{
    const std::string path = temp_path("bad.json");
    {
        std::ofstream out(path);
        out << "{\"format\": \"dmsum-sigma-scan\", \"version\": 1, \"d\": 5}";
    }
    EXPECT_THROW(load_scan_state(path), FormatError);
    {
        std::ofstream out(path);
        out << "not json";
    }
    EXPECT_THROW(load_scan_state(path), FormatError);
    EXPECT_THROW(load_scan_state(temp_path("missing.json")), FormatError);
    std::filesystem::remove(path);
}

TEST(SigmaScan, ResumeForOtherXMaxRejected)
{
    SigmaScanState s;
    s.X_max = 100;
    s.d = 50;
    SigmaScanOptions opt;
    opt.resume = s;
    EXPECT_THROW(sigma_scan(200, opt), FormatError);
}
