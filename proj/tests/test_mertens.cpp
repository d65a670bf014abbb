#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "dmsum/mertens.hpp"

using namespace dmsum;

namespace {

std::string temp_path(const std::string& name)
{
    return (std::string(::testing::TempDir()) + "/" + name);
}

} // namespace

TEST(Mertens, ExactSmallValues)
{
    EXPECT_EQ(mertens_exact(0), Rational(0));
    EXPECT_EQ(mertens_exact(1), Rational(1));
    EXPECT_EQ(mertens_exact(3), Rational(1, 6));
    EXPECT_EQ(mertens_exact(5), Rational(-1, 30));
    EXPECT_EQ(mertens_exact(3, 2), Rational(2, 3));
    EXPECT_EQ(mertens_exact(10, 30), Rational(6, 7));
}

TEST(Mertens, FloatModeAgreesWithExact)
{
    const auto exact = mertens_prefix<Rational>(2000);
    const auto exact6 = mertens_prefix<Rational>(2000, 6);
    for (u64 y : {1ull, 2ull, 7ull, 100ull, 999ull, 2000ull}) {
        EXPECT_NEAR(mertens_m(static_cast<double>(y)), exact[y].get_d(), 1e-15);
        EXPECT_NEAR(mertens_mq(static_cast<double>(y), 6), exact6[y].get_d(), 1e-15);
        EXPECT_EQ(mertens_mq(static_cast<double>(y), 1), mertens_m(static_cast<double>(y)));
    }
    EXPECT_EQ(mertens_m(0.5), 0.0);
    EXPECT_EQ(mertens_m(7.9), mertens_m(7.0));
    EXPECT_EQ(mertens_mq(10.99, 30), mertens_mq(10.0, 30));
}

TEST(MertensTable, SmallTables)
{
    const auto t10 = build_table(10, 6);
    EXPECT_DOUBLE_EQ(t10.residue_sum(10, 1), 6.0 / 7.0);
    EXPECT_DOUBLE_EQ(t10.residue_sum(10, 5), -1.0 / 5.0);
    const auto t1 = build_table(1, 6);
    EXPECT_EQ(t1.residue_sum(1, 1), 1.0);
    EXPECT_EQ(t1.residue_sum(1, 5), 0.0);
    EXPECT_EQ(t1.m(1), 1.0);

    const auto t100 = build_table(100, 6);
    EXPECT_NEAR(t100.residue_sum(100, 1) + t100.residue_sum(100, 5), mertens_exact(100, 6).get_d(), 1e-15);
    EXPECT_NEAR(t100.coprime_sum(100), mertens_exact(100, 6).get_d(), 1e-15);
    EXPECT_DOUBLE_EQ(t100.m(3), 1.0 / 6.0);
}

TEST(MertensTable, StepInvariant)
{
    const auto t = build_table(3000, 6);
    const auto mu = mobius_upto(3000);
    for (u64 u : t.residues()) {
        for (u64 n = 2; n <= 3000; ++n) {
            const double step = n % 6 == u % 6 && mu[n] != 0 ? mu[n] / static_cast<double>(n) : 0.0;
            ASSERT_NEAR(t.residue_sum(n, u), t.residue_sum(n - 1, u) + step, 1e-15);
        }
    }
}

TEST(MertensTable, ReconstructionMatchesDirectSum)
{
    const u64 N = 100000;
    const auto direct = mertens_prefix<double>(N);
    for (u64 modulus : {1ull, 2ull, 6ull, 30ull, 12ull}) {
        const auto t = build_table(N, modulus);
        for (u64 x = 0; x <= N; ++x) ASSERT_NEAR(t.m(x), direct[x], 1e-12) << modulus << " " << x;
    }
}

TEST(MertensTable, StorageShrinksWithModulus)
{
    const auto t = build_table(600000, 6);
    EXPECT_EQ(t.bytes(), 2u * 100000u * sizeof(double));
    Limits lim;
    lim.memory_bytes = 1000;
    EXPECT_THROW(build_table(100000, 6, lim), BudgetExceeded);
    EXPECT_THROW(t.m(600001), InvalidArgument);
}

TEST(MertensTable, SaveLoadRoundTrip)
{
    const auto t = build_table(50000, 30);
    const auto path = temp_path("mtab.bin");
    t.save(path);
    const auto back = MertensTable::load(path);
    EXPECT_EQ(back.limit(), t.limit());
    EXPECT_EQ(back.modulus(), 30u);
    for (u64 x = 0; x <= 50000; x += 7) ASSERT_EQ(back.m(x), t.m(x));

    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.write("XXXX", 4);
    }
    EXPECT_THROW(MertensTable::load(path), FormatError);
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f.write(MertensTable::magic, 8);
    }
    EXPECT_THROW(MertensTable::load(path), FormatError);
    EXPECT_THROW(MertensTable::load(temp_path("does-not-exist.bin")), FormatError);
}

TEST(Envelopes, M1DeskScale)
{
    const auto r = check_envelope_m1(1000000);
    EXPECT_TRUE(r.pass);
    ASSERT_EQ(r.parts.size(), 2u);
    // The supremum sqrt 2 is approached as x -> 2 from the left (m = 1 on [1,2)).
    EXPECT_NEAR(r.parts[0].worst_ratio, std::sqrt(2.0), 1e-15);
    EXPECT_EQ(r.parts[0].worst_arg, 1.0);
    EXPECT_NEAR(r.parts[1].worst_ratio, std::sqrt(3.0), 1e-15);
    const auto again = check_envelope_m1(1000000);
    EXPECT_EQ(to_json(again).dump(), to_json(r).dump());
    EXPECT_LE(std::fabs(mertens_m(1.0)) * 1.0, std::sqrt(2.0));
}

TEST(Envelopes, M2DeskScale)
{
    const auto r = check_envelope_m2(10000000);
    EXPECT_TRUE(r.pass) << to_json(r).dump(2);
}

TEST(Envelopes, M3)
{
    EXPECT_DOUBLE_EQ(envelope_m3(4, 1e6, MVariant::m), std::sqrt(0.5));
    EXPECT_DOUBLE_EQ(envelope_m3(3, 1e6, MVariant::m2), 1.0);
    const double y = 1e12;
    EXPECT_NEAR(envelope_m3(y, y, MVariant::m), std::sqrt(2e-12) + 0.0144 / std::log(1e12), 1e-15);
    EXPECT_THROW(envelope_m3(5, 4, MVariant::m), InvalidArgument);
    EXPECT_TRUE(check_envelope_m3(100000).pass);
    EXPECT_GT(EnvelopeParams::xi, 0.96);
    EXPECT_LT(EnvelopeParams::xi, 0.97);
}

TEST(Envelopes, M4Functions)
{
    EXPECT_NEAR(g0(2), 1.224744871391589, 1e-15);
    EXPECT_NEAR(g0(3), std::sqrt(3.0) / (std::sqrt(3.0) - 1), 1e-15);
    EXPECT_NEAR(g0(3), 2.3660254037844, 1e-12);
    EXPECT_EQ(g1(1), 1.0);
    EXPECT_EQ(g1(2), 2.06);
    EXPECT_NEAR(g0(30), g0(2) * g0(3) * g0(5), 1e-13);
    EXPECT_THROW(g0(12), InvalidArgument);
    EXPECT_THROW(envelope_m4(4, 10.0), InvalidArgument);
    EXPECT_NEAR(envelope_m4(1, 2.0), 1.0, 1e-15);
}

TEST(Envelopes, M4DeskScale)
{
    const auto r = check_envelope_m4(100, 10000);
    EXPECT_TRUE(r.pass) << to_json(r).dump(2);
    EXPECT_LE(r.worst_ratio, 1.0 + rounding_slack);
}
