#include <gtest/gtest.h>

#include <cmath>

#include "dmsum/euler.hpp"

using namespace dmsum;

namespace {

TailIntegrand power_law(double a, bool closed)
{
    TailIntegrand F;
    F.f = [a](double t) { return std::pow(t, -a); };
    if (closed) F.closed_form = [a](double P) { return std::pow(P, 1 - a) / (a - 1); };
    F.decay_exponent = a;
    return F;
}

// Direct product over primes in long double, used as an oracle for the
// truncated part of euler_product.
long double direct_product(const std::function<double(double)>& f, u64 cutoff)
{
    long double prod = 1;
    for (u64 p = 2; p <= cutoff; ++p) {
        bool prime = true;
        for (u64 d = 2; d * d <= p; ++d)
            if (p % d == 0) {
                prime = false;
                break;
            }
        if (prime) prod *= 1.0L + f(static_cast<double>(p));
    }
    return prod;
}

} // namespace

TEST(PrimeTail, ClosedFormInverseSquare)
{
    const double P = 1e7;
    const double lg = std::log(P);
    const double expected = (1 + 1.0 / 914) / P + (1.0 / 914) / P + 1 / (5 * P * lg * lg);
    EXPECT_NEAR(prime_tail_bound(power_law(2, true), P, TailMode::strong), expected, 1e-18);
    EXPECT_NEAR(expected, 1.00296e-7, 1e-11);
}

TEST(PrimeTail, WeakModeIsLarger)
{
    const double P = 1e7;
    EXPECT_GT(prime_tail_bound(power_law(2, true), P, TailMode::weak),
              prime_tail_bound(power_law(2, true), P, TailMode::strong));
    EXPECT_NO_THROW(prime_tail_bound(power_law(2, true), 100, TailMode::weak));
}

TEST(PrimeTail, QuadratureMatchesClosedForm)
{
    for (double a : {1.5, 5.0 / 3.0, 2.0}) {
        const double closed = tail_integral(power_law(a, true), 1e7).integral;
        const auto quad = tail_integral(power_law(a, false), 1e7);
        EXPECT_GE(quad.integral, closed * (1 - 1e-12)) << a;
        EXPECT_NEAR(quad.integral / closed, 1.0, 1e-6) << a;
    }
}

TEST(PrimeTail, MonotoneInCutoff)
{
    for (double a : {1.5, 5.0 / 3.0, 2.0}) {
        double prev = HUGE_VAL;
        for (double P = 4e6; P <= 1e9; P *= 3) {
            const double b = prime_tail_bound(power_law(a, false), P, TailMode::strong);
            EXPECT_LT(b, prev) << a << " " << P;
            prev = b;
        }
    }
}

TEST(PrimeTail, ZeroIntegrand)
{
    TailIntegrand F;
    F.f = [](double) { return 0.0; };
    EXPECT_EQ(prime_tail_bound(F, 1e7, TailMode::strong), 0.0);
}

TEST(PrimeTail, Preconditions)
{
    EXPECT_THROW(prime_tail_bound(power_law(2, true), 1e6, TailMode::strong), InvalidArgument);
    EXPECT_THROW(prime_tail_bound(power_law(1, false), 1e7, TailMode::strong), InvalidArgument);
    TailIntegrand growing;
    growing.f = [](double t) { return std::log(t); };
    growing.closed_form = [](double) { return 1.0; };
    EXPECT_THROW(prime_tail_bound(growing, 1e7, TailMode::strong), InvalidArgument);
    TailIntegrand negative;
    negative.f = [](double t) { return -1 / t; };
    EXPECT_THROW(prime_tail_bound(negative, 1e7, TailMode::strong), InvalidArgument);
}

TEST(EulerProduct, ZetaTwoInverse)
{
    EulerProductSpec spec;
    spec.name = "1/zeta(2)";
    spec.cutoff = 1000000;
    spec.local_term = [](double p) { return -1 / (p * p); };
    spec.tail_majorant = [](double) { return 0.0; };
    const auto v = euler_product(spec);
    const double target = 6 / (M_PI * M_PI);
    EXPECT_GE(v.upper(), target);
    EXPECT_LT(v.upper() - target, 1e-6);
}

TEST(EulerProduct, TruncatedPartMatchesDirectProduct)
{
    const auto f = [](double p) { return -2 / (p * p) + 1 / (p * p * p); };
    EulerProductSpec spec;
    spec.cutoff = 20000;
    spec.local_term = f;
    spec.tail_majorant = [](double t) { return 2.0 / (t * t); };
    spec.tail_closed_form = [](double P) { return 2 / (P * std::log(P)); };
    const auto v = euler_product(spec);
    EXPECT_NEAR(v.value, static_cast<double>(direct_product(f, 20000)), 1e-14);
}

TEST(EulerProduct, RejectsNonPositiveFactor)
{
    EulerProductSpec spec;
    spec.cutoff = 100;
    spec.local_term = [](double p) { return p == 3 ? -1.0 : 0.0; };
    EXPECT_THROW(euler_product(spec), InvalidArgument);
}

TEST(Constants, A)
{
    const auto A = constant_A();
    ASSERT_TRUE(A.lower().has_value());
    EXPECT_LE(*A.lower(), 0.4282495106962271);
    EXPECT_GE(A.upper(), 0.4282495106962271);
    EXPECT_LT(A.upper() - *A.lower(), 3e-8);
}

TEST(Constants, Hq1)
{
    const auto k1 = gq_constants(1);
    const auto k2 = gq_constants(2);
    EXPECT_DOUBLE_EQ(k2.Hq1, k1.Hq1 * 4.0 / 5.0);
    EXPECT_DOUBLE_EQ(k1.Hq1, k1.A.value);
    const auto k6 = gq_constants(6);
    EXPECT_DOUBLE_EQ(k6.Hq1, k1.Hq1 * 4.0 / 5.0 * 9.0 / 11.0);
    EXPECT_THROW(gq_constants(4), InvalidArgument);
}

TEST(Constants, Cq)
{
    const double gamma = 0.57721566490153286;
    const auto k1 = gq_constants(1);
    EXPECT_NEAR(k1.cq.value - gamma, 1.46954, 5e-5);
    EXPECT_GT(k1.cq.slack, 0);
    EXPECT_LT(k1.cq.slack, 1e-6);
    for (u64 q : {1ull, 2ull, 6ull, 30ull, 210ull, 2310ull}) {
        const auto k = gq_constants(q);
        EXPECT_NEAR(k.cq.value, k.cq_pre_rewrite, 1e-10) << q;
    }
}

TEST(Aux, SmallSums)
{
    EXPECT_DOUBLE_EQ(aux_sum(AuxFunction::g0_squared, 1), 1.0);
    EXPECT_NEAR(aux_sum(AuxFunction::g0_squared, 2), 1.75, 1e-15);
    const double g13 = g1_at_prime(3);
    EXPECT_NEAR(aux_sum(AuxFunction::g1_squared, 3), 1 + 0.5 * 2.06 * 2.06 + 2.0 / 3 * g13 * g13, 1e-14);
    EXPECT_NEAR(aux_G(AuxFunction::g0_g1, 6), g0(6) * g1(6), 1e-14);
}

TEST(Aux, SumMatchesDirectEvaluation)
{
    for (AuxFunction g : all_aux_functions) {
        long double s = 0;
        for (u64 d = 1; d <= 3000; ++d)
            if (is_squarefree(d)) s += static_cast<long double>(totient(d)) / d * aux_G(g, d);
        EXPECT_NEAR(aux_sum(g, 3000), static_cast<double>(s), 1e-10);
    }
}

TEST(Aux, RatioScan)
{
    for (AuxFunction g : all_aux_functions) {
        const auto r = aux_ratio_scan(g, 100000);
        EXPECT_TRUE(r.pass) << aux_constants(g).name << " " << r.worst_ratio << " at " << r.worst_arg;
    }
}

TEST(Aux, AsymptoticBoundSmallRange)
{
    for (AuxFunction g : all_aux_functions) {
        const auto r = aux_asymptotic_check(g, 100000);
        EXPECT_TRUE(r.pass) << aux_constants(g).name << " " << r.worst_ratio;
    }
}

TEST(Aux, HbarCertified)
{
    // Absolute-value majorant; g0^2 has a_2 = -1/2, which raises its
    // p = 2 factor by (1 + |a_2| 2^(-5/3) + b_2 2^(-7/3)) / (1 + a_2 2^(-5/3) + b_2 2^(-7/3)).
    const double b2 = 1.5;
    const double ratio = (1 + 0.5 * std::pow(2.0, -5.0 / 3) + b2 * std::pow(2.0, -7.0 / 3)) /
                         (1 - 0.5 * std::pow(2.0, -5.0 / 3) + b2 * std::pow(2.0, -7.0 / 3));
    const double signed_expected[] = {72.84, 23.29, 9.1955};
    const double abs_expected[] = {72.84 * ratio, 23.29, 9.1955};
    int i = 0;
    for (AuxFunction g : all_aux_functions) {
        const auto v = aux_Hbar(g);
        const auto s = aux_Hbar(g, default_prime_cutoff, true);
        EXPECT_NEAR(s.upper(), signed_expected[i], 0.002 * signed_expected[i]) << aux_constants(g).name;
        EXPECT_NEAR(v.upper(), abs_expected[i], 0.002 * abs_expected[i]) << aux_constants(g).name;
        EXPECT_GE(v.upper(), s.upper());
        ++i;
    }
    EXPECT_LE(aux_Hbar(AuxFunction::g0_g1).upper(), 23.4);
    EXPECT_LE(aux_Hbar(AuxFunction::g1_squared).upper(), 9.20);
}

TEST(Aux, H1PartialProducts)
{
    const double expected[] = {2.0001835, 1.3355531, 1.0630619};
    int i = 0;
    for (AuxFunction g : all_aux_functions) {
        const auto v = aux_H1(g);
        EXPECT_NEAR(v.value, expected[i], 2e-6) << aux_constants(g).name;
        EXPECT_GE(v.upper(), v.value);
        ++i;
    }
}

TEST(Registry, HasAllConstants)
{
    const auto j = constants_registry();
    EXPECT_TRUE(j.contains("A"));
    EXPECT_EQ(j["H1"].size(), 3u);
    EXPECT_EQ(j["Hbar_2_3"].size(), 3u);
    EXPECT_TRUE(j["c_q"].contains("30"));
}
