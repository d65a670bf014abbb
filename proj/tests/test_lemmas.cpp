#include <gtest/gtest.h>

#include <set>

#include "dmsum/lemmas.hpp"

using namespace dmsum;

TEST(Registry, NamesAreUniqueAndComplete)
{
    std::set<std::string> names;
    for (const auto& t : lemma_registry()) EXPECT_TRUE(names.insert(t.name).second) << t.name;
    for (const char* n : {"m1", "m2", "m3", "m4", "spe", "aux1", "aux2", "aux3", "le1", "le2", "tail", "auxmajorstar2",
                          "convol0", "moebius-square", "init", "keyb", "getgstarq", "convol", "majorstar1",
                          "majorstar2", "major1starter", "landau", "direct"})
        EXPECT_TRUE(names.count(n)) << n;
    EXPECT_THROW(find_lemma("nope"), InvalidArgument);
}

TEST(Registry, SmallRuns)
{
    const Limits& l = default_limits();
    EXPECT_TRUE(find_lemma("m1").run(100000, l).pass);
    EXPECT_TRUE(find_lemma("aux1").run(10000, l).pass);
    EXPECT_EQ(find_lemma("aux1").run(10000, l).parts[0].worst_arg, 42.0);
    EXPECT_TRUE(find_lemma("convol0").run(2000, l).pass);
    const auto c = find_lemma("convol").run(2000, l);
    EXPECT_TRUE(c.pass);
    EXPECT_EQ(c.parts.size(), 6u);
    const auto m1 = find_lemma("majorstar1").run(10000, l);
    EXPECT_TRUE(m1.pass);
    for (const auto& p : m1.parts) EXPECT_EQ(p.lemma.rfind("majorstar1", 0), 0u);
    const auto st = find_lemma("major1starter").run(10000, l);
    EXPECT_TRUE(st.pass);
    EXPECT_EQ(st.parts.size(), 6u);
}

TEST(Landau, RegistryCheckExact)
{
    const auto r = landau_check(50, 300);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.details["mismatches"], 0u);
}

TEST(Spe, BracketAndQuadrature)
{
    const auto r = spe_check(1000000);
    EXPECT_TRUE(r.pass) << to_json(r).dump(2);
    EXPECT_LT(r.parts[0].details["upper"].get<double>() - r.parts[0].details["lower"].get<double>(), 1e-6);
}

TEST(Direct, DeskScan)
{
    const auto r = direct_lemma_check(20000);
    ASSERT_EQ(r.parts.size(), 5u);
    EXPECT_TRUE(r.parts[0].pass);
    EXPECT_TRUE(r.parts[1].pass);
    // Sigma(757) = 0.44531 exceeds 0.445.
    EXPECT_FALSE(r.parts[2].pass);
    EXPECT_EQ(r.parts[2].worst_arg, 757.0);
    EXPECT_TRUE(r.parts[3].pass);
    EXPECT_TRUE(r.parts[4].pass);
    EXPECT_THROW(direct_lemma_check(1000), InvalidArgument);
}
