#include "prmcc/combiner.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace prmcc;

namespace {

RecursiveConfig shared()
{
    RecursiveConfig c;
    c.lambda = 0.99;
    c.sigma = 2.0;
    c.delta = 10.0;
    return c;
}

struct Data {
    std::mt19937_64 rng{77};
    std::normal_distribution<double> z{0.0, 1.0};
    Eigen::VectorXd w;

    explicit Data(Eigen::Index n) : w(n)
    {
        for (Eigen::Index i = 0; i < n; ++i) {
            w[i] = (i % 4 == 0) ? z(rng) : 0.0;
        }
    }
    Eigen::VectorXd x()
    {
        Eigen::VectorXd v(w.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v[i] = z(rng);
        }
        return v;
    }
    double d(const Eigen::VectorXd& x, int i) { return w.dot(x) + ((i % 23 == 0) ? 10.0 : 0.05) * z(rng); }
};

}  // namespace

TEST(MixingParameter, Values)
{
    EXPECT_EQ(mixing_parameter(0.0), 0.5);
    EXPECT_NEAR(mixing_parameter(4.0), 0.9820137900, 1e-10);
    EXPECT_NEAR(mixing_parameter(-4.0), 0.0179862100, 1e-10);
}

TEST(UpdateB, NoDriveLeavesB)
{
    CombinerState s = make_combiner_state(2, shared(), 4.0, 1.0, CombinerConfig{});
    s.b = 1.3;
    EXPECT_EQ(update_b(s, 0.7, 0.4, 0.4, mixing_parameter(s.b)), 1.3);
    EXPECT_EQ(update_b(s, 0.0, 0.9, 0.4, mixing_parameter(s.b)), 1.3);
}

TEST(UpdateB, ClampsAtBound)
{
    CombinerState s = make_combiner_state(2, shared(), 4.0, 1.0, CombinerConfig{});
    s.b = 3.99;
    EXPECT_EQ(update_b(s, 1.0, 10.0, 0.0, 0.5), s.params.b_plus);
    s.b = -3.99;
    EXPECT_EQ(update_b(s, -1.0, 10.0, 0.0, 0.5), -s.params.b_plus);
}

TEST(CombinerConfigCheck, RejectsInvalid)
{
    EXPECT_THROW(make_combiner_state(2, shared(), 1.0, 2.0, CombinerConfig{}), std::invalid_argument);
    CombinerConfig c;
    c.beta = 1.0;
    EXPECT_THROW(make_combiner_state(2, shared(), 2.0, 1.0, c), std::invalid_argument);
    c = CombinerConfig{};
    c.gamma = 1.0;
    EXPECT_THROW(make_combiner_state(2, shared(), 2.0, 1.0, c), std::invalid_argument);
}

TEST(CprmccStep, FrozenMixingCombinesAtRhoPlus)
{
    const Eigen::Index n = 8;
    CombinerConfig mix;
    mix.mu_b = 0.0;
    CombinerState s = make_combiner_state(n, shared(), 8.0, 2.0, mix);
    s.b = mix.b_plus;
    const double rp = s.rho_plus();
    Data data(n);
    for (int i = 0; i < 300; ++i) {
        const Eigen::VectorXd x = data.x();
        const CombinerOutput out = cprmcc_step(s, x, data.d(x, i));
        ASSERT_EQ(s.b, mix.b_plus);
        ASSERT_EQ(out.rho, rp);
        ASSERT_EQ(out.w, rp * s.f1.w + (1.0 - rp) * s.f2.w);
    }
}

TEST(CprmccStep, EqualComponentsStayIdentical)
{
    const Eigen::Index n = 6;
    CombinerState s = make_combiner_state(n, shared(), 3.0, 3.0, CombinerConfig{});
    Data data(n);
    for (int i = 0; i < 300; ++i) {
        const Eigen::VectorXd x = data.x();
        const CombinerOutput out = cprmcc_step(s, x, data.d(x, i));
        ASSERT_EQ(out.first.y, out.second.y);
        ASSERT_EQ(s.b, 0.0);
        ASSERT_EQ(s.f1.w, s.f2.w);
        ASSERT_FALSE(out.transferred);
    }
}

TEST(CprmccStep, FullTransferCopiesFastFilter)
{
    const Eigen::Index n = 4;
    CombinerConfig mix;
    mix.beta = 0.0;
    CombinerState s = make_combiner_state(n, shared(), 4.0, 1.0, mix);
    s.f2.w = Eigen::VectorXd::Constant(n, 5.0);  // slow filter far off
    s.b = 3.0;                                    // overall output dominated by the fast filter
    const Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    const CombinerOutput out = cprmcc_step(s, x, 0.1);
    ASSERT_TRUE(out.transferred);
    EXPECT_EQ(s.f2.w, s.f1.w);
    EXPECT_EQ(out.second.e_post, out.first.e_post);
}

TEST(CprmccStep, ZeroOverallErrorNeverTransfers)
{
    CombinerConfig mix;
    mix.beta = 0.0;
    CombinerState s = make_combiner_state(1, shared(), 2.0, 1.0, mix);
    s.f1.w[0] = 1.0;
    s.f2.w[0] = -1.0;  // y1 = 1, y2 = -1, rho = 1/2 -> y = 0 = d
    const CombinerOutput out = cprmcc_step(s, Eigen::VectorXd::Ones(1), 0.0);
    EXPECT_EQ(out.e_prior, 0.0);
    EXPECT_FALSE(out.transferred);
}

TEST(CprmccStep, ClampConvexityAndOutputConsistency)
{
    const Eigen::Index n = 16;
    CombinerState s = make_combiner_state(n, shared(), 64.0, 8.0, CombinerConfig{});
    Data data(n);
    for (int i = 0; i < 2000; ++i) {
        const Eigen::VectorXd x = data.x();
        const double d = data.d(x, i);
        const double y1 = s.f1.w.dot(x);
        const double y2 = s.f2.w.dot(x);
        const double rho_expected = mixing_parameter(s.b);
        const CombinerOutput out = cprmcc_step(s, x, d);
        ASSERT_LE(std::abs(s.b), s.params.b_plus);
        ASSERT_EQ(out.rho, rho_expected);
        ASSERT_GT(out.rho, 0.0);
        ASSERT_LT(out.rho, 1.0);
        ASSERT_NEAR(out.y, out.rho * y1 + (1.0 - out.rho) * y2, 1e-12 * (1.0 + std::abs(out.y)));
        ASSERT_EQ(out.w, out.rho * s.f1.w + (1.0 - out.rho) * s.f2.w);
    }
}
