#include "prmcc/noise.hpp"
#include "prmcc/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace prmcc;

namespace {

struct Empirical {
    double mean = 0.0, m2 = 0.0, m4 = 0.0, m6 = 0.0;
};

Empirical draw(const NoiseModel& model, std::size_t n, std::uint64_t seed)
{
    RandomStream rng = make_stream(seed, 0, StreamRole::noise);
    NoiseSampler s(model);
    // Kahan-free long double sums are plenty at 1e7 draws.
    long double a = 0, b = 0, c = 0, d = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const long double v = s(rng);
        const long double v2 = v * v;
        a += v;
        b += v2;
        c += v2 * v2;
        d += v2 * v2 * v2;
    }
    const auto k = static_cast<long double>(n);
    return {static_cast<double>(a / k), static_cast<double>(b / k), static_cast<double>(c / k),
            static_cast<double>(d / k)};
}

}  // namespace

TEST(NoiseMoments, Uniform)
{
    const MomentSet m = moments(UniformNoise{0.5});
    EXPECT_NEAR(m.m2, 0.08333333, 1e-8);
    EXPECT_NEAR(m.m4, 0.0125, 1e-15);
    EXPECT_NEAR(m.m6, 0.002232143, 1e-9);
    EXPECT_TRUE(m.consistent());
}

TEST(NoiseMoments, ImpulsiveMixture)
{
    const MomentSet m = moments(MixedGaussianNoise{0.9, 1e-4, 0.1, 100.0});
    EXPECT_NEAR(m.m2, 10.00009, 1e-12);
    EXPECT_NEAR(m.m4, 3000.000000027, 1e-9);
    EXPECT_NEAR(m.m6, 1.5e6 + 1.35e-11, 1e-6);
    EXPECT_TRUE(m.consistent());
}

TEST(NoiseMoments, HeavierMixture)
{
    const MomentSet m = moments(MixedGaussianNoise{0.99, 1e-4, 0.01, 400.0});
    EXPECT_NEAR(m.m2, 4.000099, 1e-12);
    EXPECT_NEAR(m.m4, 4800.0000000297, 1e-8);
    EXPECT_NEAR(m.m6, 9.6e6, 1e-3);
}

TEST(NoiseMoments, GaussianAndDegenerate)
{
    const MomentSet m = moments(GaussianNoise{2.0});
    EXPECT_EQ(m.m2, 2.0);
    EXPECT_EQ(m.m4, 12.0);
    EXPECT_EQ(m.m6, 120.0);
    EXPECT_FALSE(moments(GaussianNoise{0.0}).consistent());
}

TEST(NoiseValidation, RejectsBadModels)
{
    EXPECT_THROW(validate(NoiseModel{GaussianNoise{-1.0}}), std::invalid_argument);
    EXPECT_THROW(validate(NoiseModel{MixedGaussianNoise{0.5, 1.0, 0.4, 1.0}}), std::invalid_argument);
    EXPECT_THROW(validate(NoiseModel{UniformNoise{std::nan("")}}), std::invalid_argument);
    EXPECT_THROW(NoiseSampler(GaussianNoise{-2.0}), std::invalid_argument);
}

TEST(NoiseSampling, DegenerateGaussianIsZero)
{
    RandomStream rng = make_stream(1, 0, StreamRole::noise);
    NoiseSampler s(GaussianNoise{0.0});
    for (int i = 0; i < 1000; ++i) {
        ASSERT_EQ(s(rng), 0.0);
    }
}

TEST(NoiseSampling, UniformMeanWithinClt)
{
    const Empirical e = draw(UniformNoise{0.5}, 1000000, 3);
    EXPECT_LT(std::abs(e.mean), 3.0 * std::sqrt(1.0 / 12.0) / 1e3);
}

TEST(NoiseSampling, MixtureVarianceWithinFivePercent)
{
    const Empirical e = draw(MixedGaussianNoise{0.9, 1e-4, 0.1, 100.0}, 1000000, 4);
    EXPECT_NEAR(e.m2, 10.00009, 0.05 * 10.00009);
}

TEST(NoiseSampling, MomentConsistencyTenMillionDraws)
{
    const std::vector<std::pair<NoiseModel, bool>> models = {
        {GaussianNoise{0.3}, false},
        {UniformNoise{0.5}, false},
        {MixedGaussianNoise{0.9, 1e-4, 0.1, 100.0}, true},
        {MixedGaussianNoise{0.99, 1e-4, 0.01, 400.0}, true},
    };
    std::uint64_t seed = 10;
    for (const auto& [model, heavy] : models) {
        const MomentSet m = moments(model);
        const Empirical e = draw(model, 10000000, seed++);
        EXPECT_NEAR(e.m2, m.m2, 0.05 * m.m2) << noise_kind(model);
        EXPECT_NEAR(e.m4, m.m4, 0.05 * m.m4) << noise_kind(model);
        EXPECT_NEAR(e.m6, m.m6, (heavy ? 0.15 : 0.05) * m.m6) << noise_kind(model);
    }
}

TEST(NoiseSampling, DeterministicPerSeed)
{
    const NoiseModel model = MixedGaussianNoise{};
    RandomStream a = make_stream(42, 7, StreamRole::noise);
    RandomStream b = make_stream(42, 7, StreamRole::noise);
    NoiseSampler sa(model), sb(model);
    for (int i = 0; i < 10000; ++i) {
        ASSERT_EQ(sa(a), sb(b));
    }
}

TEST(InputSource, UnitVarianceAndZero)
{
    RandomStream rng = make_stream(5, 0, StreamRole::input);
    WhiteGaussianSource src(1.0);
    long double s2 = 0;
    for (int i = 0; i < 1000000; ++i) {
        const long double v = src(rng);
        s2 += v * v;
    }
    const double var = static_cast<double>(s2 / 1e6L);
    EXPECT_GE(var, 0.99);
    EXPECT_LE(var, 1.01);

    WhiteGaussianSource zero(0.0);
    for (int i = 0; i < 100; ++i) {
        ASSERT_EQ(zero(rng), 0.0);
    }
    EXPECT_THROW(WhiteGaussianSource(-1.0), std::invalid_argument);
}

TEST(RandomStreams, RepeatableAndDistinct)
{
    RandomStream a = make_stream(9, 3, StreamRole::input);
    RandomStream b = make_stream(9, 3, StreamRole::input);
    RandomStream c = make_stream(9, 3, StreamRole::noise);
    RandomStream d = make_stream(9, 4, StreamRole::input);
    const auto first = a();
    EXPECT_EQ(first, b());
    EXPECT_NE(first, c());
    EXPECT_NE(first, d());
}
