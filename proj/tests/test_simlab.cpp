#include "prmcc/simlab.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace prmcc;
using namespace prmcc::simlab;

namespace {

Eigen::VectorXd sparse8()
{
    Eigen::VectorXd w = Eigen::VectorXd::Zero(8);
    w[0] = 0.7071;
    w[7] = 0.7071;
    return w;
}

Eigen::VectorXd sparse128()
{
    Eigen::VectorXd w = Eigen::VectorXd::Zero(128);
    for (int i : {0, 63, 64, 127}) {
        w[i] = 0.4975;
    }
    for (int i : {1, 62, 65, 126}) {
        w[i] = 0.0498;
    }
    return w;
}

AlgorithmSpec recursive(Algorithm kind, const std::string& label, double sigma, double theta)
{
    AlgorithmSpec s;
    s.kind = kind;
    s.label = label;
    s.recursive.lambda = 0.995;
    s.recursive.delta = 100.0;
    s.recursive.sigma = sigma;
    s.recursive.theta = theta;
    return s;
}

AlgorithmSpec lms(double mu)
{
    AlgorithmSpec s;
    s.kind = Algorithm::lms;
    s.label = "lms";
    s.gradient.mu = mu;
    return s;
}

ExperimentConfig small_config()
{
    ExperimentConfig c;
    c.system = StaticSystem{sparse8()};
    c.noise = UniformNoise{0.5};
    c.algorithms = {recursive(Algorithm::prmcc, "prmcc", 1.0, 16.0), lms(0.01),
                    recursive(Algorithm::rls, "rls", kInfiniteBandwidth, 1.0)};
    c.iterations = 400;
    c.trials = 7;
    c.seed = 99;
    return c;
}

}  // namespace

TEST(MsdInstant, Examples)
{
    EXPECT_EQ(msd_instant(sparse8(), sparse8()), 0.0);
    EXPECT_EQ(msd_instant(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)), 2.0);
    EXPECT_NEAR(msd_instant(sparse8(), Eigen::VectorXd::Zero(8)), 0.99998082, 1e-8);
    EXPECT_THROW(msd_instant(sparse8(), Eigen::VectorXd::Zero(7)), std::invalid_argument);
}

TEST(RunTrial, ExactDataConvergence)
{
    ExperimentConfig c;
    c.system = StaticSystem{sparse8()};
    c.noise = GaussianNoise{0.0};
    AlgorithmSpec rls = recursive(Algorithm::rls, "rls", kInfiniteBandwidth, 1.0);
    rls.recursive.delta = 1e-4;
    c.algorithms = {rls};
    c.iterations = 80;
    const TrialTrace t = run_trial(c, 0, 0);
    EXPECT_LT(t.msd.back(), 1e-10);
}

TEST(RunTrial, Deterministic)
{
    const ExperimentConfig c = small_config();
    for (std::size_t a = 0; a < c.algorithms.size(); ++a) {
        EXPECT_EQ(run_trial(c, a, 3).msd, run_trial(c, a, 3).msd);
    }
    EXPECT_NE(run_trial(c, 0, 3).msd, run_trial(c, 0, 4).msd);
}

TEST(RunTrial, NoExcitationKeepsInitialError)
{
    ExperimentConfig c;
    c.system = StaticSystem{sparse8()};
    c.input_variance = 0.0;
    c.noise = GaussianNoise{0.01};
    AlgorithmSpec p = recursive(Algorithm::prmcc, "prmcc", kInfiniteBandwidth, 1e5);
    p.recursive.lambda = 1.0;
    c.algorithms = {p};
    c.iterations = 200;
    const TrialTrace t = run_trial(c, 0, 0);
    for (double v : t.msd) {
        ASSERT_EQ(v, sparse8().squaredNorm());
    }
}

TEST(RunTrial, FaultCarriesContext)
{
    ExperimentConfig c = small_config();
    c.algorithms = {lms(5.0)};
    c.iterations = 5000;
    try {
        run_trial(c, 0, 2);
        FAIL() << "expected divergence";
    } catch (const trial_fault& e) {
        EXPECT_EQ(e.trial(), 2u);
        EXPECT_GT(e.iteration(), 0u);
        EXPECT_NE(std::string(e.what()).find("trial 2"), std::string::npos);
    }
}

TEST(TrueSystemModel, RandomWalkStepsBeforeFirstSample)
{
    const SystemModel m = RandomWalkSystem{sparse8(), 1e-2};
    TrueSystem sys(m, make_stream(1, 0, StreamRole::system));
    const Eigen::VectorXd first = sys.advance(0);
    EXPECT_GT((first - sparse8()).norm(), 0.0);

    // Increment variance.
    double ss = 0.0;
    Eigen::VectorXd prev = first;
    const int steps = 20000;
    for (int i = 1; i <= steps; ++i) {
        const Eigen::VectorXd& w = sys.advance(static_cast<std::size_t>(i));
        ss += (w - prev).squaredNorm();
        prev = w;
    }
    EXPECT_NEAR(ss / (steps * 8.0), 1e-2, 3e-4);
}

TEST(TrueSystemModel, StagesSwitchAtBoundaries)
{
    StagedSystem s;
    s.taps = 32;
    s.stages = {Stage{0, RandomSparseWeights{4}}, Stage{10, Eigen::VectorXd(Eigen::VectorXd::Ones(32))},
                Stage{20, RandomSparseWeights{8}}};
    const SystemModel m = s;
    TrueSystem a(m, make_stream(5, 1, StreamRole::system));
    TrueSystem b(m, make_stream(5, 1, StreamRole::system));
    TrueSystem other(m, make_stream(5, 2, StreamRole::system));
    for (std::size_t i = 0; i < 30; ++i) {
        const Eigen::VectorXd w = a.advance(i);
        EXPECT_EQ(w, b.advance(i));
        const Eigen::VectorXd o = other.advance(i);
        const auto nz = (w.array() != 0.0).count();
        if (i < 10) {
            EXPECT_EQ(nz, 4);
            EXPECT_NE(w, o);
        } else if (i < 20) {
            EXPECT_EQ(w, Eigen::VectorXd::Ones(32));
        } else {
            EXPECT_EQ(nz, 8);
        }
    }
}

TEST(ExperimentValidation, NamesOffendingField)
{
    ExperimentConfig c = small_config();
    c.trials = 0;
    try {
        validate(c);
        FAIL();
    } catch (const config_error& e) {
        EXPECT_EQ(e.field(), "run.trials");
    }
    c = small_config();
    c.steady_window_fraction = 0.7;
    EXPECT_THROW(validate(c), config_error);
    c = small_config();
    c.noise = MixedGaussianNoise{0.5, 1.0, 0.4, 1.0};
    try {
        validate(c);
        FAIL();
    } catch (const config_error& e) {
        EXPECT_EQ(e.field(), "noise");
    }
    c = small_config();
    c.algorithms[1].label = "prmcc";
    EXPECT_THROW(validate(c), config_error);
    StagedSystem bad;
    bad.taps = 4;
    bad.stages = {Stage{0, RandomSparseWeights{2}}, Stage{0, RandomSparseWeights{2}}};
    c = small_config();
    c.system = bad;
    EXPECT_THROW(validate(c), config_error);
}

TEST(RunEnsemble, SingleTrialEqualsRunTrial)
{
    ExperimentConfig c = small_config();
    c.trials = 1;
    const LearningCurve lc = run_ensemble(c);
    for (std::size_t a = 0; a < c.algorithms.size(); ++a) {
        EXPECT_EQ(lc.algorithms[a].msd, run_trial(c, a, 0).msd);
        EXPECT_EQ(lc.algorithms[a].steady_state_stderr, 0.0);
    }
}

TEST(RunEnsemble, WorkerCountDoesNotChangeOutput)
{
    ExperimentConfig c = small_config();
    c.trials = 45;  // spans two batches
    const LearningCurve serial = run_ensemble(c, 1);
    const LearningCurve parallel = run_ensemble(c, 3);
    for (std::size_t a = 0; a < c.algorithms.size(); ++a) {
        EXPECT_EQ(serial.algorithms[a].msd, parallel.algorithms[a].msd);
        EXPECT_EQ(serial.algorithms[a].steady_state_msd, parallel.algorithms[a].steady_state_msd);
        EXPECT_EQ(serial.algorithms[a].steady_state_stderr, parallel.algorithms[a].steady_state_stderr);
    }
}

TEST(RunEnsemble, SteadyStateIsTrailingWindowMean)
{
    ExperimentConfig c = small_config();
    c.steady_window_fraction = 0.25;
    const LearningCurve lc = run_ensemble(c);
    EXPECT_EQ(lc.steady_window, 100u);
    const auto& m = lc.algorithms[0].msd;
    const double tail = std::accumulate(m.end() - 100, m.end(), 0.0) / 100.0;
    EXPECT_DOUBLE_EQ(lc.algorithms[0].steady_state_msd, tail);
    for (double v : m) {
        ASSERT_GE(v, 0.0);
    }
    EXPECT_DOUBLE_EQ(lc.algorithms[0].steady_state_db(), 10.0 * std::log10(tail));
}

TEST(RunEnsemble, StandardErrorShrinksLikeRootTrials)
{
    ExperimentConfig c;
    c.system = StaticSystem{Eigen::Vector4d(0.5, -0.3, 0.0, 0.2)};
    c.noise = GaussianNoise{0.1};
    c.algorithms = {lms(0.02)};
    c.iterations = 400;
    c.steady_window_fraction = 0.5;

    const int groups = 12;
    std::vector<double> r2, r4;
    for (int g = 0; g < groups; ++g) {
        c.seed = 1000 + static_cast<std::uint64_t>(g);
        c.trials = 40;
        const double s1 = run_ensemble(c).algorithms[0].steady_state_stderr;
        c.trials = 80;
        const double s2 = run_ensemble(c).algorithms[0].steady_state_stderr;
        c.trials = 160;
        const double s4 = run_ensemble(c).algorithms[0].steady_state_stderr;
        r2.push_back(s2 / s1);
        r4.push_back(s4 / s1);
    }
    const auto mean_sd = [](const std::vector<double>& v) {
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) {
            ss += (x - m) * (x - m);
        }
        return std::pair<double, double>{m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
    };
    const auto [m2, sd2] = mean_sd(r2);
    const auto [m4, sd4] = mean_sd(r4);
    const double k = 3.0 / std::sqrt(static_cast<double>(groups));
    EXPECT_NEAR(m2, 1.0 / std::sqrt(2.0), k * sd2 + 0.02);
    EXPECT_NEAR(m4, 0.5, k * sd4 + 0.02);
}

TEST(RunEnsemble, ReportsFaults)
{
    ExperimentConfig c = small_config();
    c.algorithms = {lms(5.0)};
    c.iterations = 3000;
    c.trials = 3;
    try {
        run_ensemble(c);
        FAIL();
    } catch (const ensemble_fault& e) {
        EXPECT_EQ(e.faults().size(), 3u);
    }
}

TEST(RunEnsemble, CombinerRecordsMixing)
{
    ExperimentConfig c = small_config();
    AlgorithmSpec cp = recursive(Algorithm::cprmcc, "cprmcc", 2.0, 1.0);
    cp.theta1 = 32.0;
    cp.theta2 = 4.0;
    c.algorithms = {cp};
    const LearningCurve lc = run_ensemble(c);
    ASSERT_TRUE(lc.algorithms[0].has_rho());
    EXPECT_EQ(lc.algorithms[0].rho.size(), c.iterations);
    EXPECT_LE(lc.algorithms[0].max_abs_b, cp.combiner.b_plus);
    for (double r : lc.algorithms[0].rho) {
        ASSERT_GT(r, 0.0);
        ASSERT_LT(r, 1.0);
    }
}

TEST(RunEnsemble, ProportionateBeatsPlainOnSparseSystemUnderImpulses)
{
    ExperimentConfig c;
    c.system = StaticSystem{sparse128()};
    c.noise = MixedGaussianNoise{0.9, 1e-4, 0.1, 100.0};
    c.algorithms = {recursive(Algorithm::prmcc, "prmcc", 1.7, 64.0), recursive(Algorithm::rmcc, "rmcc", 1.7, 1.0)};
    c.iterations = 2500;
    c.trials = 12;
    c.seed = 5;
    const LearningCurve lc = run_ensemble(c);
    EXPECT_LT(lc.at("prmcc").steady_state_msd, lc.at("rmcc").steady_state_msd);
}

TEST(Sweep, SingletonGridAndFlags)
{
    ExperimentConfig c = small_config();
    c.algorithms = {recursive(Algorithm::prmcc, "prmcc", 1.0, 16.0)};
    c.trials = 3;
    const SweepResult one = sweep(c, SweepParameter::theta, {16.0});
    ASSERT_EQ(one.rows.size(), 1u);
    ASSERT_TRUE(one.rows[0].empirical_msd.has_value());
    ASSERT_TRUE(one.rows[0].theory_msd.has_value());
    EXPECT_TRUE(one.rows[0].flags.empty());
    EXPECT_EQ(one.empirical_argmin, 16.0);

    auto in = *theory_inputs_for(c, c.algorithms[0]);
    EXPECT_DOUBLE_EQ(*one.rows[0].theory_msd, theory::msd_tracking(in).total);

    // Far beyond the stability bound: flagged, not fatal.
    const SweepResult wild = sweep(c, SweepParameter::theta, {16.0, 5000.0});
    ASSERT_EQ(wild.rows.size(), 2u);
    EXPECT_FALSE(wild.rows[1].flags.empty());
    EXPECT_TRUE(wild.rows[0].flags.empty());
}

TEST(Sweep, LambdaGridUsesTrackingTheory)
{
    ExperimentConfig c = small_config();
    c.system = RandomWalkSystem{sparse8(), 1e-6};
    c.algorithms = {recursive(Algorithm::prmcc, "prmcc", 1.0, 16.0)};
    c.trials = 2;
    const SweepResult r = sweep(c, SweepParameter::lambda, {0.99, 0.995});
    ASSERT_TRUE(r.theory_optimum.has_value());
    auto in = *theory_inputs_for(c, c.algorithms[0]);
    EXPECT_DOUBLE_EQ(*r.theory_optimum, theory::optimal_parameters(in).lambda_opt);
    in.lambda = 0.99;
    EXPECT_DOUBLE_EQ(*r.rows[0].theory_msd, theory::msd_tracking(in).total);
}

TEST(TheoryBridge, LeastSquaresMapping)
{
    ExperimentConfig c = small_config();
    const auto in = theory_inputs_for(c, c.algorithms[2]);  // rls
    ASSERT_TRUE(in.has_value());
    EXPECT_NEAR(theory::msd_tracking(*in).total, theory::msd_rls(*in), 1e-15);
    EXPECT_FALSE(theory_inputs_for(c, c.algorithms[1]).has_value());  // lms
}
