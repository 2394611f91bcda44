// Identify an 8-tap sparse system under impulsive noise with PRMCC and RLS,
// printing the squared weight error every 500 samples.

#include <prmcc.hpp>

#include <cstdio>

int main()
{
    Eigen::VectorXd w_true = Eigen::VectorXd::Zero(8);
    w_true[0] = 0.7071;
    w_true[7] = 0.7071;

    prmcc::RecursiveConfig robust;
    robust.lambda = 0.995;
    robust.sigma = 1.0;
    robust.theta = 16.0;

    prmcc::RecursiveConfig plain = robust;
    plain.sigma = prmcc::kInfiniteBandwidth;
    plain.theta = 8.0;
    plain.alpha = -1.0;

    auto prmcc_filter = prmcc::make_filter_state(8, robust);
    auto rls_filter = prmcc::make_filter_state(8, plain);

    auto input_rng = prmcc::make_stream(7, 0, prmcc::StreamRole::input);
    auto noise_rng = prmcc::make_stream(7, 0, prmcc::StreamRole::noise);
    prmcc::WhiteGaussianSource source(1.0);
    prmcc::NoiseSampler noise(prmcc::MixedGaussianNoise{0.95, 1e-3, 0.05, 100.0});
    prmcc::TappedDelayLine line(8);

    std::printf("%6s %14s %14s\n", "n", "PRMCC", "RLS");
    for (int n = 1; n <= 5000; ++n) {
        line.push(source(input_rng));
        const double d = w_true.dot(line.regressor()) + noise(noise_rng);
        prmcc::prmcc_step(prmcc_filter, line.regressor(), d);
        prmcc::rmcc_step(rls_filter, line.regressor(), d);
        if (n % 500 == 0) {
            std::printf("%6d %14.6e %14.6e\n", n, (w_true - prmcc_filter.w).squaredNorm(),
                        (w_true - rls_filter.w).squaredNorm());
        }
    }
}
