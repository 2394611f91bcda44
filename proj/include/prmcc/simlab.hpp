#pragma once

// Monte-Carlo system-identification experiments: true-system models, a
// per-trial runner and an ensemble driver whose output is independent of the
// worker count.

#include "prmcc/combiner.hpp"
#include "prmcc/errors.hpp"
#include "prmcc/gradient_filter.hpp"
#include "prmcc/noise.hpp"
#include "prmcc/recursive_filter.hpp"
#include "prmcc/regressor.hpp"
#include "prmcc/rng.hpp"
#include "prmcc/theory.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace prmcc::simlab {

// ---------------------------------------------------------------------------
// True systems

struct StaticSystem {
    Eigen::VectorXd w;
};

/// w(n) = w(n-1) + q(n), q ~ N(0, sigma_q2 I). The step is applied before d(n) is formed.
struct RandomWalkSystem {
    Eigen::VectorXd w0;
    double sigma_q2 = 0.0;
};

/// Stage weights drawn per trial: `nonzeros` distinct random positions holding N(0, 1) values.
struct RandomSparseWeights {
    std::size_t nonzeros = 0;
};

struct Stage {
    std::size_t start = 0;  ///< zero-based iteration index at which the stage begins
    std::variant<Eigen::VectorXd, RandomSparseWeights> weights;
};

struct StagedSystem {
    std::size_t taps = 0;
    std::vector<Stage> stages;
};

using SystemModel = std::variant<StaticSystem, RandomWalkSystem, StagedSystem>;

inline std::size_t taps(const SystemModel& model)
{
    return std::visit(
        [](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, StaticSystem>) {
                return static_cast<std::size_t>(m.w.size());
            } else if constexpr (std::is_same_v<T, RandomWalkSystem>) {
                return static_cast<std::size_t>(m.w0.size());
            } else {
                return m.taps;
            }
        },
        model);
}

/// Weights the theory module should use, if the system fixes them in advance.
inline std::optional<Eigen::VectorXd> nominal_weights(const SystemModel& model)
{
    if (const auto* s = std::get_if<StaticSystem>(&model)) {
        return s->w;
    }
    if (const auto* r = std::get_if<RandomWalkSystem>(&model)) {
        return r->w0;
    }
    const auto& staged = std::get<StagedSystem>(model);
    if (!staged.stages.empty()) {
        if (const auto* w = std::get_if<Eigen::VectorXd>(&staged.stages.front().weights)) {
            return *w;
        }
    }
    return std::nullopt;
}

inline double random_walk_variance(const SystemModel& model)
{
    if (const auto* r = std::get_if<RandomWalkSystem>(&model)) {
        return r->sigma_q2;
    }
    return 0.0;
}

/// Per-trial evolution of the true weights.
class TrueSystem {
public:
    TrueSystem(const SystemModel& model, RandomStream rng) : model_(&model), rng_(std::move(rng))
    {
        const auto n = static_cast<Eigen::Index>(simlab::taps(model));
        w_ = Eigen::VectorXd::Zero(n);
        if (const auto* s = std::get_if<StaticSystem>(model_)) {
            w_ = s->w;
        } else if (const auto* r = std::get_if<RandomWalkSystem>(model_)) {
            w_ = r->w0;
            step_ = std::sqrt(r->sigma_q2);
        }
    }

    /// Weights in force at zero-based iteration `i`. Must be called with i = 0, 1, 2, ...
    const Eigen::VectorXd& advance(std::size_t i)
    {
        if (std::holds_alternative<RandomWalkSystem>(*model_)) {
            for (Eigen::Index k = 0; k < w_.size(); ++k) {
                w_[k] += step_ * normal_(rng_);
            }
        } else if (const auto* staged = std::get_if<StagedSystem>(model_)) {
            while (next_stage_ < staged->stages.size() && staged->stages[next_stage_].start <= i) {
                enter(staged->stages[next_stage_]);
                ++next_stage_;
            }
        }
        return w_;
    }

    const Eigen::VectorXd& weights() const noexcept { return w_; }

private:
    void enter(const Stage& stage)
    {
        if (const auto* w = std::get_if<Eigen::VectorXd>(&stage.weights)) {
            w_ = *w;
            return;
        }
        const std::size_t k = std::get<RandomSparseWeights>(stage.weights).nonzeros;
        std::vector<Eigen::Index> positions(static_cast<std::size_t>(w_.size()));
        std::iota(positions.begin(), positions.end(), Eigen::Index{0});
        std::shuffle(positions.begin(), positions.end(), rng_);
        w_.setZero();
        for (std::size_t j = 0; j < k; ++j) {
            w_[positions[j]] = normal_(rng_);
        }
    }

    const SystemModel* model_;
    RandomStream rng_;
    Eigen::VectorXd w_;
    double step_ = 0.0;
    std::size_t next_stage_ = 0;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// ---------------------------------------------------------------------------
// Algorithms

enum class Algorithm { lms, mcc, rls, rmcc, prls, prmcc, iplms, ipmcc, cprmcc };

inline const char* to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::lms: return "lms";
    case Algorithm::mcc: return "mcc";
    case Algorithm::rls: return "rls";
    case Algorithm::rmcc: return "rmcc";
    case Algorithm::prls: return "prls";
    case Algorithm::prmcc: return "prmcc";
    case Algorithm::iplms: return "iplms";
    case Algorithm::ipmcc: return "ipmcc";
    case Algorithm::cprmcc: return "cprmcc";
    }
    return "?";
}

inline std::optional<Algorithm> parse_algorithm(const std::string& name)
{
    for (Algorithm a : {Algorithm::lms, Algorithm::mcc, Algorithm::rls, Algorithm::rmcc, Algorithm::prls,
                        Algorithm::prmcc, Algorithm::iplms, Algorithm::ipmcc, Algorithm::cprmcc}) {
        if (name == to_string(a)) {
            return a;
        }
    }
    return std::nullopt;
}

inline bool is_recursive(Algorithm a)
{
    return a == Algorithm::rls || a == Algorithm::rmcc || a == Algorithm::prls || a == Algorithm::prmcc ||
           a == Algorithm::cprmcc;
}

struct AlgorithmSpec {
    std::string label;
    Algorithm kind = Algorithm::prmcc;
    RecursiveConfig recursive;  ///< rls, rmcc, prls, prmcc; shared part of cprmcc
    GradientConfig gradient;    ///< lms, mcc, iplms, ipmcc
    double theta1 = 64.0;       ///< cprmcc
    double theta2 = 8.0;        ///< cprmcc
    CombinerConfig combiner;    ///< cprmcc

    /// Effective recursive parameters with the least-squares limits pinned.
    RecursiveConfig effective_recursive() const
    {
        RecursiveConfig c = recursive;
        if (kind == Algorithm::rls || kind == Algorithm::prls) {
            c.sigma = kInfiniteBandwidth;
        }
        return c;
    }

    GradientConfig effective_gradient() const
    {
        GradientConfig c = gradient;
        if (kind == Algorithm::lms || kind == Algorithm::iplms) {
            c.sigma = kInfiniteBandwidth;
        }
        return c;
    }
};

/// Any of the supported filters behind one stepping interface.
class AdaptiveFilter {
public:
    AdaptiveFilter(const AlgorithmSpec& spec, std::size_t taps) : kind_(spec.kind)
    {
        switch (kind_) {
        case Algorithm::rls:
        case Algorithm::rmcc:
        case Algorithm::prls:
        case Algorithm::prmcc:
            state_ = make_filter_state(taps, spec.effective_recursive());
            break;
        case Algorithm::lms:
        case Algorithm::mcc:
        case Algorithm::iplms:
        case Algorithm::ipmcc:
            state_ = make_gradient_state(taps, spec.effective_gradient());
            break;
        case Algorithm::cprmcc:
            state_ = make_combiner_state(taps, spec.effective_recursive(), spec.theta1, spec.theta2,
                                         spec.combiner);
            combined_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(taps));
            break;
        }
    }

    void step(const Regressor& x, double d)
    {
        switch (kind_) {
        case Algorithm::rls:
        case Algorithm::rmcc:
            rmcc_step(std::get<FilterState>(state_), x, d);
            break;
        case Algorithm::prls:
        case Algorithm::prmcc:
            prmcc_step(std::get<FilterState>(state_), x, d);
            break;
        case Algorithm::lms:
        case Algorithm::mcc:
            mcc_step(std::get<GradientState>(state_), x, d);
            break;
        case Algorithm::iplms:
        case Algorithm::ipmcc:
            ipmcc_step(std::get<GradientState>(state_), x, d);
            break;
        case Algorithm::cprmcc: {
            auto& c = std::get<CombinerState>(state_);
            const CombinerOutput out = cprmcc_step(c, x, d);
            rho_ = out.rho;
            combined_ = out.w;
            break;
        }
        }
    }

    /// Current estimate of the true weights (the combined vector for cprmcc).
    const Eigen::VectorXd& weights() const
    {
        if (const auto* s = std::get_if<FilterState>(&state_)) {
            return s->w;
        }
        if (const auto* g = std::get_if<GradientState>(&state_)) {
            return g->w;
        }
        return combined_;
    }

    bool is_combiner() const noexcept { return kind_ == Algorithm::cprmcc; }
    double rho() const noexcept { return rho_; }
    double b() const
    {
        const auto* c = std::get_if<CombinerState>(&state_);
        return c ? c->b : 0.0;
    }

private:
    Algorithm kind_;
    std::variant<FilterState, GradientState, CombinerState> state_;
    Eigen::VectorXd combined_;
    double rho_ = 0.5;
};

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentConfig {
    SystemModel system = StaticSystem{};
    double input_variance = 1.0;
    NoiseModel noise = GaussianNoise{};
    std::vector<AlgorithmSpec> algorithms;
    std::size_t iterations = 1000;
    std::size_t trials = 1;
    std::uint64_t seed = 1;
    double steady_window_fraction = 0.1;
};

inline void validate(const ExperimentConfig& c)
{
    const std::size_t n = taps(c.system);
    if (n == 0) {
        throw config_error("system", "system must have at least one tap");
    }
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, StaticSystem>) {
                if (!m.w.allFinite()) {
                    throw config_error("system.weights", "weights must be finite");
                }
            } else if constexpr (std::is_same_v<T, RandomWalkSystem>) {
                if (!m.w0.allFinite()) {
                    throw config_error("system.weights", "weights must be finite");
                }
                if (!(m.sigma_q2 >= 0.0) || !std::isfinite(m.sigma_q2)) {
                    throw config_error("system.sigma_q2", "must be non-negative and finite");
                }
            } else {
                if (m.stages.empty()) {
                    throw config_error("system.stages", "at least one stage is required");
                }
                if (m.stages.front().start != 0) {
                    throw config_error("system.stages", "first stage must start at iteration 0");
                }
                for (std::size_t s = 0; s < m.stages.size(); ++s) {
                    const std::string field = "system.stages[" + std::to_string(s) + "]";
                    if (s > 0 && !(m.stages[s].start > m.stages[s - 1].start)) {
                        throw config_error(field + ".start", "stage starts must be strictly increasing");
                    }
                    if (const auto* w = std::get_if<Eigen::VectorXd>(&m.stages[s].weights)) {
                        if (static_cast<std::size_t>(w->size()) != m.taps || !w->allFinite()) {
                            throw config_error(field + ".weights", "must hold `taps` finite values");
                        }
                    } else if (std::get<RandomSparseWeights>(m.stages[s].weights).nonzeros > m.taps) {
                        throw config_error(field + ".nonzeros", "cannot exceed the number of taps");
                    }
                }
            }
        },
        c.system);
    if (!(c.input_variance >= 0.0) || !std::isfinite(c.input_variance)) {
        throw config_error("input.variance", "must be non-negative and finite");
    }
    try {
        validate(c.noise);
    } catch (const std::invalid_argument& e) {
        throw config_error("noise", e.what());
    }
    if (c.algorithms.empty()) {
        throw config_error("algorithms", "at least one algorithm is required");
    }
    for (std::size_t a = 0; a < c.algorithms.size(); ++a) {
        const std::string field = "algorithms[" + std::to_string(a) + "]";
        const auto& spec = c.algorithms[a];
        if (spec.label.empty()) {
            throw config_error(field + ".label", "label must not be empty");
        }
        for (std::size_t b = 0; b < a; ++b) {
            if (c.algorithms[b].label == spec.label) {
                throw config_error(field + ".label", "duplicate label '" + spec.label + "'");
            }
        }
        try {
            AdaptiveFilter probe(spec, n);
        } catch (const std::invalid_argument& e) {
            throw config_error(field, e.what());
        }
    }
    if (c.iterations < 1) {
        throw config_error("run.iterations", "must be at least 1");
    }
    if (c.trials < 1) {
        throw config_error("run.trials", "must be at least 1");
    }
    if (!(c.steady_window_fraction > 0.0 && c.steady_window_fraction <= 0.5)) {
        throw config_error("run.steady_window_fraction", "must lie in (0, 0.5]");
    }
}

/// ||w_true - w_est||_2^2.
inline double msd_instant(const Eigen::VectorXd& w_true, const Eigen::VectorXd& w_est)
{
    if (w_true.size() != w_est.size()) {
        throw std::invalid_argument("msd_instant: length mismatch");
    }
    return (w_true - w_est).squaredNorm();
}

/// Fault raised by a trial, annotated with where it happened.
class trial_fault : public numerical_fault {
public:
    trial_fault(std::size_t trial, std::size_t iteration, const std::string& label, const std::string& what)
        : numerical_fault("trial " + std::to_string(trial) + ", iteration " + std::to_string(iteration) +
                          ", algorithm '" + label + "': " + what),
          trial_(trial),
          iteration_(iteration)
    {
    }

    std::size_t trial() const noexcept { return trial_; }
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t trial_;
    std::size_t iteration_;
};

struct TrialTrace {
    std::vector<double> msd;  ///< per iteration
    std::vector<double> rho;  ///< per iteration, combiners only
    double max_abs_b = 0.0;   ///< combiners only
};

inline std::size_t steady_window(const ExperimentConfig& c)
{
    const auto w = static_cast<std::size_t>(
        std::ceil(c.steady_window_fraction * static_cast<double>(c.iterations) - 1e-9));
    return std::clamp<std::size_t>(w, 1, c.iterations);
}

/// Runs one algorithm over one trial. Input, noise and system streams depend
/// only on (seed, trial), so every algorithm of a config sees the same data.
inline TrialTrace run_trial(const ExperimentConfig& config, std::size_t algorithm, std::size_t trial)
{
    const AlgorithmSpec& spec = config.algorithms.at(algorithm);
    const std::size_t n = taps(config.system);

    RandomStream input_rng = make_stream(config.seed, trial, StreamRole::input);
    RandomStream noise_rng = make_stream(config.seed, trial, StreamRole::noise);
    TrueSystem system(config.system, make_stream(config.seed, trial, StreamRole::system));
    WhiteGaussianSource source(config.input_variance);
    NoiseSampler noise(config.noise);
    TappedDelayLine line(n);
    AdaptiveFilter filter(spec, n);

    TrialTrace trace;
    trace.msd.resize(config.iterations);
    if (filter.is_combiner()) {
        trace.rho.resize(config.iterations);
    }
    for (std::size_t i = 0; i < config.iterations; ++i) {
        line.push(source(input_rng));
        const Eigen::VectorXd& w = system.advance(i);
        const double d = w.dot(line.regressor()) + noise(noise_rng);
        try {
            filter.step(line.regressor(), d);
        } catch (const numerical_fault& e) {
            throw trial_fault(trial, i + 1, spec.label, e.what());
        }
        trace.msd[i] = msd_instant(w, filter.weights());
        if (filter.is_combiner()) {
            trace.rho[i] = filter.rho();
            trace.max_abs_b = std::max(trace.max_abs_b, std::abs(filter.b()));
        }
    }
    return trace;
}

struct AlgorithmCurve {
    std::string label;
    Algorithm kind = Algorithm::prmcc;
    std::vector<double> msd;  ///< ensemble mean per iteration, linear
    std::vector<double> rho;  ///< ensemble mean per iteration, combiners only
    double steady_state_msd = 0.0;
    double steady_state_stderr = 0.0;  ///< across-trial standard error of the window mean
    double max_abs_b = 0.0;            ///< over all trials and iterations, combiners only

    bool has_rho() const noexcept { return !rho.empty(); }
    double steady_state_db() const { return theory::to_db(steady_state_msd); }
};

struct LearningCurve {
    std::size_t iterations = 0;
    std::size_t trials = 0;
    std::size_t steady_window = 0;
    std::vector<AlgorithmCurve> algorithms;

    const AlgorithmCurve& at(const std::string& label) const
    {
        for (const auto& a : algorithms) {
            if (a.label == label) {
                return a;
            }
        }
        throw std::out_of_range("no algorithm labelled '" + label + "'");
    }
};

/// Clipped dB: values below 1e-30 map to -300 dB.
inline double to_db(double linear) { return theory::to_db(linear); }

/// Raised when any trial of an ensemble faulted; lists every fault.
class ensemble_fault : public numerical_fault {
public:
    explicit ensemble_fault(std::vector<std::string> faults)
        : numerical_fault(join(faults)), faults_(std::move(faults))
    {
    }

    const std::vector<std::string>& faults() const noexcept { return faults_; }

private:
    static std::string join(const std::vector<std::string>& f)
    {
        std::ostringstream os;
        os << f.size() << " trial fault(s); first: " << (f.empty() ? std::string() : f.front());
        return os.str();
    }

    std::vector<std::string> faults_;
};

/// Ensemble average of run_trial over all trials and algorithms.
///
/// Trials are computed concurrently in fixed-size batches and summed in
/// ascending trial order, so the result is bit-identical for any worker count.
inline LearningCurve run_ensemble(const ExperimentConfig& config, unsigned workers = 1)
{
    validate(config);
    workers = std::max(1u, workers);
    constexpr std::size_t kBatch = 32;
    const std::size_t algos = config.algorithms.size();
    const std::size_t window = steady_window(config);

    LearningCurve out;
    out.iterations = config.iterations;
    out.trials = config.trials;
    out.steady_window = window;
    out.algorithms.resize(algos);
    std::vector<std::vector<double>> trial_means(algos);
    for (std::size_t a = 0; a < algos; ++a) {
        auto& curve = out.algorithms[a];
        curve.label = config.algorithms[a].label;
        curve.kind = config.algorithms[a].kind;
        curve.msd.assign(config.iterations, 0.0);
        if (config.algorithms[a].kind == Algorithm::cprmcc) {
            curve.rho.assign(config.iterations, 0.0);
        }
        trial_means[a].reserve(config.trials);
    }

    std::vector<std::string> faults;
    for (std::size_t first = 0; first < config.trials; first += kBatch) {
        const std::size_t count = std::min(kBatch, config.trials - first);
        const std::size_t tasks = count * algos;
        std::vector<std::optional<TrialTrace>> traces(tasks);
        std::vector<std::string> errors(tasks);
        std::atomic<std::size_t> next{0};
        const auto work = [&] {
            for (std::size_t t = next++; t < tasks; t = next++) {
                try {
                    traces[t] = run_trial(config, t % algos, first + t / algos);
                } catch (const std::exception& e) {
                    errors[t] = e.what();
                }
            }
        };
        const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(workers, tasks));
        if (threads <= 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(threads);
            for (unsigned k = 0; k < threads; ++k) {
                pool.emplace_back(work);
            }
            for (auto& th : pool) {
                th.join();
            }
        }
        for (std::size_t t = 0; t < tasks; ++t) {
            if (!traces[t]) {
                faults.push_back(errors[t]);
                continue;
            }
            auto& curve = out.algorithms[t % algos];
            const TrialTrace& tr = *traces[t];
            for (std::size_t i = 0; i < config.iterations; ++i) {
                curve.msd[i] += tr.msd[i];
            }
            for (std::size_t i = 0; i < tr.rho.size(); ++i) {
                curve.rho[i] += tr.rho[i];
            }
            curve.max_abs_b = std::max(curve.max_abs_b, tr.max_abs_b);
            double tail = 0.0;
            for (std::size_t i = config.iterations - window; i < config.iterations; ++i) {
                tail += tr.msd[i];
            }
            trial_means[t % algos].push_back(tail / static_cast<double>(window));
        }
    }
    if (!faults.empty()) {
        throw ensemble_fault(std::move(faults));
    }

    const auto trials = static_cast<double>(config.trials);
    for (std::size_t a = 0; a < algos; ++a) {
        auto& curve = out.algorithms[a];
        for (double& v : curve.msd) {
            v /= trials;
        }
        for (double& v : curve.rho) {
            v /= trials;
        }
        double tail = 0.0;
        for (std::size_t i = config.iterations - window; i < config.iterations; ++i) {
            tail += curve.msd[i];
        }
        curve.steady_state_msd = tail / static_cast<double>(window);
        if (config.trials > 1) {
            const auto& m = trial_means[a];
            const double mean = std::accumulate(m.begin(), m.end(), 0.0) / trials;
            double ss = 0.0;
            for (double v : m) {
                ss += (v - mean) * (v - mean);
            }
            curve.steady_state_stderr = std::sqrt(ss / (trials - 1.0)) / std::sqrt(trials);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Theory bridge and sweeps

/// Theory inputs matching one algorithm of a config; nullopt when the system
/// weights are random or the algorithm has no closed form (gradient filters).
inline std::optional<theory::TheoryInputs> theory_inputs_for(const ExperimentConfig& config,
                                                             const AlgorithmSpec& spec)
{
    const auto w = nominal_weights(config.system);
    if (!w || !is_recursive(spec.kind)) {
        return std::nullopt;
    }
    theory::TheoryInputs in;
    in.w_true = *w;
    const RecursiveConfig r = spec.effective_recursive();
    in.lambda = r.lambda;
    in.sigma = r.sigma;
    in.theta = r.theta;
    in.alpha = r.alpha;
    if (spec.kind == Algorithm::rls || spec.kind == Algorithm::rmcc) {
        // G = I: uniform profile with trace N.
        in.alpha = -1.0;
        in.theta = static_cast<double>(w->size());
    } else if (spec.kind == Algorithm::cprmcc) {
        in.theta = spec.theta1;
    }
    in.sigma_x2 = config.input_variance;
    in.moments = moments(config.noise);
    in.sigma_q2 = random_walk_variance(config.system);
    return in;
}

enum class SweepParameter { theta, lambda };

inline const char* to_string(SweepParameter p) { return p == SweepParameter::theta ? "theta" : "lambda"; }

struct SweepRow {
    double value = 0.0;
    std::optional<double> empirical_msd;
    double empirical_stderr = 0.0;
    std::optional<double> theory_msd;
    std::vector<std::string> flags;  ///< invalid-regime notes; empty when clean
};

struct SweepResult {
    SweepParameter parameter = SweepParameter::theta;
    std::string label;
    std::vector<SweepRow> rows;
    std::optional<double> empirical_argmin;
    std::optional<double> theory_grid_argmin;
    std::optional<double> theory_optimum;  ///< theta_opt or lambda_opt
    std::vector<std::string> warnings;
};

/// One ensemble per grid value of `parameter` for the algorithm labelled
/// `label` (first recursive one when empty). Grid points that fault or leave
/// the valid regime are flagged, not fatal.
inline SweepResult sweep(const ExperimentConfig& config, SweepParameter parameter, const std::vector<double>& grid,
                         const std::string& label = {}, unsigned workers = 1)
{
    validate(config);
    if (grid.empty()) {
        throw config_error("sweep.grid", "grid must not be empty");
    }
    const AlgorithmSpec* chosen = nullptr;
    for (const auto& spec : config.algorithms) {
        if (label.empty() ? is_recursive(spec.kind) && spec.kind != Algorithm::cprmcc : spec.label == label) {
            chosen = &spec;
            break;
        }
    }
    if (chosen == nullptr) {
        throw config_error("sweep.algorithm", label.empty() ? "no single recursive algorithm to sweep"
                                                            : "no algorithm labelled '" + label + "'");
    }
    if (chosen->kind == Algorithm::cprmcc || !is_recursive(chosen->kind)) {
        throw config_error("sweep.algorithm", "sweeps support rls, rmcc, prls and prmcc");
    }

    SweepResult out;
    out.parameter = parameter;
    out.label = chosen->label;
    double best_emp = std::numeric_limits<double>::infinity();
    double best_th = std::numeric_limits<double>::infinity();

    for (double value : grid) {
        SweepRow row;
        row.value = value;
        ExperimentConfig point = config;
        AlgorithmSpec spec = *chosen;
        (parameter == SweepParameter::theta ? spec.recursive.theta : spec.recursive.lambda) = value;
        point.algorithms = {spec};

        if (auto in = theory_inputs_for(point, spec)) {
            try {
                const double bound = theory::stability_bound_theta(*in).value;
                if (!(in->theta < bound)) {
                    row.flags.push_back("beyond stability bound (" + std::to_string(bound) + ")");
                }
            } catch (const std::exception& e) {
                row.flags.push_back(std::string("stability bound unavailable: ") + e.what());
            }
            try {
                const auto t = theory::msd_tracking(*in);
                row.theory_msd = t.total;
                if (t.total < best_th) {
                    best_th = t.total;
                    out.theory_grid_argmin = value;
                }
            } catch (const std::exception& e) {
                row.flags.push_back(std::string("theory invalid: ") + e.what());
            }
        }
        try {
            const LearningCurve lc = run_ensemble(point, workers);
            row.empirical_msd = lc.algorithms.front().steady_state_msd;
            row.empirical_stderr = lc.algorithms.front().steady_state_stderr;
            if (*row.empirical_msd < best_emp) {
                best_emp = *row.empirical_msd;
                out.empirical_argmin = value;
            }
        } catch (const numerical_fault& e) {
            row.flags.push_back(std::string("simulation fault: ") + e.what());
        } catch (const config_error& e) {
            row.flags.push_back(std::string("invalid value: ") + e.what());
        }
        out.rows.push_back(std::move(row));
    }

    if (auto in = theory_inputs_for(config, *chosen); in && in->sigma_q2 > 0.0) {
        try {
            const auto opt = theory::optimal_parameters(*in);
            out.theory_optimum = parameter == SweepParameter::theta ? opt.theta_opt : opt.lambda_opt;
            out.warnings = opt.warnings;
        } catch (const std::exception& e) {
            out.warnings.push_back(std::string("optimal parameters unavailable: ") + e.what());
        }
    }
    return out;
}

}  // namespace prmcc::simlab
