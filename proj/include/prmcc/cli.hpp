#pragma once

// Command implementations behind the prmcc executable. Kept in a header so
// tests can drive them without spawning processes.

#include "prmcc/config_io.hpp"
#include "prmcc/errors.hpp"
#include "prmcc/simlab.hpp"
#include "prmcc/theory.hpp"
#include "prmcc/version.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace prmcc::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalFault = 3 };

struct RunOptions {
    std::string config_path;
    std::string out_dir = ".";
    unsigned workers = 0;  ///< 0: take the config value
    std::optional<std::uint64_t> seed_override;
    bool theory_overlay = false;
};

struct SweepOptions {
    RunOptions run;
    std::string parameter;  ///< empty: take the config value
    std::vector<double> grid;
};

/// %.17g, round-trip exact for doubles.
inline std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Grid spec: "a,b,c" or "start:step:stop" (inclusive, tolerant to rounding).
inline std::vector<double> parse_grid(const std::string& spec)
{
    std::vector<double> out;
    const auto to_double = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) {
            throw config_error("grid", "cannot parse '" + s + "' as a number");
        }
        return v;
    };
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        for (std::string p; std::getline(ss, p, ':');) {
            parts.push_back(p);
        }
        if (parts.size() != 3) {
            throw config_error("grid", "range form is start:step:stop");
        }
        const double a = to_double(parts[0]);
        const double step = to_double(parts[1]);
        const double b = to_double(parts[2]);
        if (!(step > 0.0) || b < a) {
            throw config_error("grid", "range needs step > 0 and stop >= start");
        }
        const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9));
        if (n > 100000) {
            throw config_error("grid", "range has too many points");
        }
        for (std::size_t i = 0; i <= n; ++i) {
            out.push_back(a + static_cast<double>(i) * step);
        }
        return out;
    }
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ',');) {
        out.push_back(to_double(p));
    }
    if (out.empty()) {
        throw config_error("grid", "grid must not be empty");
    }
    return out;
}

namespace detail {

inline std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out << content;
}

inline json finite_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

inline json warnings_json(const std::vector<std::string>& w) { return json(w); }

/// Runs `fn` and packs its result or its failure into a status object.
template <typename Fn>
json guarded(Fn&& fn)
{
    try {
        json j = fn();
        if (!j.contains("status")) {
            j["status"] = "ok";
        }
        return j;
    } catch (const invalid_regime& e) {
        return {{"status", "invalid_regime"}, {"message", e.what()}};
    } catch (const degenerate_input& e) {
        return {{"status", "degenerate_input"}, {"message", e.what()}};
    } catch (const std::exception& e) {
        return {{"status", "error"}, {"message", e.what()}};
    }
}

inline theory::TheoryInputs with_target(theory::TheoryInputs in, const TheoryOverlay& overlay)
{
    in.c = overlay.target_error > 0.0 ? overlay.target_error : 0.01 * in.w_true.norm();
    return in;
}

/// Theory block for one algorithm; entries that do not apply carry a status.
inline json theory_report(const FileConfig& fc, const simlab::AlgorithmSpec& spec)
{
    using simlab::Algorithm;
    json j = {{"label", spec.label}, {"name", simlab::to_string(spec.kind)}};
    const auto maybe = simlab::theory_inputs_for(fc.experiment, spec);
    if (!maybe) {
        j["status"] = simlab::is_recursive(spec.kind) ? "no_nominal_weights" : "unsupported";
        j["message"] = simlab::is_recursive(spec.kind)
                           ? "system weights are drawn at random; no closed-form prediction"
                           : "no closed-form analysis for gradient filters";
        return j;
    }
    const theory::TheoryInputs in = with_target(*maybe, fc.overlay);
    j["status"] = "ok";
    j["taylor_terms"] = guarded([&] {
        const auto tt = theory::taylor_terms(in.moments, in.sigma);
        return json{{"t1", tt.t1}, {"t2", tt.t2}, {"t3", tt.t3}, {"t4", tt.t4},
                    {"t5", tt.t5}, {"t6", tt.t6}, {"warnings", tt.warnings}};
    });
    j["stability_bound_theta"] = guarded([&] {
        const auto s = theory::stability_bound_theta(in);
        return json{{"value", finite_or_null(s.value)}, {"warnings", s.warnings}};
    });
    j["iterations_to_steady_state"] = guarded([&] {
        const auto s = theory::iterations_to_steady_state(in);
        return json{{"value", s.value}, {"target_error", in.c}, {"warnings", s.warnings}};
    });
    if (spec.kind == Algorithm::cprmcc) {
        j["theta_12"] = theory::theta_12(spec.theta1, spec.theta2);
        j["combined_msd"] = guarded([&] {
            const auto c = theory::combined_msd(in, spec.theta1, spec.theta2, spec.combiner.b_plus);
            return json{{"case", c.regime},       {"msd", c.msd},
                        {"msd_db", theory::to_db(c.msd)},
                        {"msd1", c.msd1},         {"msd2", c.msd2},
                        {"msd12", c.msd12},       {"delta1", c.delta1},
                        {"delta2", c.delta2},     {"theta_12", c.theta12},
                        {"rho_inf", c.rho_inf},   {"b_inf", c.b_inf},
                        {"rho_clamped", c.rho_clamped}, {"warnings", c.warnings}};
        });
        return j;
    }
    if (in.sigma_q2 == 0.0) {
        j["msd_stationary"] = guarded([&] {
            const auto m = theory::msd_stationary(in);
            return json{{"value", m.total}, {"db", theory::to_db(m.total)}, {"warnings", m.warnings}};
        });
    } else {
        j["msd_tracking"] = guarded([&] {
            const auto m = theory::msd_tracking(in);
            return json{{"value", m.total},
                        {"db", theory::to_db(m.total)},
                        {"simplified", m.simplified},
                        {"simplified_db", theory::to_db(m.simplified)},
                        {"warnings", m.warnings}};
        });
        j["optimal_parameters"] = guarded([&] {
            const auto o = theory::optimal_parameters(in);
            return json{{"theta_opt", o.theta_opt},
                        {"lambda_opt", o.lambda_opt},
                        {"lambda_opt_in_range", o.lambda_opt_in_range},
                        {"warnings", o.warnings}};
        });
    }
    return j;
}

inline FileConfig load_effective(const RunOptions& opt)
{
    FileConfig fc = load_config(opt.config_path);
    if (opt.seed_override) {
        fc.experiment.seed = *opt.seed_override;
    }
    if (opt.theory_overlay) {
        fc.overlay.enabled = true;
    }
    if (opt.workers > 0) {
        fc.workers = opt.workers;
    }
    return fc;
}

inline std::filesystem::path prepare_out(const std::string& dir)
{
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec || !std::filesystem::is_directory(p)) {
        throw config_error("out", "cannot create output directory '" + dir + "'");
    }
    return p;
}

}  // namespace detail

/// Runs `body` and maps exceptions to exit codes with a diagnostic on `err`.
template <typename Fn>
int with_exit_codes(std::ostream& err, Fn&& body)
{
    try {
        return body();
    } catch (const config_error& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const numerical_fault& e) {
        err << "numerical fault: " << e.what() << '\n';
        return kNumericalFault;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

/// curves.csv, summary.json and manifest.json in the output directory.
inline int cmd_run(const RunOptions& opt, std::ostream& log = std::cerr)
{
    return with_exit_codes(log, [&] {
        const FileConfig fc = detail::load_effective(opt);
        const auto out = detail::prepare_out(opt.out_dir);
        const std::string started = detail::utc_now();
        const simlab::LearningCurve lc = simlab::run_ensemble(fc.experiment, fc.workers);

        std::string csv = "iteration";
        for (const auto& a : lc.algorithms) {
            csv += "," + a.label + "_msd_db";
            if (a.has_rho()) {
                csv += "," + a.label + "_rho";
            }
        }
        csv += '\n';
        for (std::size_t i = 0; i < lc.iterations; ++i) {
            csv += std::to_string(i + 1);
            for (const auto& a : lc.algorithms) {
                csv += ',' + format_number(simlab::to_db(a.msd[i]));
                if (a.has_rho()) {
                    csv += ',' + format_number(a.rho[i]);
                }
            }
            csv += '\n';
        }

        json summary = {{"iterations", lc.iterations},
                        {"trials", lc.trials},
                        {"steady_window", lc.steady_window},
                        {"algorithms", json::array()}};
        for (std::size_t k = 0; k < lc.algorithms.size(); ++k) {
            const auto& a = lc.algorithms[k];
            json entry = {{"label", a.label},
                          {"name", simlab::to_string(a.kind)},
                          {"steady_state_msd", a.steady_state_msd},
                          {"steady_state_msd_db", a.steady_state_db()},
                          {"steady_state_stderr", a.steady_state_stderr}};
            if (a.has_rho()) {
                entry["final_rho"] = a.rho.back();
                entry["max_abs_b"] = a.max_abs_b;
            }
            if (fc.overlay.enabled) {
                entry["theory"] = detail::theory_report(fc, fc.experiment.algorithms[k]);
            }
            summary["algorithms"].push_back(entry);
        }

        const json config = to_json(fc);
        json manifest = {{"version", kVersion},
                         {"config", config},
                         {"config_hash", fnv1a_hex(config.dump())},
                         {"seed", fc.experiment.seed},
                         {"workers", fc.workers},
                         {"started_utc", started},
                         {"finished_utc", detail::utc_now()},
                         {"outputs",
                          {{"curves", (out / "curves.csv").string()},
                           {"summary", (out / "summary.json").string()},
                           {"manifest", (out / "manifest.json").string()}}}};

        detail::write_file(out / "curves.csv", csv);
        detail::write_file(out / "summary.json", summary.dump(2) + '\n');
        detail::write_file(out / "manifest.json", manifest.dump(2) + '\n');
        return int{kOk};
    });
}

/// Theory report for every algorithm of the config, as JSON on `out`.
inline int cmd_theory(const RunOptions& opt, std::ostream& out = std::cout, std::ostream& log = std::cerr)
{
    return with_exit_codes(log, [&] {
        const FileConfig fc = detail::load_effective(opt);
        const auto& c = fc.experiment;
        const MomentSet m = moments(c.noise);
        json report = {{"version", kVersion},
                       {"taps", simlab::taps(c.system)},
                       {"sigma_x2", c.input_variance},
                       {"sigma_q2", simlab::random_walk_variance(c.system)},
                       {"noise", {{"type", noise_kind(c.noise)}, {"m2", m.m2}, {"m4", m.m4}, {"m6", m.m6}}},
                       {"algorithms", json::array()}};
        for (const auto& spec : c.algorithms) {
            report["algorithms"].push_back(detail::theory_report(fc, spec));
        }
        out << report.dump(2) << '\n';
        return int{kOk};
    });
}

/// sweep.csv and sweep_summary.json in the output directory.
inline int cmd_sweep(const SweepOptions& opt, std::ostream& log = std::cerr)
{
    return with_exit_codes(log, [&] {
        const FileConfig fc = detail::load_effective(opt.run);
        const std::string name = opt.parameter.empty() ? fc.sweep.parameter : opt.parameter;
        if (name != "theta" && name != "lambda") {
            throw config_error("parameter", "expected theta or lambda");
        }
        const std::vector<double> grid = opt.grid.empty() ? fc.sweep.grid : opt.grid;
        if (grid.empty()) {
            throw config_error("grid", "no grid given on the command line or in the config");
        }
        const auto out = detail::prepare_out(opt.run.out_dir);
        const auto param = name == "theta" ? simlab::SweepParameter::theta : simlab::SweepParameter::lambda;
        const simlab::SweepResult r =
            simlab::sweep(fc.experiment, param, grid, fc.sweep.algorithm, fc.workers);

        std::string csv = "value,empirical_msd_db,empirical_stderr,theory_msd_db,flags\n";
        json rows = json::array();
        for (const auto& row : r.rows) {
            std::string flags;
            for (const auto& f : row.flags) {
                flags += (flags.empty() ? "" : "; ") + f;
            }
            std::string quoted = "\"";
            for (char ch : flags) {
                quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            }
            quoted += '"';
            csv += format_number(row.value) + ',' +
                   (row.empirical_msd ? format_number(simlab::to_db(*row.empirical_msd)) : "") + ',' +
                   format_number(row.empirical_stderr) + ',' +
                   (row.theory_msd ? format_number(theory::to_db(*row.theory_msd)) : "") + ',' + quoted + '\n';
            rows.push_back({{"value", row.value},
                            {"empirical_msd", row.empirical_msd ? json(*row.empirical_msd) : json(nullptr)},
                            {"theory_msd", row.theory_msd ? json(*row.theory_msd) : json(nullptr)},
                            {"flags", row.flags}});
        }
        const auto opt_or_null = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
        json summary = {{"parameter", name},
                        {"algorithm", r.label},
                        {"empirical_argmin", opt_or_null(r.empirical_argmin)},
                        {"theory_grid_argmin", opt_or_null(r.theory_grid_argmin)},
                        {"theory_optimum", opt_or_null(r.theory_optimum)},
                        {"warnings", r.warnings},
                        {"rows", rows},
                        {"config_hash", fnv1a_hex(to_json(fc).dump())},
                        {"version", kVersion}};
        detail::write_file(out / "sweep.csv", csv);
        detail::write_file(out / "sweep_summary.json", summary.dump(2) + '\n');
        return int{kOk};
    });
}

}  // namespace prmcc::cli
