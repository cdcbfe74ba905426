// gridrv: limit-law tables, single-path simulation and validation sweeps.
//
//   gridrv density-table [--config FILE] [--out DIR] [--tol T]
//   gridrv simulate      [--config FILE] [--out DIR] [--seed S]
//   gridrv validate      [--config FILE] [--out DIR] [--seed S] [--workers W] [--tol T]
//
// Exit status: 0 ok / validation passed, 1 validation failed, 2 bad
// configuration, 3 I/O or other runtime error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gridrv/config.hpp"
#include "gridrv/estimators.hpp"
#include "gridrv/io.hpp"
#include "gridrv/limit_law.hpp"
#include "gridrv/numerics.hpp"
#include "gridrv/path_sim.hpp"
#include "gridrv/scheme.hpp"
#include "gridrv/validation.hpp"

namespace fs = std::filesystem;
using namespace gridrv;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> tol;
    std::optional<unsigned> workers;
};

RunConfig resolve(const Overrides& o)
{
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.out = *o.out;
    if (o.tol) cfg.tol = *o.tol;
    if (o.workers) cfg.workers = *o.workers;
    cfg.validate();
    return cfg;
}

int density_table(const RunConfig& cfg)
{
    const fs::path dir = cfg.out;
    io::ensure_directory(dir);
    const json prov = provenance_json(cfg);
    const auto& d = cfg.density;

    std::vector<double> h(d.y_points);
    const double dy = 2.0 / static_cast<double>(d.y_points - 1);
    {
        io::CsvWriter w(dir / "h.csv", prov);
        w.row("y_over_c", "h");
        for (std::size_t i = 0; i < d.y_points; ++i) {
            const double y = i + 1 == d.y_points ? 1.0 : -1.0 + static_cast<double>(i) * dy;
            h[i] = limit_law::eval_h(y, cfg.tol);
            w.row(y, h[i]);
        }
        double mass = 0.0;
        if (d.y_points % 2 == 1) {
            mass = numerics::simpson(h, dy);
        } else {
            for (std::size_t i = 1; i < h.size(); ++i) mass += 0.5 * (h[i - 1] + h[i]) * dy;
        }
        w.footer("abs_integral_minus_one", std::abs(mass - 1.0));
        w.footer("tol", cfg.tol);
        std::printf("h: |int h - 1| = %.3e (10 tol = %.1e)\n", std::abs(mass - 1.0), 10.0 * cfg.tol);
    }

    const limit_law::ExitTimeDistribution exit(d.c, d.sigma, cfg.tol);
    const limit_law::RenewalAgeDistribution age(d.c, d.sigma, cfg.tol);
    const double z_max = d.z_max * exit.scale();
    const double dz = z_max / static_cast<double>(d.z_points - 1);
    {
        io::CsvWriter w(dir / "exit_cdf.csv", prov);
        w.row("z_eps2_time", "F");
        for (std::size_t i = 0; i < d.z_points; ++i) {
            const double z = static_cast<double>(i) * dz;
            w.row(z, z > 0.0 ? exit.cdf(z) : 0.0);
        }
        const double mean = exit.mean_from_survival();
        const double target = d.c * d.c / (d.sigma * d.sigma);
        w.footer("mean_from_survival", mean);
        w.footer("mean_target_c2_over_sigma2", target);
        w.footer("abs_mean_error", std::abs(mean - target));
        std::printf("F: int (1 - F) = %.12g, c^2/sigma^2 = %.12g\n", mean, target);
    }
    {
        io::CsvWriter w(dir / "renewal_age_cdf.csv", prov);
        w.row("z_eps2_time", "G");
        for (std::size_t i = 0; i < d.z_points; ++i) {
            const double z = static_cast<double>(i) * dz;
            w.row(z, age.cdf(z));
        }
        w.footer("G_at_z_max", age.cdf(z_max));
    }
    return 0;
}

int simulate(const RunConfig& cfg)
{
    const fs::path dir = cfg.out;
    io::ensure_directory(dir);
    const json prov = provenance_json(cfg);
    const GridScheme grid = cfg.grid();
    Stream stream(cfg.seed, StreamPurpose::replication, 0);
    const auto path = simulate_path(cfg, cfg.model, grid, stream);
    const auto sampled = extract_observations(path, grid);
    const auto stat = standardized_stat(sampled, cfg.model, path.jumps, cfg.t, grid);

    {
        io::CsvWriter w(dir / "path.csv", prov);
        w.row("time", "x_left", "jump");
        for (const auto& p : path.points) w.row(p.time, p.value, p.jump);
    }
    io::write_sampled_path(dir / "sampled_path.csv", sampled, prov);
    io::write_overshoots(dir / "overshoots.csv", sampled, prov);

    json summary = {{"config", prov},
                    {"scheme", to_string(path.scheme)},
                    {"epsilon", grid.epsilon},
                    {"t", cfg.t},
                    {"n_obs", sampled.count_until(cfg.t)},
                    {"rv", stat.rv},
                    {"qv_cont", stat.qv.continuous},
                    {"qv_jump", stat.qv.jump},
                    {"qv", stat.qv.total},
                    {"z", stat.value},
                    {"boundary_term", boundary_term(sampled, cfg.model, cfg.t)},
                    {"truncated", sampled.truncated}};
    std::ofstream f(dir / "summary.json", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write summary.json");
    f << summary.dump(2) << '\n';
    std::printf("n_obs=%zu rv=%.10g qv=%.10g z=%.10g\n", sampled.count_until(cfg.t), stat.rv, stat.qv.total,
                stat.value);
    return 0;
}

int validate(const RunConfig& cfg)
{
    const auto start = std::chrono::steady_clock::now();
    const auto out = convergence_sweep(cfg, [](const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); });
    const limit_law::EtaDistribution eta(cfg.tol);
    const limit_law::RenewalAgeDistribution age(cfg.c, cfg.model.vol(cfg.t), cfg.tol);
    const auto limit = LimitSampler::for_scenario(with_scenario(cfg.model, out.report.scenario), out.report.scenario,
                                                  cfg.t, cfg.c, eta);
    write_validation_outputs(cfg.out, out, eta, age, limit, cfg.c);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto& r = out.report;
    std::printf("%s  ks_z=%.4f var_rel=%+.4f ks_overshoot=%.4f ks_age=%.4f trend=%s  (%.1f s)\n",
                r.pass ? "PASS" : "FAIL", r.rows.back().ks_z, r.rows.back().variance_rel_error,
                r.rows.back().ks_overshoot, r.rows.back().ks_age, r.trend_ok ? "ok" : "irregular", secs);
    return r.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Grid-exit sampling: limit laws, simulation and validation"};
    app.require_subcommand(1);
    Overrides o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory");
    };
    auto* dt = app.add_subcommand("density-table", "tabulate h, the exit-time cdf F and the renewal-age cdf G");
    add_common(dt);
    dt->add_option("--tol", o.tol, "absolute series/quadrature tolerance");
    auto* sim = app.add_subcommand("simulate", "simulate one path at the smallest epsilon");
    add_common(sim);
    sim->add_option("--seed", o.seed, "master seed");
    auto* val = app.add_subcommand("validate", "run the epsilon sweep and write report.json");
    add_common(val);
    val->add_option("--seed", o.seed, "master seed");
    val->add_option("--tol", o.tol, "absolute series/quadrature tolerance");
    val->add_option("--workers", o.workers, "worker threads (0 = available parallelism)");

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = resolve(o);
        if (dt->parsed()) return density_table(cfg);
        if (sim->parsed()) return simulate(cfg);
        return validate(cfg);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const UnsupportedScheme& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
