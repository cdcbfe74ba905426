// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.
//
//   acceptance [work_dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "gridrv/config.hpp"
#include "gridrv/estimators.hpp"
#include "gridrv/io.hpp"
#include "gridrv/limit_law.hpp"
#include "gridrv/path_sim.hpp"
#include "gridrv/scheme.hpp"
#include "gridrv/validation.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using namespace gridrv;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail, double seconds)
{
    std::printf("[%s] %2d %-28s %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, name, detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++failures;
}

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

template <class... A>
std::string fmt(const char* f, A... a)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

RunConfig base_config(std::uint64_t seed)
{
    RunConfig cfg;
    cfg.c = 1.0;
    cfg.epsilons = {0.005};
    cfg.t = 1.0;
    cfg.replications = 10000;
    cfg.seed = seed;
    cfg.workers = 0;
    return cfg;
}

void density_identity()
{
    const auto start = Clock::now();
    const limit_law::EtaDistribution eta;
    double dev = 0.0;
    for (std::size_t i = 0; i < eta.grid().size(); ++i) {
        dev = std::max(dev, std::abs(eta.density()[i] - (1.0 - std::abs(eta.grid()[i]))));
    }
    // the triangular form itself, against the raw image-sum quadrature
    double oracle_dev = 0.0;
    for (int i = 0; i <= 32; ++i) {
        const double y = -1.0 + i / 16.0;
        oracle_dev = std::max(oracle_dev, std::abs(oracle::h(y) - (1.0 - std::abs(y))));
    }
    const double secs = since(start);
    report(1, "density identity", dev <= 1e-6 && oracle_dev <= 1e-10 && secs < 10.0,
           fmt("max|h-(1-|y|)|=%.2e over %zu points, oracle dev %.1e", dev, eta.grid().size(), oracle_dev), secs);
}

void normalizations()
{
    const auto start = Clock::now();
    const limit_law::EtaDistribution eta;
    const double mass_err = std::abs(eta.mass() - 1.0);
    double worst = 0.0;
    for (auto [c, sigma] : {std::pair{1.0, 1.0}, {0.5, 2.0}, {2.0, 0.3}, {1.0, 0.1}}) {
        const limit_law::ExitTimeDistribution d(c, sigma);
        const double target = c * c / (sigma * sigma);
        worst = std::max(worst, std::abs(d.mean_from_survival() - target) / target);
    }
    const double secs = since(start);
    report(2, "normalizations", mass_err <= 1e-7 && worst <= 1e-6 && secs < 10.0,
           fmt("|int h-1|=%.2e, max rel |int(1-F)-c^2/sigma^2|=%.2e", mass_err, worst), secs);
}

void continuous_case()
{
    const auto start = Clock::now();
    const auto out = convergence_sweep(base_config(20260301));
    const double secs = since(start);
    const auto& r = out.report.rows.back();
    report(3, "overshoot law", r.ks_overshoot < 0.02 && secs < 120.0,
           fmt("KS(overshoot, c eta)=%.4f < 0.02, R=%zu", r.ks_overshoot, r.z.n), secs);
    report(4, "renewal age", r.ks_age < 0.02, fmt("KS(eps^-2 age, G)=%.4f < 0.02", r.ks_age), secs);
    const bool var_ok = r.z.variance >= 0.633 && r.z.variance <= 0.700;
    report(5, "continuous CLT variance", var_ok && r.ks_z < 0.02 && secs < 300.0,
           fmt("Var=%.4f in [0.633,0.700], KS vs N(0,2/3)=%.4f < 0.02", r.z.variance, r.ks_z), secs);
}

void jump_case()
{
    const auto start = Clock::now();
    auto cfg = base_config(20260302);
    cfg.model.jumps = JumpSpec::list({{0.3, 1.0}, {0.8, -0.7}});
    cfg.limit_draws = 1000000;
    const auto out = convergence_sweep(cfg);
    const double secs = since(start);
    const auto& r = out.report.rows.back();
    const double target = 2.0 / 3.0 * cfg.c * cfg.c * (1.0 + 1.0 + 0.49);
    const bool target_ok = std::abs(out.report.limit_variance - target) <= 1e-6;
    const double rel = r.z.variance / target - 1.0;
    report(6, "jump CLT", r.ks_z < 0.025 && std::abs(rel) <= 0.05 && target_ok && secs < 600.0,
           fmt("KS vs %zu limit draws=%.4f < 0.025, Var=%.4f vs %.4f (%+.2f%%)", out.limit_draws.size(), r.ks_z,
               r.z.variance, target, 100.0 * rel),
           secs);
}

void scheme_fidelity()
{
    const auto start = Clock::now();
    auto cfg = base_config(20260303);
    cfg.replications = 1000;
    cfg.model.jumps = JumpSpec::list({{0.3, 1.0}, {0.8, -0.7}});
    const auto recs = run_replications(cfg, cfg.model, 0);
    std::size_t all = 0;
    for (const auto& r : recs) all += r.jumps_observed && r.alphas.size() == 2 ? 1 : 0;

    // 0.3 c eps jump from the centre of the cell
    const GridScheme g = cfg.grid();
    const double jump = 0.3 * g.cell();
    InternalPath p;
    p.horizon = 1.0;
    p.points = {{0.0, 0.0}, {0.25, 0.2 * g.cell()}, {0.5, 0.0, jump}, {1.0, jump}};
    p.jumps = {{1, 0.5, jump}};
    const auto s = extract_observations(p, g);
    bool small_ok = !s.overshoots.at(0).observed;
    for (const auto& o : s.observations) small_ok = small_ok && o.time != 0.5;
    report(7, "scheme fidelity", all == recs.size() && small_ok,
           fmt("jumps observed in %zu/%zu replications; small jump observed: %s", all, recs.size(),
               small_ok ? "no" : "yes"),
           since(start));
}

void simulator_cross_validation()
{
    const auto start = Clock::now();
    ModelSpec m;
    m.horizon = 0.05;
    const GridScheme g{0.01, 1.0};
    const std::size_t n = 100000;
    std::vector<double> exact(n), euler(n);
    EulerOptions first;
    first.max_observations = 1;
    first.record_steps = false;
    const double delta = default_euler_step(m, g);
    parallel_for(n, RunConfig{}.resolved_workers(), [&](std::size_t r) {
        Stream a(31, StreamPurpose::replication, r), b(32, StreamPurpose::replication, r);
        exact[r] = extract_observations(simulate_exact(m, g, a), g).observations.at(1).time;
        euler[r] = extract_observations(simulate_euler_bridge(m, g, delta, b, first), g).observations.at(1).time;
    });
    const double ks = ks_two_sample(exact, euler);

    ModelSpec unit;
    const GridScheme gc{0.05, 1.0};
    const std::size_t reps = 2000;
    std::vector<double> ne(reps), nb(reps);
    EulerOptions counts;
    counts.record_steps = false;
    parallel_for(reps, RunConfig{}.resolved_workers(), [&](std::size_t r) {
        Stream a(33, StreamPurpose::replication, r), b(34, StreamPurpose::replication, r);
        ne[r] = static_cast<double>(extract_observations(simulate_exact(unit, gc, a), gc).count_until(1.0));
        nb[r] = static_cast<double>(
            extract_observations(simulate_euler_bridge(unit, gc, default_euler_step(unit, gc), b, counts), gc)
                .count_until(1.0));
    });
    const double me = moments(ne).mean, mb = moments(nb).mean;
    const double rel = std::abs(mb / me - 1.0);
    report(8, "simulator cross-validation", ks < 0.01 && rel <= 0.01,
           fmt("KS(first exit) at %zu each=%.4f < 0.01; mean counts %.2f vs %.2f (%.2f%%)", n, ks, me, mb, 100.0 * rel),
           since(start));
}

void equidistant_baseline()
{
    const auto start = Clock::now();
    ModelSpec m;
    const std::size_t n = 10000, reps = 10000;
    const GridScheme g{0.1, 1.0};
    std::vector<double> z(reps);
    EulerOptions opt;
    parallel_for(reps, RunConfig{}.resolved_workers(), [&](std::size_t r) {
        Stream s(35, StreamPurpose::replication, r);
        z[r] = equidistant_rv(simulate_euler_bridge(m, g, 1.0 / static_cast<double>(n), s, opt), m, n, 1.0).standardized;
    });
    const double v = moments(z).variance;
    report(9, "equidistant baseline", v >= 1.9 && v <= 2.1,
           fmt("Var(sqrt(n)(RV-QV))=%.4f in [1.9,2.1], n=%zu, R=%zu", v, n, reps), since(start));
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const RunConfig& cfg, const fs::path& dir)
{
    const auto out = convergence_sweep(cfg);
    const limit_law::EtaDistribution eta(cfg.tol);
    const limit_law::RenewalAgeDistribution age(cfg.c, cfg.model.vol(cfg.t), cfg.tol);
    const auto limit = LimitSampler::for_scenario(with_scenario(cfg.model, out.report.scenario), out.report.scenario,
                                                  cfg.t, cfg.c, eta);
    write_validation_outputs(dir, out, eta, age, limit, cfg.c);
    Stream s(cfg.seed, StreamPurpose::replication, 0);
    const auto path = simulate_path(cfg, cfg.model, cfg.grid(), s);
    const auto sampled = extract_observations(path, cfg.grid());
    io::write_sampled_path(dir / "sampled_path.csv", sampled, provenance_json(cfg));
    io::write_overshoots(dir / "overshoots.csv", sampled, provenance_json(cfg));
}

void determinism(const fs::path& work)
{
    const auto start = Clock::now();
    std::size_t files = 0, identical = 0;
    for (auto scheme : {SchemeKind::exact, SchemeKind::euler_bridge}) {
        RunConfig cfg;
        cfg.scheme = scheme;
        cfg.epsilons = {0.1, 0.05};
        cfg.replications = 300;
        cfg.limit_draws = 50000;
        cfg.seed = 20260304;
        cfg.model.jumps = JumpSpec::poisson(DeterministicFunction::constant(2.0), {SizeFamily::normal, 0.0, 0.5});
        cfg.model.vol = DeterministicFunction::sinusoidal(1.0, 0.3, 1.0, 0.0);
        const fs::path a = work / to_string(scheme) / "a", b = work / to_string(scheme) / "b";
        fs::remove_all(a);
        fs::remove_all(b);
        cfg.workers = 1;
        write_all(cfg, a);
        cfg.workers = 3;
        write_all(cfg, b);
        for (const auto& e : fs::directory_iterator(a)) {
            ++files;
            identical += slurp(e.path()) == slurp(b / e.path().filename()) ? 1 : 0;
        }
    }
    report(10, "determinism", files > 0 && identical == files,
           fmt("%zu/%zu CSV/JSON files byte-identical across runs (1 vs 3 workers)", identical, files), since(start));
}

} // namespace

int main(int argc, char** argv)
{
    const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "gridrv_acceptance";
    fs::create_directories(work);
    density_identity();
    normalizations();
    continuous_case();
    jump_case();
    scheme_fidelity();
    simulator_cross_validation();
    equidistant_baseline();
    determinism(work);
    std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
