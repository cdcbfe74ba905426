#pragma once

// Monte Carlo harness: replications of the standardized statistic, the limit
// sampler for a fixed jump scenario, KS and moment comparisons, and the
// epsilon sweep behind `gridrv validate`.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gridrv/config.hpp"
#include "gridrv/errors.hpp"
#include "gridrv/estimators.hpp"
#include "gridrv/io.hpp"
#include "gridrv/limit_law.hpp"
#include "gridrv/path_sim.hpp"
#include "gridrv/random.hpp"
#include "gridrv/scheme.hpp"

namespace gridrv {

/// sup_x |F_n(x) - F(x)| for an analytic cdf.
template <class Cdf>
double ks_one_sample(std::vector<double> x, Cdf&& cdf)
{
    if (x.empty()) throw DomainError("ks_one_sample: empty sample");
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return std::min(d, 1.0);
}

/// sup_x |F_a(x) - F_b(x)|; ties are handled by stepping past equal values.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;    ///< unbiased
    double se_mean = 0.0;
    double se_variance = 0.0; ///< from the fourth central moment
};

inline Moments moments(std::span<const double> x)
{
    Moments m;
    m.n = x.size();
    if (m.n < 2) throw DomainError("moments: need at least two values");
    const double n = static_cast<double>(m.n);
    double s = 0.0;
    for (double v : x) s += v;
    m.mean = s / n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = (v - m.mean) * (v - m.mean);
        m2 += d;
        m4 += d * d;
    }
    m.variance = m2 / (n - 1.0);
    m.se_mean = std::sqrt(m.variance / n);
    const double pop2 = m2 / n;
    m.se_variance = std::sqrt(std::max(m4 / n - pop2 * pop2, 0.0) / n);
    return m;
}

/// Runs f(i) for i in [0, n) on `workers` threads. Results must be written to
/// per-index slots so that the outcome does not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& f)
{
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            try {
                for (std::size_t i; !failed && (i = next.fetch_add(1)) < n;) f(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// Draws of U + V for a fixed jump scenario: U Gaussian with variance
/// (2/3) c^2 int_0^t sigma^2, V = 2 sum dX_p c eta_p, all independent.
class LimitSampler {
public:
    static constexpr std::size_t chunk = 4096;

    LimitSampler(double u_variance, std::vector<double> jump_sizes, double c, const limit_law::EtaDistribution& eta)
        : u_sd_(std::sqrt(u_variance)), jumps_(std::move(jump_sizes)), c_(c), eta_(&eta)
    {
        double s2 = 0.0;
        for (double j : jumps_) s2 += j * j;
        variance_ = u_variance + 4.0 * c * c * eta.variance() * s2;
    }

    static LimitSampler for_scenario(const ModelSpec& spec, std::span<const JumpRecord> jumps, double t, double c,
                                     const limit_law::EtaDistribution& eta)
    {
        std::vector<double> sizes;
        for (const auto& j : jumps) {
            if (j.time <= t) sizes.push_back(j.size);
        }
        return LimitSampler(2.0 / 3.0 * c * c * spec.integrated_variance(t), std::move(sizes), c, eta);
    }

    double u_variance() const { return u_sd_ * u_sd_; }
    double variance() const { return variance_; }
    bool has_jumps() const { return !jumps_.empty(); }
    std::span<const double> jump_sizes() const { return jumps_; }

    /// Cdf of the limit when there are no jumps.
    double gaussian_cdf(double z) const { return numerics::normal_cdf(z / u_sd_); }

    double draw(Stream& stream) const
    {
        double v = u_sd_ * stream.normal();
        for (double j : jumps_) v += 2.0 * j * c_ * eta_->sample(stream);
        return v;
    }

    /// n draws; chunk k uses its own stream, so the output does not depend
    /// on the number of workers.
    std::vector<double> sample(std::size_t n, std::uint64_t seed, unsigned workers = 1) const
    {
        std::vector<double> out(n);
        const std::size_t chunks = (n + chunk - 1) / chunk;
        parallel_for(chunks, workers, [&](std::size_t k) {
            Stream s(seed, StreamPurpose::limit_sampler, k);
            for (std::size_t i = k * chunk; i < std::min(n, (k + 1) * chunk); ++i) out[i] = draw(s);
        });
        return out;
    }

private:
    double u_sd_;
    std::vector<double> jumps_;
    double c_;
    const limit_law::EtaDistribution* eta_;
    double variance_ = 0.0;
};

inline std::vector<double> sample_limit(const ModelSpec& spec, std::span<const JumpRecord> jumps, double t, double c,
                                        std::size_t n, std::uint64_t seed, const limit_law::EtaDistribution& eta,
                                        unsigned workers = 1)
{
    return LimitSampler::for_scenario(spec, jumps, t, c, eta).sample(n, seed, workers);
}

/// The jump configuration every replication shares. Poisson jumps are drawn
/// once from the master seed and then held fixed.
inline std::vector<JumpRecord> jump_scenario(const RunConfig& cfg)
{
    Stream s(cfg.seed, StreamPurpose::jump_scenario, 0);
    std::vector<JumpRecord> out;
    for (const auto& j : simulate_jumps(cfg.model, s)) {
        if (j.time <= cfg.model.horizon) out.push_back(j);
    }
    return out;
}

inline ModelSpec with_scenario(ModelSpec spec, std::span<const JumpRecord> scenario)
{
    if (scenario.empty()) {
        spec.jumps = JumpSpec::none();
        return spec;
    }
    std::vector<JumpEvent> events;
    for (const auto& j : scenario) events.push_back({j.time, j.size});
    spec.jumps = JumpSpec::list(std::move(events));
    return spec;
}

inline InternalPath simulate_path(const RunConfig& cfg, const ModelSpec& model, const GridScheme& grid, Stream& stream)
{
    switch (cfg.scheme) {
    case SchemeKind::exact: return simulate_exact(model, grid, stream);
    case SchemeKind::euler_bridge: return simulate_euler_bridge(model, grid, cfg.euler_step(grid), stream);
    case SchemeKind::embedded: break;
    }
    throw UnsupportedScheme("scheme cannot be simulated");
}

struct ReplicationRecord {
    std::uint64_t index = 0;
    double epsilon = 0.0;
    double rv = 0.0;
    double qv_cont = 0.0;
    double qv_jump = 0.0;
    double z = 0.0;
    std::size_t n_obs = 0;
    double boundary = 0.0;
    double overshoot = 0.0; ///< eps^{-1} continuous displacement since tau^-(t)
    double age = 0.0;       ///< eps^{-2} (t - tau^-(t))
    bool jumps_observed = true;
    std::vector<double> alphas;
};

/// Replication r of sweep entry k uses stream (seed, replication, k * 2^32 + r).
inline std::uint64_t replication_stream_index(std::size_t eps_index, std::size_t r)
{
    return (static_cast<std::uint64_t>(eps_index) << 32) | static_cast<std::uint64_t>(r);
}

inline ReplicationRecord run_replication(const RunConfig& cfg, const ModelSpec& model, std::size_t eps_index,
                                         std::size_t r)
{
    const GridScheme grid = cfg.grid(cfg.epsilons.at(eps_index));
    const std::uint64_t id = replication_stream_index(eps_index, r);
    Stream stream(cfg.seed, StreamPurpose::replication, id);
    const auto path = simulate_path(cfg, model, grid, stream);
    const auto sampled = extract_observations(path, grid);
    const auto stat = standardized_stat(sampled, model, path.jumps, cfg.t, grid);

    ReplicationRecord rec;
    rec.index = r;
    rec.epsilon = grid.epsilon;
    rec.rv = stat.rv;
    rec.qv_cont = stat.qv.continuous;
    rec.qv_jump = stat.qv.jump;
    rec.z = stat.value;
    rec.n_obs = sampled.count_until(cfg.t);
    rec.boundary = boundary_term(sampled, model, cfg.t);
    rec.overshoot = overshoot_at(cfg.t, path, sampled);
    rec.age = age_at(cfg.t, sampled) / (grid.epsilon * grid.epsilon);
    for (const auto& o : sampled.overshoots) {
        if (o.time > cfg.t) continue;
        rec.alphas.push_back(o.alpha);
        rec.jumps_observed = rec.jumps_observed && o.observed;
    }
    return rec;
}

inline std::vector<ReplicationRecord> run_replications(const RunConfig& cfg, const ModelSpec& model,
                                                       std::size_t eps_index)
{
    cfg.validate();
    std::vector<ReplicationRecord> out(cfg.replications);
    parallel_for(cfg.replications, cfg.resolved_workers(),
                 [&](std::size_t r) { out[r] = run_replication(cfg, model, eps_index, r); });
    return out;
}

/// KS thresholds are set for `reference_replications`; for fewer
/// replications they widen by sqrt(reference / R), keeping the same DKW level.
struct Thresholds {
    std::size_t reference_replications = 10000;
    double ks_z_no_jumps = 0.02;
    double ks_z_jumps = 0.025;
    double variance_rel = 0.05;
    double ks_overshoot = 0.02;
    double ks_age = 0.02;
    double trend_slack = 0.005;

    double ks_scale(std::size_t replications) const
    {
        const double r = static_cast<double>(replications);
        return std::max(1.0, std::sqrt(static_cast<double>(reference_replications) / r));
    }
};

struct EpsilonSummary {
    double epsilon = 0.0;
    Moments z;
    double target_variance = 0.0;
    double variance_rel_error = 0.0;
    double ks_z = 0.0;
    double ks_overshoot = 0.0;
    double ks_age = 0.0;
    std::vector<double> ks_alpha; ///< per jump up to t
    double jump_observation_rate = std::numeric_limits<double>::quiet_NaN();
    double mean_abs_boundary = 0.0;
    double mean_n_obs = 0.0;
    double seconds = 0.0; ///< not written to report.json
};

struct ValidationReport {
    json config;
    std::size_t replications = 0;
    std::vector<JumpRecord> scenario;
    bool stress = false; ///< some jump no larger than 2 c eps at the smallest eps
    double limit_variance = 0.0;
    Thresholds thresholds;
    std::vector<EpsilonSummary> rows;
    bool trend_ok = true;
    bool pass_z = false;
    bool pass_variance = false;
    bool pass_overshoot = false;
    bool pass_age = false;
    bool pass_jump_observation = true;
    bool pass = false;
};

struct SweepOutput {
    ValidationReport report;
    std::vector<std::vector<ReplicationRecord>> records; ///< per epsilon
    std::vector<double> limit_draws;                    ///< empty without jumps
};

inline EpsilonSummary summarize(const std::vector<ReplicationRecord>& recs, double epsilon, const RunConfig& cfg,
                                const LimitSampler& limit, std::span<const double> limit_draws,
                                const limit_law::EtaDistribution& eta, const limit_law::RenewalAgeDistribution& age)
{
    EpsilonSummary s;
    s.epsilon = epsilon;
    std::vector<double> z, over, ages;
    double boundary = 0.0, nobs = 0.0;
    std::size_t observed = 0;
    for (const auto& r : recs) {
        z.push_back(r.z);
        over.push_back(r.overshoot);
        ages.push_back(r.age);
        boundary += std::abs(r.boundary);
        nobs += static_cast<double>(r.n_obs);
        observed += r.jumps_observed ? 1 : 0;
    }
    const double n = static_cast<double>(recs.size());
    s.z = moments(z);
    s.target_variance = limit.variance();
    s.variance_rel_error = s.z.variance / s.target_variance - 1.0;
    if (limit.has_jumps()) {
        s.ks_z = ks_two_sample(z, std::vector<double>(limit_draws.begin(), limit_draws.end()));
        s.jump_observation_rate = static_cast<double>(observed) / n;
    } else {
        s.ks_z = ks_one_sample(z, [&](double v) { return limit.gaussian_cdf(v); });
    }
    s.ks_overshoot = ks_one_sample(over, [&](double v) { return eta.cdf(v / cfg.c); });
    s.ks_age = ks_one_sample(ages, [&](double v) { return v <= 0.0 ? 0.0 : age.tabulated_cdf(v); });
    const std::size_t njumps = recs.empty() ? 0 : recs.front().alphas.size();
    for (std::size_t p = 0; p < njumps; ++p) {
        std::vector<double> a;
        for (const auto& r : recs) a.push_back(r.alphas.at(p));
        s.ks_alpha.push_back(ks_one_sample(a, [&](double v) { return eta.cdf(v / cfg.c); }));
    }
    s.mean_abs_boundary = boundary / n;
    s.mean_n_obs = nobs / n;
    return s;
}

/// Runs every epsilon of the configuration (in the given decreasing order)
/// against one fixed jump scenario and one set of limit draws.
inline SweepOutput convergence_sweep(const RunConfig& cfg, const std::function<void(const std::string&)>& log = {})
{
    cfg.validate();
    SweepOutput out;
    auto& rep = out.report;
    rep.config = provenance_json(cfg);
    rep.replications = cfg.replications;
    rep.scenario = jump_scenario(cfg);
    const ModelSpec model = with_scenario(cfg.model, rep.scenario);

    const limit_law::EtaDistribution eta(cfg.tol);
    const double sigma_t = cfg.model.vol(cfg.t);
    const limit_law::RenewalAgeDistribution age(cfg.c, sigma_t, cfg.tol);
    const auto limit = LimitSampler::for_scenario(model, rep.scenario, cfg.t, cfg.c, eta);
    rep.limit_variance = limit.variance();
    if (limit.has_jumps()) out.limit_draws = limit.sample(cfg.limit_draws, cfg.seed, cfg.resolved_workers());

    const double smallest = cfg.epsilons.back();
    for (const auto& j : rep.scenario) {
        if (j.time <= cfg.t && std::abs(j.size) <= 2.0 * cfg.c * smallest) rep.stress = true;
    }

    for (std::size_t k = 0; k < cfg.epsilons.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        out.records.push_back(run_replications(cfg, model, k));
        auto row = summarize(out.records.back(), cfg.epsilons[k], cfg, limit, out.limit_draws, eta, age);
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (log) {
            log("eps=" + io::num(row.epsilon) + " var=" + io::num(row.z.variance) + " ks_z=" + io::num(row.ks_z)
                + " ks_overshoot=" + io::num(row.ks_overshoot) + " ks_age=" + io::num(row.ks_age) + " ("
                + io::num(row.seconds) + " s)");
        }
        rep.rows.push_back(std::move(row));
    }

    const auto& th = rep.thresholds;
    int inversions = 0;
    for (std::size_t k = 1; k < rep.rows.size(); ++k) {
        const double up = rep.rows[k].ks_z - rep.rows[k - 1].ks_z;
        if (up > 0.0) {
            ++inversions;
            if (up > th.trend_slack) rep.trend_ok = false;
        }
    }
    if (inversions > 1) rep.trend_ok = false;

    const auto& last = rep.rows.back();
    const double widen = th.ks_scale(cfg.replications);
    rep.pass_z = last.ks_z < widen * (limit.has_jumps() ? th.ks_z_jumps : th.ks_z_no_jumps);
    rep.pass_variance = std::abs(last.variance_rel_error) <= th.variance_rel;
    rep.pass_overshoot = last.ks_overshoot < widen * th.ks_overshoot;
    rep.pass_age = last.ks_age < widen * th.ks_age;
    if (limit.has_jumps() && !rep.stress) rep.pass_jump_observation = last.jump_observation_rate == 1.0;
    // A stress scenario is reported but only its jump-free laws are gated.
    rep.pass = rep.pass_overshoot && rep.pass_age
               && (rep.stress || (rep.pass_z && rep.pass_variance && rep.pass_jump_observation));
    return out;
}

inline json report_to_json(const ValidationReport& r)
{
    json j;
    j["config"] = r.config;
    j["replications"] = r.replications;
    json eps = json::array();
    for (const auto& row : r.rows) eps.push_back(row.epsilon);
    j["epsilons"] = eps;
    json scen = json::array();
    for (const auto& s : r.scenario) scen.push_back({{"p", s.index}, {"time", s.time}, {"size", s.size}});
    j["jump_scenario"] = scen;
    j["stress_scenario"] = r.stress;
    j["limit_variance"] = r.limit_variance;
    j["thresholds"] = {{"reference_replications", r.thresholds.reference_replications},
                       {"ks_widening", r.thresholds.ks_scale(r.replications)},
                       {"ks_z_no_jumps", r.thresholds.ks_z_no_jumps},
                       {"ks_z_jumps", r.thresholds.ks_z_jumps},
                       {"variance_rel", r.thresholds.variance_rel},
                       {"ks_overshoot", r.thresholds.ks_overshoot},
                       {"ks_age", r.thresholds.ks_age},
                       {"trend_slack", r.thresholds.trend_slack}};
    json rows = json::array();
    for (const auto& row : r.rows) {
        json e = {{"epsilon", row.epsilon},
                  {"mean", row.z.mean},
                  {"se_mean", row.z.se_mean},
                  {"variance", row.z.variance},
                  {"se_variance", row.z.se_variance},
                  {"target_variance", row.target_variance},
                  {"variance_rel_error", row.variance_rel_error},
                  {"ks_z", row.ks_z},
                  {"ks_overshoot", row.ks_overshoot},
                  {"ks_age", row.ks_age},
                  {"mean_abs_boundary", row.mean_abs_boundary},
                  {"mean_n_obs", row.mean_n_obs}};
        if (!r.scenario.empty()) {
            e["ks_alpha"] = row.ks_alpha;
            e["jump_observation_rate"] = row.jump_observation_rate;
        }
        rows.push_back(e);
    }
    j["sweep"] = rows;
    j["checks"] = {{"ks_z", r.pass_z},
                   {"variance", r.pass_variance},
                   {"ks_overshoot", r.pass_overshoot},
                   {"ks_age", r.pass_age},
                   {"jump_observation", r.pass_jump_observation},
                   {"ks_trend", r.trend_ok}};
    j["pass"] = r.pass;
    return j;
}

/// report.json, sweep.csv, one replications CSV per epsilon and empirical
/// cdf pairs at the smallest epsilon.
inline void write_validation_outputs(const std::filesystem::path& dir, const SweepOutput& out,
                                     const limit_law::EtaDistribution& eta,
                                     const limit_law::RenewalAgeDistribution& age, const LimitSampler& limit,
                                     double c)
{
    io::ensure_directory(dir);
    const auto& rep = out.report;
    {
        std::ofstream f(dir / "report.json", std::ios::binary);
        if (!f) throw std::runtime_error("cannot write report.json");
        f << report_to_json(rep).dump(2) << '\n';
    }
    {
        io::CsvWriter w(dir / "sweep.csv", rep.config);
        w.row("epsilon", "replications", "mean_z", "var_z", "target_var", "ks_z", "ks_overshoot", "ks_age",
              "mean_abs_boundary", "mean_n_obs");
        for (const auto& r : rep.rows) {
            w.row(r.epsilon, static_cast<std::uint64_t>(r.z.n), r.z.mean, r.z.variance, r.target_variance, r.ks_z,
                  r.ks_overshoot, r.ks_age, r.mean_abs_boundary, r.mean_n_obs);
        }
    }
    const std::uint64_t seed = rep.config.at("seed").get<std::uint64_t>();
    for (std::size_t k = 0; k < out.records.size(); ++k) {
        io::CsvWriter w(dir / ("replications_" + std::to_string(k) + ".csv"), rep.config);
        w.row("seed", "replication", "epsilon", "rv", "qv_cont", "qv_jump", "z", "n_obs", "boundary_term");
        for (const auto& r : out.records[k]) {
            w.row(seed, r.index, r.epsilon, r.rv, r.qv_cont, r.qv_jump, r.z, static_cast<std::uint64_t>(r.n_obs),
                  r.boundary);
        }
    }
    if (out.records.empty()) return;
    const auto& recs = out.records.back();
    auto ecdf = [&](const std::string& name, const char* col, auto value, auto cdf) {
        std::vector<double> v;
        for (const auto& r : recs) v.push_back(value(r));
        std::sort(v.begin(), v.end());
        io::CsvWriter w(dir / name, rep.config);
        w.row(col, "empirical_cdf", "limit_cdf");
        for (std::size_t i = 0; i < v.size(); ++i) {
            w.row(v[i], static_cast<double>(i + 1) / static_cast<double>(v.size()), cdf(v[i]));
        }
    };
    std::vector<double> sorted_limit(out.limit_draws);
    std::sort(sorted_limit.begin(), sorted_limit.end());
    ecdf("ecdf_z.csv", "z", [](const ReplicationRecord& r) { return r.z; }, [&](double z) {
        if (sorted_limit.empty()) return limit.gaussian_cdf(z);
        const auto it = std::upper_bound(sorted_limit.begin(), sorted_limit.end(), z);
        return static_cast<double>(it - sorted_limit.begin()) / static_cast<double>(sorted_limit.size());
    });
    ecdf("ecdf_overshoot.csv", "overshoot", [](const ReplicationRecord& r) { return r.overshoot; },
         [&](double v) { return eta.cdf(v / c); });
    ecdf("ecdf_age.csv", "age", [](const ReplicationRecord& r) { return r.age; },
         [&](double v) { return v <= 0.0 ? 0.0 : age.tabulated_cdf(v); });
}

} // namespace gridrv
