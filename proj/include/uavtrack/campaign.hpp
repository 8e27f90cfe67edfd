#ifndef UAVTRACK_CAMPAIGN_HPP
#define UAVTRACK_CAMPAIGN_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <uavtrack/beamforming.hpp>
#include <uavtrack/channel.hpp>
#include <uavtrack/config.hpp>
#include <uavtrack/errors.hpp>
#include <uavtrack/geometry.hpp>
#include <uavtrack/metrics.hpp>
#include <uavtrack/mobility.hpp>
#include <uavtrack/rng.hpp>
#include <uavtrack/sensors.hpp>
#include <uavtrack/tracking.hpp>

namespace uavtrack {

inline constexpr int schema_version = 1;

/// Truth and sensor readings of one trial, shared by every scheme.
struct TrialScenario {
    std::vector<FlightState> truth;
    std::vector<BlockReadings> readings;
    std::vector<double> phases; // small-scale phase per block
    std::uint64_t key = 0;
};

// Stream labels under a trial key.
namespace stream {
inline constexpr std::uint64_t trajectory = 0;
inline constexpr std::uint64_t sensors = 1;
inline constexpr std::uint64_t phase = 2;
inline constexpr std::uint64_t pilots = 3;
} // namespace stream

inline TrialScenario make_trial(const ScenarioConfig& cfg, int trial)
{
    TrialScenario t;
    t.key = derive_key(cfg.campaign.seed, {static_cast<std::uint64_t>(trial)});
    MobilityConfig mob = cfg.mobility;
    mob.block_period = cfg.schedule.block_period;
    Rng traj(derive_key(t.key, {stream::trajectory}));
    t.truth = simulate_trajectory(mob, cfg.campaign.blocks, traj);
    t.readings = record_sensors(t.truth, cfg.schedule, cfg.sensors, derive_key(t.key, {stream::sensors}));
    Rng ph(derive_key(t.key, {stream::phase}));
    t.phases.reserve(t.truth.size());
    for (std::size_t k = 0; k < t.truth.size(); ++k)
        t.phases.push_back(cfg.channel.random_phase ? 2.0 * std::numbers::pi * ph.uniform() : 0.0);
    return t;
}

/// Runs one scheme over every block of a trial.
inline std::vector<BlockMetrics> run_scheme(const ScenarioConfig& cfg, const TrialScenario& sc, int trial,
                                            Scheme scheme, double snr_db, int phase_bits)
{
    EstimatorConfig est = cfg.estimator;
    est.scheme = scheme;
    est.phase_bits = phase_bits;
    const Position3& gs = cfg.ground;
    const double dh = cfg.mobility.height - gs.z;
    const double peak = cfg.array.peak_gain();

    TrackState track;
    std::optional<SensorReading> egi;
    std::vector<BlockMetrics> rows;
    rows.reserve(sc.truth.size());
    for (std::size_t k = 0; k < sc.truth.size(); ++k) {
        const FlightState& s = sc.truth[k];
        if (sc.readings[k].egi)
            egi = sc.readings[k].egi;
        if (!egi)
            throw UninitializedTrackError("run_scheme: no EGI reading before the first pilot");
        predict_position(track, sc.readings[k].gps, cfg.schedule.block_period);
        const SpatialAngles seed = baseline_gps_only(track, gs, cfg.mobility.height);

        SpatialAngles truth = arrival_angles(s.position, gs);
        const Position3 gs_rel{gs.x - s.position.x, gs.y - s.position.y, gs.z - s.position.z, Frame::u};
        truth.departure = departure_angle(gs_rel, s.heading, s.attitude);
        const Precoder f = build_precoder(*egi, gs, cfg.array.nu);

        LinkBudget budget = LinkBudget::from_snr_db(snr_db, cfg.channel.symbol_energy);
        budget.mode = cfg.channel.mode;
        budget.antenna_gain = cfg.channel.antenna_gain;
        budget.path_loss_exponent = cfg.channel.path_loss_exponent;
        budget.distance = (s.position.vector() - gs.vector()).norm();
        budget.mu = std::polar(1.0, sc.phases[k]);
        const EffectiveChannel h = effective_channel(truth, f.weights, budget, cfg.array);
        PilotSounder sounder(h, budget, cfg.array, derive_key(sc.key, {stream::pilots, k}), cfg.channel.shared_noise);

        Refinement r;
        switch (scheme) {
        case Scheme::hybrid_gpr: r = refine_hybrid(sounder, seed, est); break;
        case Scheme::analog_gpr: r = refine_analog(sounder, seed, est); break;
        case Scheme::perturbation: r = baseline_perturbation(sounder, seed, est); break;
        case Scheme::codebook_max: r = baseline_codebook(sounder, seed, est); break;
        case Scheme::gps_only: r.estimate = seed; break;
        }

        if (scheme == Scheme::gps_only) {
            track.fused = track.predicted;
            track.angles = seed;
        } else {
            try {
                fuse_position(track, r.estimate, gs, dh);
            } catch (const HorizonError&) {
                track.fused = track.predicted;
            }
        }
        track.iterations = r.iterations;
        track.measurements = r.measurements;

        const CVector w = steer_weights(r.estimate.u, r.estimate.v, cfg.array,
                                        analog_only(scheme) ? std::optional<int>(phase_bits) : std::nullopt)
                              .weights;
        BlockMetrics m;
        m.trial = trial;
        m.block = s.block;
        m.scheme = std::string(scheme_name(scheme));
        m.snr_db = snr_db;
        m.phase_bits = phase_bits;
        m.true_x = s.position.x;
        m.true_y = s.position.y;
        m.true_u = truth.u;
        m.true_v = truth.v;
        m.est_x = track.fused.x;
        m.est_y = track.fused.y;
        m.est_u = r.estimate.u;
        m.est_v = r.estimate.v;
        m.gain = realized_gain(w, h);
        m.norm_gain = m.gain / peak;
        const double xi2 = std::norm(h.path_gain);
        m.link_snr = budget.symbol_energy * xi2 / budget.noise_variance;
        m.se = spectral_efficiency(m.gain * std::sqrt(xi2), budget.symbol_energy, budget.noise_variance);
        m.iterations = r.iterations;
        m.measurements = r.measurements;
        rows.push_back(std::move(m));
    }
    return rows;
}

/// All rows of one trial, ordered by SNR, phase bits, scheme, block.
inline std::vector<BlockMetrics> run_trial(const ScenarioConfig& cfg, int trial)
{
    const TrialScenario sc = make_trial(cfg, trial);
    std::vector<BlockMetrics> rows;
    for (double snr : cfg.campaign.snr_db)
        for (int bits : cfg.campaign.phase_bits)
            for (Scheme s : cfg.campaign.schemes) {
                std::vector<BlockMetrics> part = run_scheme(cfg, sc, trial, s, snr, bits);
                rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
            }
    return rows;
}

/// Runs every trial, in parallel if configured; rows come back sorted by
/// trial id whatever the completion order.
inline std::vector<BlockMetrics> run_trials(const ScenarioConfig& cfg)
{
    cfg.validate();
    const int n = cfg.campaign.trials;
    std::vector<std::vector<BlockMetrics>> per_trial(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int t = next++; t < n; t = next++) {
            try {
                per_trial[static_cast<std::size_t>(t)] = run_trial(cfg, t);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = n;
            }
        }
    };
    const int threads = std::min(cfg.campaign.threads, n);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i)
            pool.emplace_back(worker);
        for (std::thread& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    std::vector<BlockMetrics> rows;
    for (auto& part : per_trial)
        rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    return rows;
}

/// One line of the summary table.
struct SummaryRow {
    std::string scope; // campaign | block
    std::string scheme;
    double snr_db = 0.0;
    int phase_bits = 0;
    std::optional<int> block;
    Aggregate stats;
};

/// Campaign-level rows per (scheme, SNR, phase bits), followed by per-block
/// rows, in configuration order.
inline std::vector<SummaryRow> summarize(const std::vector<BlockMetrics>& rows, const ScenarioConfig& cfg)
{
    using Key = std::tuple<std::string, double, int>;
    std::map<Key, std::vector<BlockMetrics>> groups;
    std::map<std::tuple<std::string, double, int, int>, std::vector<BlockMetrics>> blocks;
    for (const BlockMetrics& r : rows) {
        groups[{r.scheme, r.snr_db, r.phase_bits}].push_back(r);
        blocks[{r.scheme, r.snr_db, r.phase_bits, r.block}].push_back(r);
    }
    std::vector<SummaryRow> out;
    for (const char* scope : {"campaign", "block"}) {
        for (double snr : cfg.campaign.snr_db)
            for (int bits : cfg.campaign.phase_bits)
                for (Scheme s : cfg.campaign.schemes) {
                    const std::string name(scheme_name(s));
                    if (std::string(scope) == "campaign") {
                        const auto it = groups.find({name, snr, bits});
                        if (it != groups.end())
                            out.push_back({scope, name, snr, bits, std::nullopt, campaign_aggregate(it->second, cfg.array)});
                        continue;
                    }
                    for (int k = 0; k < cfg.campaign.blocks; ++k) {
                        const auto it = blocks.find({name, snr, bits, k});
                        if (it != blocks.end())
                            out.push_back({scope, name, snr, bits, k, campaign_aggregate(it->second, cfg.array)});
                    }
                }
    }
    return out;
}

namespace csv {

inline std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

/// Writes to `path.tmp` and renames over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content)
{
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out)
            throw IoError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

inline const char* trace_header =
    "schema_version,trial,block,scheme,snr_db,phase_bits,true_x,true_y,true_u,true_v,est_x,est_y,est_u,est_v,"
    "gain,norm_gain,se,iterations,measurements\n";

inline const char* summary_header =
    "schema_version,scope,scheme,snr_db,phase_bits,block,mse,mse_u,mse_v,mae,mae_u,mae_v,mean_gain,mean_norm_gain,"
    "mean_se,predicted_gain,predicted_se,se_gap,mean_iterations,mean_measurements,mean_pos_err,rows,trials,blocks,"
    "seed\n";

} // namespace csv

inline std::string trace_csv(const std::vector<BlockMetrics>& rows)
{
    std::string out = csv::trace_header;
    for (const BlockMetrics& r : rows) {
        out += std::to_string(schema_version) + ',' + std::to_string(r.trial) + ',' + std::to_string(r.block) + ',' +
               r.scheme + ',' + csv::num(r.snr_db) + ',' + std::to_string(r.phase_bits);
        for (double v : {r.true_x, r.true_y, r.true_u, r.true_v, r.est_x, r.est_y, r.est_u, r.est_v, r.gain,
                         r.norm_gain, r.se})
            out += ',' + csv::num(v);
        out += ',' + std::to_string(r.iterations) + ',' + std::to_string(r.measurements) + '\n';
    }
    return out;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows, const ScenarioConfig& cfg)
{
    std::string out = csv::summary_header;
    for (const SummaryRow& r : rows) {
        const Aggregate& a = r.stats;
        out += std::to_string(schema_version) + ',' + r.scope + ',' + r.scheme + ',' + csv::num(r.snr_db) + ',' +
               std::to_string(r.phase_bits) + ',' + (r.block ? std::to_string(*r.block) : std::string());
        for (double v : {a.mse, a.mse_u, a.mse_v, a.mae, a.mae_u, a.mae_v, a.mean_gain, a.mean_norm_gain, a.mean_se})
            out += ',' + csv::num(v);
        out += ',' + csv::opt(a.predicted_gain) + ',' + csv::opt(a.predicted_se) + ',' + csv::opt(a.se_gap);
        for (double v : {a.mean_iterations, a.mean_measurements, a.mean_position_error})
            out += ',' + csv::num(v);
        out += ',' + std::to_string(a.rows) + ',' + std::to_string(cfg.campaign.trials) + ',' +
               std::to_string(cfg.campaign.blocks) + ',' + std::to_string(cfg.campaign.seed) + '\n';
    }
    return out;
}

struct CampaignOutputs {
    std::filesystem::path trace;
    std::filesystem::path summary;
    std::vector<BlockMetrics> rows;
    std::vector<SummaryRow> summary_rows;
};

/// Runs the campaign and writes trace.csv and summary.csv into `out_dir`.
inline CampaignOutputs run_campaign(const ScenarioConfig& cfg, const std::filesystem::path& out_dir)
{
    CampaignOutputs o;
    o.rows = run_trials(cfg);
    o.summary_rows = summarize(o.rows, cfg);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());
    o.trace = out_dir / "trace.csv";
    o.summary = out_dir / "summary.csv";
    csv::write_atomic(o.trace, trace_csv(o.rows));
    csv::write_atomic(o.summary, summary_csv(o.summary_rows, cfg));
    return o;
}

} // namespace uavtrack

#endif
