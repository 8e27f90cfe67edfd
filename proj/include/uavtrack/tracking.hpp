#ifndef UAVTRACK_TRACKING_HPP
#define UAVTRACK_TRACKING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include <uavtrack/beamforming.hpp>
#include <uavtrack/channel.hpp>
#include <uavtrack/errors.hpp>
#include <uavtrack/geometry.hpp>
#include <uavtrack/gpr.hpp>
#include <uavtrack/sensors.hpp>

namespace uavtrack {

enum class Scheme { hybrid_gpr, analog_gpr, gps_only, perturbation, codebook_max };

inline std::string_view scheme_name(Scheme s)
{
    switch (s) {
    case Scheme::hybrid_gpr: return "hybrid_gpr";
    case Scheme::analog_gpr: return "analog_gpr";
    case Scheme::gps_only: return "gps_only";
    case Scheme::perturbation: return "perturbation";
    case Scheme::codebook_max: return "codebook_max";
    }
    return "unknown";
}

inline Scheme parse_scheme(std::string_view name)
{
    for (Scheme s : {Scheme::hybrid_gpr, Scheme::analog_gpr, Scheme::gps_only, Scheme::perturbation,
                     Scheme::codebook_max})
        if (scheme_name(s) == name)
            return s;
    throw InvalidArgumentError("unknown scheme '" + std::string(name) + "'");
}

/// Schemes whose data beam goes through the quantized phase shifters.
inline bool analog_only(Scheme s) { return s == Scheme::analog_gpr || s == Scheme::codebook_max; }

struct EstimatorConfig {
    Scheme scheme = Scheme::hybrid_gpr;
    double step_size = 0.01;
    /// Stopping threshold in units of sqrt(E_s) on the received amplitude.
    double tolerance = 1e-3;
    int max_iterations = 50;
    /// Perturbation baseline probe offset; defaults to half the grid step.
    std::optional<double> perturbation_size;
    int phase_bits = 6;
    GridStep grid_rule = GridStep::literal;
    /// Candidate box half-width per axis; defaults to the main-lobe width 2/N.
    std::optional<double> half_width;
    int refit_every = 5;
    bool fit_noise = true;
    /// Move along -g as written in the pseudo-code instead of ascending.
    bool literal_descent = false;
    /// Keep iterating while the change is below the threshold, as written.
    bool literal_loop = false;
    /// Reject ascent steps that lower the posterior mean and halve them.
    bool backtracking = true;
    gpr::FitOptions fit{.max_iterations = 100, .gradient_tolerance = 1e-2};

    void validate() const
    {
        if (!(step_size > 0.0))
            throw InvalidArgumentError("estimator: step size must be positive");
        if (!(tolerance > 0.0))
            throw InvalidArgumentError("estimator: tolerance must be positive");
        if (max_iterations < 0)
            throw InvalidArgumentError("estimator: max iterations must be >= 0");
        if (phase_bits < 1 || phase_bits > 16)
            throw InvalidArgumentError("estimator: phase bits must lie in [1, 16]");
        if (perturbation_size && *perturbation_size < 0.0)
            throw InvalidArgumentError("estimator: perturbation size must be non-negative");
        if (half_width && !(*half_width > 0.0))
            throw InvalidArgumentError("estimator: half-width must be positive");
        if (refit_every < 0)
            throw InvalidArgumentError("estimator: refit interval must be >= 0");
    }

    double grid_step() const { return uavtrack::grid_step(phase_bits, grid_rule); }
};

/// Outcome of one per-block angle refinement.
struct Refinement {
    SpatialAngles estimate;
    int iterations = 0;
    std::uint64_t measurements = 0;
    /// The beamspace carried no usable gradient and the seed was returned.
    bool fallback = false;
};

namespace detail {

struct Box {
    double u_lo, u_hi, v_lo, v_hi;
};

inline Box candidate_box(const SpatialAngles& seed, double hwu, double hwv)
{
    return {seed.u - hwu, seed.u + hwu, seed.v - hwv, seed.v + hwv};
}

/// Clips to the box, then into the closed unit disk.
inline gpr::Point clip(const gpr::Point& x, const Box& b)
{
    gpr::Point p{std::clamp(x.x(), b.u_lo, b.u_hi), std::clamp(x.y(), b.v_lo, b.v_hi)};
    const double r = p.norm();
    if (r > 1.0)
        p *= (1.0 - 1e-12) / r;
    return p;
}

inline SpatialAngles to_angles(const gpr::Point& x) { return {x.x(), x.y(), std::nullopt}; }

struct GridMeasurements {
    CandidateSet set;
    gpr::Points inputs;
    Eigen::VectorXd outputs; // normalized by the reference amplitude
    Eigen::Index best = 0;
};

inline GridMeasurements measure_grid(PilotSounder& sounder, const SpatialAngles& seed, const EstimatorConfig& cfg,
                                     bool quantized)
{
    const ArrayConfig& array = sounder.array();
    const double hwu = cfg.half_width.value_or(main_lobe_half_width(array.nx));
    const double hwv = cfg.half_width.value_or(main_lobe_half_width(array.ny));
    GridMeasurements g{candidate_set(seed.u, seed.v, hwu, hwv, cfg.grid_step()), {}, {}, 0};

    std::vector<CVector> beams;
    beams.reserve(g.set.size());
    for (const SpatialAngles& p : g.set.points)
        beams.push_back(steer_weights(p.u, p.v, array, quantized ? std::optional<int>(cfg.phase_bits) : std::nullopt).weights);
    const std::vector<double> y = sounder.measure(std::span<const CVector>(beams));

    const double ref = sounder.reference_amplitude();
    const auto n = static_cast<Eigen::Index>(g.set.size());
    g.inputs.resize(n, 2);
    g.outputs.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        g.inputs(i, 0) = g.set.points[i].u;
        g.inputs(i, 1) = g.set.points[i].v;
        g.outputs[i] = y[i] / ref;
        if (g.outputs[i] > g.outputs[g.best])
            g.best = i; // strict: the lowest index wins ties
    }
    return g;
}

inline gpr::FitOptions fit_options(const EstimatorConfig& cfg)
{
    gpr::FitOptions o = cfg.fit;
    o.fit_noise = cfg.fit_noise;
    return o;
}

inline gpr::GprModel fit_model(const gpr::Points& x, const Eigen::VectorXd& y, const gpr::Hyperparams& init,
                               const EstimatorConfig& cfg)
{
    const gpr::FitResult fit = gpr::fit_hyperparams(x, y, init, fit_options(cfg));
    return gpr::GprModel(x, y, fit.hyperparams);
}

inline bool flat(const Eigen::VectorXd& y) { return y.maxCoeff() - y.minCoeff() < 1e-12; }

inline bool stop(double change, double eps, bool literal_loop)
{
    const bool small = std::abs(change) < eps;
    return literal_loop ? !small : small;
}

/// One gradient move on the posterior mean. With backtracking the step is
/// halved until the mean does not decrease (at most 20 halvings).
inline gpr::Point move(const gpr::GprModel& model, const gpr::Point& x, const EstimatorConfig& cfg, const Box& box)
{
    const gpr::Point g = model.mean_gradient(x);
    const gpr::Point dir = cfg.literal_descent ? gpr::Point(-g) : g;
    double eta = cfg.step_size;
    gpr::Point next = clip(x + eta * dir, box);
    if (!cfg.backtracking || cfg.literal_descent)
        return next;
    const double f0 = model.mean(x);
    for (int i = 0; i < 20 && model.mean(next) < f0; ++i) {
        eta *= 0.5;
        next = clip(x + eta * dir, box);
    }
    return model.mean(next) < f0 ? x : next;
}

/// Amplitude threshold converted into reference-normalized units.
inline double normalized_tolerance(const EstimatorConfig& cfg, const PilotSounder& sounder)
{
    return cfg.tolerance * std::sqrt(sounder.budget().symbol_energy) / sounder.reference_amplitude();
}

} // namespace detail

/// GPR refinement with a fully digital (hybrid) receiver: one new pilot per
/// iteration at the current off-grid iterate, appended to the training set.
inline Refinement refine_hybrid(PilotSounder& sounder, const SpatialAngles& seed, const EstimatorConfig& cfg)
{
    const std::uint64_t start = sounder.count();
    detail::GridMeasurements g = detail::measure_grid(sounder, seed, cfg, false);
    Refinement r;
    gpr::Point x = g.inputs.row(g.best).transpose();
    r.estimate = detail::to_angles(x);
    r.measurements = sounder.count() - start;
    if (cfg.max_iterations == 0)
        return r;
    if (detail::flat(g.outputs) || g.set.size() < 2) {
        r.estimate = {seed.u, seed.v, std::nullopt};
        r.fallback = true;
        return r;
    }

    const detail::Box box = detail::candidate_box(seed, g.set.half_width_u, g.set.half_width_v);
    const double eps = detail::normalized_tolerance(cfg, sounder);
    const gpr::Hyperparams init = gpr::default_hyperparams(g.outputs, 2.0 * g.set.half_width_u, 2.0 * g.set.half_width_v);
    gpr::GprModel model = detail::fit_model(g.inputs, g.outputs, init, cfg);

    const double ref = sounder.reference_amplitude();
    std::optional<double> previous;
    int appended = 0;
    for (int t = 1; t <= cfg.max_iterations; ++t) {
        const double y = sounder.measure(steer_weights(x.x(), x.y(), sounder.array()).weights) / ref;
        model = model.append(x, y);
        ++appended;
        if (cfg.refit_every > 0 && appended % cfg.refit_every == 0)
            model = detail::fit_model(model.inputs(), model.outputs(), model.hyperparams(), cfg);
        r.iterations = t;
        // The stopping value is the posterior mean at the probed beam: raw
        // magnitudes fluctuate far more than any useful threshold.
        const double f = model.mean(x);
        if (previous && detail::stop(f - *previous, eps, cfg.literal_loop))
            break;
        previous = f;
        if (t == cfg.max_iterations)
            break;
        x = detail::move(model, x, cfg, box);
    }
    r.estimate = detail::to_angles(x);
    r.measurements = sounder.count() - start;
    return r;
}

/// GPR refinement with an analog-only receiver: the quantized grid is the
/// whole training set and the ascent runs on predictions alone.
inline Refinement refine_analog(PilotSounder& sounder, const SpatialAngles& seed, const EstimatorConfig& cfg)
{
    const std::uint64_t start = sounder.count();
    detail::GridMeasurements g = detail::measure_grid(sounder, seed, cfg, true);
    Refinement r;
    r.measurements = sounder.count() - start;
    gpr::Point x = g.inputs.row(g.best).transpose();
    r.estimate = detail::to_angles(x);
    if (cfg.max_iterations == 0)
        return r;
    if (detail::flat(g.outputs) || g.set.size() < 2) {
        r.estimate = {seed.u, seed.v, std::nullopt};
        r.fallback = true;
        return r;
    }

    const detail::Box box = detail::candidate_box(seed, g.set.half_width_u, g.set.half_width_v);
    const double eps = detail::normalized_tolerance(cfg, sounder);
    const gpr::Hyperparams init = gpr::default_hyperparams(g.outputs, 2.0 * g.set.half_width_u, 2.0 * g.set.half_width_v);
    const gpr::GprModel model = detail::fit_model(g.inputs, g.outputs, init, cfg);

    double previous = model.mean(x);
    for (int t = 1; t <= cfg.max_iterations; ++t) {
        x = detail::move(model, x, cfg, box);
        r.iterations = t;
        const double f = model.mean(x);
        if (detail::stop(f - previous, eps, cfg.literal_loop))
            break;
        previous = f;
    }
    r.estimate = detail::to_angles(x);
    return r;
}

/// Gradient ascent on measured power with forward-difference probes at
/// x + d*e_u and x + d*e_v: three pilots per iteration.
inline Refinement baseline_perturbation(PilotSounder& sounder, const SpatialAngles& seed, const EstimatorConfig& cfg)
{
    const std::uint64_t start = sounder.count();
    const ArrayConfig& array = sounder.array();
    const double d = cfg.perturbation_size.value_or(cfg.grid_step() / 2.0);
    const double hwu = cfg.half_width.value_or(main_lobe_half_width(array.nx));
    const double hwv = cfg.half_width.value_or(main_lobe_half_width(array.ny));
    const detail::Box box = detail::candidate_box(seed, hwu, hwv);
    const double eps = detail::normalized_tolerance(cfg, sounder);
    const double ref = sounder.reference_amplitude();

    auto power = [&](const gpr::Point& p) {
        const double a = sounder.measure(steer_weights(p.x(), p.y(), array).weights) / ref;
        return a * a;
    };

    Refinement r;
    gpr::Point x = detail::clip({seed.u, seed.v}, box);
    std::optional<double> previous;
    for (int t = 1; t <= cfg.max_iterations; ++t) {
        const double p0 = power(x);
        const double pu = power(x + gpr::Point(d, 0.0));
        const double pv = power(x + gpr::Point(0.0, d));
        r.iterations = t;
        if (previous && detail::stop(p0 - *previous, eps, cfg.literal_loop))
            break;
        previous = p0;
        gpr::Point grad = gpr::Point::Zero();
        if (d > 0.0)
            grad = gpr::Point(pu - p0, pv - p0) / d;
        if (cfg.literal_descent)
            grad = -grad;
        x = detail::clip(x + cfg.step_size * grad, box);
    }
    r.estimate = detail::to_angles(x);
    r.measurements = sounder.count() - start;
    return r;
}

/// Codeword with the largest measured magnitude on the quantized grid.
inline Refinement baseline_codebook(PilotSounder& sounder, const SpatialAngles& seed, const EstimatorConfig& cfg)
{
    const std::uint64_t start = sounder.count();
    const detail::GridMeasurements g = detail::measure_grid(sounder, seed, cfg, true);
    Refinement r;
    r.estimate = detail::to_angles(g.inputs.row(g.best).transpose());
    r.measurements = sounder.count() - start;
    return r;
}

/// Ground-side track of the UAV horizontal position at the known flight height.
struct TrackState {
    bool initialized = false;
    HorizontalPosition fused;              // p^(k-1), last fused estimate
    Eigen::Vector2d velocity = Eigen::Vector2d::Zero(); // last GPS velocity
    HorizontalPosition predicted;          // p^-(k)
    SpatialAngles angles;                  // last refined angles
    int iterations = 0;
    std::uint64_t measurements = 0;
};

/// Fresh GPS fix replaces the prediction; otherwise dead-reckon from the last
/// fused estimate with the last GPS velocity.
inline HorizontalPosition predict_position(TrackState& track, const std::optional<SensorReading>& gps,
                                           double block_period)
{
    if (gps) {
        track.initialized = true;
        track.predicted = {gps->position.x, gps->position.y};
        track.velocity = gps->velocity.value_or(Eigen::Vector2d::Zero());
        return track.predicted;
    }
    if (!track.initialized)
        throw UninitializedTrackError("predict_position: no GPS fix has been received");
    track.predicted = {track.fused.x + block_period * track.velocity.x(),
                       track.fused.y + block_period * track.velocity.y()};
    return track.predicted;
}

/// Angles toward the predicted position; no pilots.
inline SpatialAngles baseline_gps_only(const TrackState& track, const Position3& gs, double flight_height)
{
    if (!track.initialized)
        throw UninitializedTrackError("baseline_gps_only: no GPS fix has been received");
    return arrival_angles({track.predicted.x, track.predicted.y, flight_height, Frame::n}, gs);
}

/// Position estimate from refined angles; dh = UAV height minus GS height.
inline HorizontalPosition fuse_position(TrackState& track, const SpatialAngles& est, const Position3& gs, double dh)
{
    const HorizontalPosition rel = position_from_angles(est.u, est.v, dh);
    track.fused = {gs.x + rel.x, gs.y + rel.y};
    track.angles = est;
    return track.fused;
}

} // namespace uavtrack

#endif
