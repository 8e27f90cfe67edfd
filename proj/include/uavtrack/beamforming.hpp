#ifndef UAVTRACK_BEAMFORMING_HPP
#define UAVTRACK_BEAMFORMING_HPP

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include <uavtrack/channel.hpp>
#include <uavtrack/errors.hpp>
#include <uavtrack/geometry.hpp>
#include <uavtrack/sensors.hpp>

namespace uavtrack {

/// UAV-side ULA precoder steered at departure angle `steered`.
struct Precoder {
    CVector weights;
    double steered = 0.0;
};

/// f = a_u(u_a) / sqrt(nu), so that a_u(u_a)^H f = sqrt(nu).
inline Precoder steer_precoder(double ua, int nu)
{
    return {steering_ula(ua, nu) / std::sqrt(static_cast<double>(nu)), ua};
}

/// Precoder from the latest EGI reading: departure angle toward `gs` computed
/// from the measured UAV position and heading.
inline Precoder build_precoder(const SensorReading& egi, const Position3& gs, int nu)
{
    if (egi.kind != SensorKind::egi || !egi.heading)
        throw InvalidArgumentError("build_precoder: needs an EGI reading with heading");
    const Position3 rel{gs.x - egi.position.x, gs.y - egi.position.y, gs.z - egi.position.z, Frame::u};
    return steer_precoder(departure_angle(rel, *egi.heading, egi.attitude), nu);
}

/// How the grid step follows from the phase-shifter resolution l.
///  - literal:       2*pi / 2^l taken directly in spatial-angle units
///  - phase_over_pi: 2 / 2^l, the phase step divided by pi
enum class GridStep { literal, phase_over_pi };

inline double grid_step(int phase_bits, GridStep rule = GridStep::literal)
{
    if (phase_bits < 1)
        throw InvalidArgumentError("grid_step: phase bits must be >= 1");
    const double levels = std::ldexp(1.0, phase_bits);
    return rule == GridStep::literal ? 2.0 * std::numbers::pi / levels : 2.0 / levels;
}

/// Half-width of the candidate box: the null-to-null main-lobe width 2/N.
inline double main_lobe_half_width(int n) { return 2.0 / n; }

/// Grid of candidate beam directions around a GPS-derived centre.
struct CandidateSet {
    SpatialAngles center;
    double half_width_u = 0.0;
    double half_width_v = 0.0;
    double step = 0.0;
    std::vector<double> u_axis;
    std::vector<double> v_axis;
    std::vector<SpatialAngles> points; // flat index = iu * v_axis.size() + iv

    std::size_t size() const { return points.size(); }
};

namespace detail {
inline std::vector<double> grid_axis(double center, double half_width, double step)
{
    // Count from the colon range [c - B : step : c + B]; the small slack keeps
    // an exact multiple (e.g. step == 2B) from losing its endpoint.
    const int count = static_cast<int>(std::floor(2.0 * half_width / step + 1e-9)) + 1;
    std::vector<double> axis;
    axis.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double p = center - half_width + i * step;
        if (p >= -1.0 && p <= 1.0)
            axis.push_back(p);
    }
    return axis;
}
} // namespace detail

/// Points outside [-1, 1] on either axis are dropped.
inline CandidateSet candidate_set(double u, double v, double half_width_u, double half_width_v, double step)
{
    if (!(half_width_u > 0.0 && half_width_v > 0.0))
        throw InvalidArgumentError("candidate_set: half-width must be positive");
    if (!(step > 0.0))
        throw InvalidArgumentError("candidate_set: grid step must be positive");
    CandidateSet set;
    set.center = {u, v, std::nullopt};
    set.half_width_u = half_width_u;
    set.half_width_v = half_width_v;
    set.step = step;
    set.u_axis = detail::grid_axis(u, half_width_u, step);
    set.v_axis = detail::grid_axis(v, half_width_v, step);
    if (set.u_axis.empty() || set.v_axis.empty())
        throw EmptyCandidateSetError("candidate_set: grid is empty after clipping to [-1, 1]");
    set.points.reserve(set.u_axis.size() * set.v_axis.size());
    for (double pu : set.u_axis)
        for (double pv : set.v_axis)
            set.points.push_back({pu, pv, std::nullopt});
    return set;
}

inline CandidateSet candidate_set(double u, double v, double half_width, double step)
{
    return candidate_set(u, v, half_width, half_width, step);
}

/// GS combining weights steered at (u, v).
struct BeamWeights {
    CVector weights;
    SpatialAngles steered;
    bool quantized = false;
    int phase_bits = 0;
};

/// w = w_x(u) (x) w_y(v), unit norm. With `phase_bits`, each element phase is
/// rounded to the nearest multiple of 2*pi / 2^l.
inline BeamWeights steer_weights(double u, double v, const ArrayConfig& cfg, std::optional<int> phase_bits = {})
{
    BeamWeights b;
    b.steered = {u, v, std::nullopt};
    b.quantized = phase_bits.has_value();
    b.phase_bits = phase_bits.value_or(0);
    const double amp = 1.0 / std::sqrt(static_cast<double>(cfg.gs_elements()));
    const double q = b.quantized ? 2.0 * std::numbers::pi / std::ldexp(1.0, b.phase_bits) : 0.0;
    b.weights.resize(cfg.gs_elements());
    for (int m = 0; m < cfg.nx; ++m) {
        for (int n = 0; n < cfg.ny; ++n) {
            double phase = -std::numbers::pi * (m * u + n * v);
            if (b.quantized)
                phase = q * std::round(phase / q);
            b.weights[m * cfg.ny + n] = std::polar(amp, phase);
        }
    }
    return b;
}

} // namespace uavtrack

#endif
