#ifndef UAVTRACK_MOBILITY_HPP
#define UAVTRACK_MOBILITY_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <uavtrack/errors.hpp>
#include <uavtrack/geometry.hpp>
#include <uavtrack/rng.hpp>

namespace uavtrack {

/// True UAV kinematics at one communication block.
struct FlightState {
    Position3 position;
    double speed = 0.0;   // m/s
    double heading = 0.0; // rad, course over ground
    Attitude attitude;
    int block = 0;
};

/// How the Gauss-Markov process noise variance is scaled.
///  - stationary: (1 - rho^2) * sigma^2, so the unclamped process keeps variance sigma^2
///  - literal:    (1 - rho^2 / 2) * sigma^2
enum class NoiseVariance { stationary, literal };

struct MobilityConfig {
    double rho = 0.99;
    double speed_sigma = 5.0;   // m/s
    double heading_sigma = 0.3; // rad
    double yaw_sigma = 0.0;     // rad, per-block attitude yaw perturbation
    NoiseVariance variance = NoiseVariance::stationary;
    double block_period = 0.01; // s
    double speed_min = 40.0 / 3.6;
    double speed_max = 160.0 / 3.6;
    bool clamp_speed = true;
    double x_min = 10.0, x_max = 100.0;
    double y_min = 10.0, y_max = 100.0;
    double height = 200.0;

    void validate() const
    {
        if (!(rho > 0.0 && rho <= 1.0))
            throw InvalidArgumentError("mobility: rho must lie in (0, 1]");
        if (!(block_period > 0.0))
            throw InvalidArgumentError("mobility: block period must be positive");
        if (speed_sigma < 0.0 || heading_sigma < 0.0 || yaw_sigma < 0.0)
            throw InvalidArgumentError("mobility: noise scales must be non-negative");
        if (speed_min > speed_max || x_min > x_max || y_min > y_max)
            throw InvalidArgumentError("mobility: bounds are inverted");
    }

    double noise_scale() const
    {
        const double factor = variance == NoiseVariance::stationary ? 1.0 - rho * rho : 1.0 - rho * rho / 2.0;
        return std::sqrt(std::max(0.0, factor));
    }
};

/// One block of first-order Gauss-Markov motion.
///
/// Position advances with the velocity held during block k; speed and
/// heading then decay by rho and pick up fresh process noise.
inline FlightState step(const FlightState& s, const MobilityConfig& cfg, Rng& rng)
{
    FlightState next = s;
    next.position.x += cfg.block_period * s.speed * std::cos(s.heading);
    next.position.y += cfg.block_period * s.speed * std::sin(s.heading);

    const double scale = cfg.noise_scale();
    next.speed = cfg.rho * s.speed + scale * cfg.speed_sigma * rng.normal();
    if (cfg.clamp_speed)
        next.speed = std::clamp(next.speed, cfg.speed_min, cfg.speed_max);
    next.heading = wrap_angle(cfg.rho * s.heading + scale * cfg.heading_sigma * rng.normal());
    if (cfg.yaw_sigma > 0.0)
        next.attitude.yaw = wrap_angle(s.attitude.yaw + cfg.yaw_sigma * rng.normal());
    next.block = s.block + 1;
    return next;
}

inline FlightState sample_initial(const MobilityConfig& cfg, Rng& rng)
{
    FlightState s;
    s.position = {rng.uniform(cfg.x_min, cfg.x_max), rng.uniform(cfg.y_min, cfg.y_max), cfg.height, Frame::n};
    s.speed = rng.uniform(cfg.speed_min, cfg.speed_max);
    // uniform() is in [0, 1), so pi - 2*pi*U is in (-pi, pi].
    s.heading = std::numbers::pi - 2.0 * std::numbers::pi * rng.uniform();
    s.block = 0;
    return s;
}

inline std::vector<FlightState> simulate_trajectory(const MobilityConfig& cfg, int blocks, Rng& rng)
{
    std::vector<FlightState> out;
    if (blocks <= 0)
        return out;
    out.reserve(static_cast<std::size_t>(blocks));
    out.push_back(sample_initial(cfg, rng));
    for (int k = 1; k < blocks; ++k)
        out.push_back(step(out.back(), cfg, rng));
    return out;
}

} // namespace uavtrack

#endif
