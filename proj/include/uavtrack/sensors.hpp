#ifndef UAVTRACK_SENSORS_HPP
#define UAVTRACK_SENSORS_HPP

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include <uavtrack/errors.hpp>
#include <uavtrack/geometry.hpp>
#include <uavtrack/mobility.hpp>
#include <uavtrack/rng.hpp>

namespace uavtrack {

struct SensorNoiseConfig {
    double gps_sigma = 2.0;                                    // m, ground GPS unit, per axis
    double ins_position_sigma = 1.0;                           // m, on-board EGI, per axis
    double ins_heading_sigma = 0.01 * std::numbers::pi / 180.0; // rad

    void validate() const
    {
        if (gps_sigma < 0.0 || ins_position_sigma < 0.0 || ins_heading_sigma < 0.0)
            throw InvalidArgumentError("sensors: noise standard deviations must be non-negative");
    }
};

/// Pilot, EGI and ground-GPS clocks. Sensor periods are integer multiples of
/// the pilot period.
struct Schedule {
    double block_period = 0.01;
    double gps_period = 0.05;
    double ins_period = 0.02;

    void validate() const
    {
        if (!(block_period > 0.0))
            throw InvalidArgumentError("schedule: block period must be positive");
        if (!(block_period <= ins_period && ins_period <= gps_period))
            throw InvalidArgumentError("schedule: need block period <= INS period <= GPS period");
        for (double p : {gps_period, ins_period}) {
            const double r = p / block_period;
            if (std::abs(r - std::round(r)) > 1e-6)
                throw InvalidArgumentError("schedule: sensor periods must be integer multiples of the block period");
        }
    }

    int gps_every() const { return static_cast<int>(std::lround(gps_period / block_period)); }
    int ins_every() const { return static_cast<int>(std::lround(ins_period / block_period)); }
    bool gps_due(int block) const { return block % gps_every() == 0; }
    bool ins_due(int block) const { return block % ins_every() == 0; }
};

enum class SensorKind { ground_gps, egi };

struct SensorReading {
    SensorKind kind = SensorKind::ground_gps;
    int block = 0;
    Position3 position;
    std::optional<Eigen::Vector2d> velocity; // ground_gps only
    std::optional<double> heading;           // egi only, includes attitude yaw
    Attitude attitude;                       // egi only: pitch and roll passed through

    double speed() const { return velocity ? velocity->norm() : 0.0; }
};

/// Ground GPS fix. Velocity is the finite difference against `previous`
/// (the last fix); without one it is zero.
inline SensorReading ground_gps_measure(const FlightState& s, const SensorNoiseConfig& cfg, Rng& rng,
                                        const SensorReading* previous = nullptr, double block_period = 0.01)
{
    SensorReading r;
    r.kind = SensorKind::ground_gps;
    r.block = s.block;
    r.position = s.position;
    r.position.x += cfg.gps_sigma * rng.normal();
    r.position.y += cfg.gps_sigma * rng.normal();
    Eigen::Vector2d vel = Eigen::Vector2d::Zero();
    if (previous != nullptr && previous->block < s.block) {
        const double dt = (s.block - previous->block) * block_period;
        vel = Eigen::Vector2d(r.position.x - previous->position.x, r.position.y - previous->position.y) / dt;
    }
    r.velocity = vel;
    return r;
}

/// On-board GPS/INS reading: noisy position and heading (course plus yaw).
inline SensorReading egi_measure(const FlightState& s, const SensorNoiseConfig& cfg, Rng& rng)
{
    SensorReading r;
    r.kind = SensorKind::egi;
    r.block = s.block;
    r.position = s.position;
    r.position.x += cfg.ins_position_sigma * rng.normal();
    r.position.y += cfg.ins_position_sigma * rng.normal();
    r.heading = wrap_angle(s.heading + s.attitude.yaw + cfg.ins_heading_sigma * rng.normal());
    r.attitude = {0.0, s.attitude.pitch, s.attitude.roll};
    return r;
}

/// Readings available at one block; at most one of each kind.
struct BlockReadings {
    std::optional<SensorReading> gps;
    std::optional<SensorReading> egi;
};

/// Samples every reading of a trajectory according to the schedule. Each
/// sensor draws from its own stream so adding blocks never perturbs earlier
/// readings of the other sensor.
inline std::vector<BlockReadings> record_sensors(const std::vector<FlightState>& truth, const Schedule& schedule,
                                                 const SensorNoiseConfig& noise, std::uint64_t key)
{
    Rng gps_rng(derive_key(key, {1}));
    Rng egi_rng(derive_key(key, {2}));
    std::vector<BlockReadings> out(truth.size());
    std::optional<SensorReading> last_fix;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const FlightState& s = truth[i];
        if (schedule.gps_due(s.block)) {
            out[i].gps = ground_gps_measure(s, noise, gps_rng, last_fix ? &*last_fix : nullptr, schedule.block_period);
            last_fix = out[i].gps;
        }
        if (schedule.ins_due(s.block))
            out[i].egi = egi_measure(s, noise, egi_rng);
    }
    return out;
}

} // namespace uavtrack

#endif
