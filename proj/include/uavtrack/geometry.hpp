#ifndef UAVTRACK_GEOMETRY_HPP
#define UAVTRACK_GEOMETRY_HPP

#include <cmath>
#include <numbers>
#include <optional>

#include <Eigen/Core>

#include <uavtrack/errors.hpp>

namespace uavtrack {

/// Reference frames: n is the ground (geodetic) frame centred on the GS,
/// u is parallel to n but centred on the UAV, a is the UAV's array frame.
enum class Frame { n, u, a };

struct Position3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    Frame frame = Frame::n;

    Eigen::Vector3d vector() const { return {x, y, z}; }

    static Position3 from(const Eigen::Vector3d& v, Frame f = Frame::n) { return {v.x(), v.y(), v.z(), f}; }
};

/// Euler attitude in radians (yaw about z, pitch about y, roll about x).
struct Attitude {
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;
};

/// Direction cosines of the GS-to-UAV bearing on the UPA axes, plus the
/// optional departure angle on the UAV's ULA.
struct SpatialAngles {
    double u = 0.0;
    double v = 0.0;
    std::optional<double> departure;
};

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::remainder(a, two_pi);
    if (a <= -std::numbers::pi)
        a += two_pi;
    return a;
}

inline Eigen::Matrix3d yaw_rotation(double alpha)
{
    const double c = std::cos(alpha), s = std::sin(alpha);
    Eigen::Matrix3d t;
    t << c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0;
    return t;
}

inline Eigen::Matrix3d pitch_rotation(double beta)
{
    const double c = std::cos(beta), s = std::sin(beta);
    Eigen::Matrix3d t;
    t << c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c;
    return t;
}

inline Eigen::Matrix3d roll_rotation(double gamma)
{
    const double c = std::cos(gamma), s = std::sin(gamma);
    Eigen::Matrix3d t;
    t << 1.0, 0.0, 0.0, 0.0, c, s, 0.0, -s, c;
    return t;
}

/// Coordinate transform from the u-frame to the a-frame: roll * pitch * yaw.
inline Eigen::Matrix3d rotation_matrix(const Attitude& att)
{
    return roll_rotation(att.roll) * pitch_rotation(att.pitch) * yaw_rotation(att.yaw);
}

/// Spatial arrival angles (u, v) of a UAV seen from the GS array.
inline SpatialAngles arrival_angles(const Position3& uav, const Position3& gs)
{
    const double dx = uav.x - gs.x;
    const double dy = uav.y - gs.y;
    const double dh = uav.z - gs.z;
    const double r = std::sqrt(dx * dx + dy * dy + dh * dh);
    if (!(r > 0.0))
        throw CoincidentPointsError("arrival_angles: UAV and GS positions coincide");
    return {dx / r, dy / r, std::nullopt};
}

/// Departure angle u_a on the UAV's ULA for a GS at `gs_in_u` (GS position
/// relative to the UAV, u-frame axes).
///
/// The a-frame is reached by rotating through the total heading
/// (heading + att.yaw) and then the pitch and roll of `att`. The rotation is
/// applied with a negated yaw so that u_a = cos(azimuth + heading).
inline double departure_angle(const Position3& gs_in_u, double heading, const Attitude& att)
{
    const Attitude total{-(heading + att.yaw), att.pitch, att.roll};
    const Eigen::Vector3d g = rotation_matrix(total) * gs_in_u.vector();
    const double horizontal = std::hypot(g.x(), g.y());
    if (!(horizontal > 1e-12 * g.norm()))
        throw DegenerateGeometryError("departure_angle: GS projects onto the array-frame origin");
    return g.x() / horizontal;
}

struct HorizontalPosition {
    double x = 0.0;
    double y = 0.0;
};

/// Inverse of arrival_angles for a known height difference `dh` > 0.
inline HorizontalPosition position_from_angles(double u, double v, double dh)
{
    const double s = u * u + v * v;
    if (!(s < 1.0))
        throw HorizonError("position_from_angles: u^2 + v^2 must be < 1");
    if (!(dh > 0.0))
        throw InvalidArgumentError("position_from_angles: height difference must be positive");
    const double c = std::sqrt(1.0 - s);
    return {u * dh / c, v * dh / c};
}

} // namespace uavtrack

#endif
