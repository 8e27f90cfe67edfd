#ifndef UAVTRACK_CHANNEL_HPP
#define UAVTRACK_CHANNEL_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Core>

#include <uavtrack/errors.hpp>
#include <uavtrack/geometry.hpp>
#include <uavtrack/rng.hpp>

namespace uavtrack {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;

/// GS carries an nx-by-ny UPA, the UAV an nu-element ULA, half-wavelength spacing.
struct ArrayConfig {
    int nx = 8;
    int ny = 8;
    int nu = 8;

    void validate() const
    {
        if (nx < 1 || ny < 1 || nu < 1)
            throw InvalidArgumentError("array: element counts must be >= 1");
    }

    int gs_elements() const { return nx * ny; }

    /// Coherent gain with perfect alignment on both ends.
    double peak_gain() const { return std::sqrt(static_cast<double>(nu) * nx * ny); }
};

enum class ChannelMode { normalized, link_budget };

struct LinkBudget {
    ChannelMode mode = ChannelMode::normalized;
    double antenna_gain = 1.0;
    double path_loss_exponent = 2.0;
    double distance = 1.0;     // m, link_budget mode only
    Complex mu{1.0, 0.0};      // small-scale gain, unit modulus
    double symbol_energy = 1.0;
    double noise_variance = 0.01;

    void validate() const
    {
        if (!(noise_variance > 0.0))
            throw InvalidArgumentError("link budget: noise variance must be positive");
        if (!(symbol_energy > 0.0))
            throw InvalidArgumentError("link budget: symbol energy must be positive");
        if (mode == ChannelMode::link_budget && !(distance > 0.0))
            throw InvalidArgumentError("link budget: distance must be positive");
    }

    /// Complex path gain xi; equals mu in normalized mode.
    Complex gain() const
    {
        if (mode == ChannelMode::normalized)
            return mu;
        return antenna_gain * mu / std::pow(distance, path_loss_exponent);
    }

    double snr() const { return symbol_energy / noise_variance; }

    static LinkBudget from_snr_db(double snr_db, double symbol_energy = 1.0)
    {
        LinkBudget b;
        b.symbol_energy = symbol_energy;
        b.noise_variance = symbol_energy * std::pow(10.0, -snr_db / 10.0);
        return b;
    }
};

/// ULA response: entries exp(-j*pi*n*u), n = 0..n-1.
inline CVector steering_ula(double u, int n)
{
    CVector a(n);
    for (int i = 0; i < n; ++i)
        a[i] = std::polar(1.0, -std::numbers::pi * i * u);
    return a;
}

/// UPA response a_x(u) (x) a_y(v); element (m, n) sits at flat index m*ny + n.
inline CVector steering_upa(double u, double v, const ArrayConfig& cfg)
{
    CVector a(cfg.gs_elements());
    for (int m = 0; m < cfg.nx; ++m)
        for (int n = 0; n < cfg.ny; ++n)
            a[m * cfg.ny + n] = std::polar(1.0, -std::numbers::pi * (m * u + n * v));
    return a;
}

/// LOS channel seen through the UAV precoder: gain * a_g(u, v) * (a_u(u_a)^H f).
struct EffectiveChannel {
    CVector response;
    SpatialAngles angles;
    Complex alignment; // a_u(u_a)^H f
    Complex path_gain;
};

inline EffectiveChannel effective_channel(const SpatialAngles& truth, const CVector& precoder, const LinkBudget& budget,
                                          const ArrayConfig& cfg)
{
    const double ua = truth.departure.value_or(0.0);
    const CVector au = steering_ula(ua, static_cast<int>(precoder.size()));
    EffectiveChannel h;
    h.angles = truth;
    h.alignment = au.dot(precoder); // Eigen's dot conjugates the left operand
    h.path_gain = budget.gain();
    h.response = (h.path_gain * h.alignment) * steering_upa(truth.u, truth.v, cfg);
    return h;
}

/// Draws one receiver noise vector with per-element variance `noise_variance`.
inline CVector draw_noise(Eigen::Index n, double noise_variance, Rng& rng)
{
    const double s = std::sqrt(noise_variance / 2.0);
    CVector out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = rng.normal();
        const double im = rng.normal();
        out[i] = Complex(s * re, s * im);
    }
    return out;
}

/// |w^H (H_e s + n)| for a fixed noise vector, pilot s = sqrt(E_s).
inline double beam_magnitude(const EffectiveChannel& h, const CVector& w, const CVector& noise, double symbol_energy)
{
    return std::abs(w.dot(h.response) * std::sqrt(symbol_energy) + w.dot(noise));
}

/// Magnitudes of the beamformed pilot for each combiner. Every beam is a
/// separate pilot slot with its own noise draw, taken from `rng` in order.
inline std::vector<double> measure_beams(const EffectiveChannel& h, std::span<const CVector> weights,
                                         const LinkBudget& budget, Rng& rng)
{
    std::vector<double> y;
    y.reserve(weights.size());
    for (const CVector& w : weights) {
        const CVector n = draw_noise(h.response.size(), budget.noise_variance, rng);
        y.push_back(beam_magnitude(h, w, n, budget.symbol_energy));
    }
    return y;
}

/// Pilot measurement oracle for one block.
///
/// Noise for pilot slot i is drawn from a stream keyed on (key, i), so two
/// estimators probing the same block see the same noise realization at the
/// same slot index whatever beams they steer. Every call is counted.
class PilotSounder {
public:
    PilotSounder(EffectiveChannel channel, LinkBudget budget, ArrayConfig array, std::uint64_t key,
                 bool shared_batch_noise = false)
        : channel_(std::move(channel)), budget_(budget), array_(array), key_(key), shared_(shared_batch_noise)
    {
    }

    double measure(const CVector& w)
    {
        Rng rng(derive_key(key_, {count_}));
        ++count_;
        const CVector n = draw_noise(channel_.response.size(), budget_.noise_variance, rng);
        return beam_magnitude(channel_, w, n, budget_.symbol_energy);
    }

    /// Measures a batch of beams. With shared batch noise the batch models
    /// simultaneous RF chains and every beam sees one noise vector.
    std::vector<double> measure(std::span<const CVector> ws)
    {
        if (!shared_) {
            std::vector<double> y;
            y.reserve(ws.size());
            for (const CVector& w : ws)
                y.push_back(measure(w));
            return y;
        }
        Rng rng(derive_key(key_, {count_}));
        const CVector n = draw_noise(channel_.response.size(), budget_.noise_variance, rng);
        std::vector<double> y;
        y.reserve(ws.size());
        for (const CVector& w : ws)
            y.push_back(beam_magnitude(channel_, w, n, budget_.symbol_energy));
        count_ += ws.size();
        return y;
    }

    /// Amplitude of a perfectly aligned unit-norm beam without noise; the
    /// estimators express measurements in this unit.
    double reference_amplitude() const
    {
        return std::sqrt(budget_.symbol_energy) * std::abs(budget_.gain()) * array_.peak_gain();
    }

    std::uint64_t count() const noexcept { return count_; }
    const EffectiveChannel& channel() const noexcept { return channel_; }
    const LinkBudget& budget() const noexcept { return budget_; }
    const ArrayConfig& array() const noexcept { return array_; }

private:
    EffectiveChannel channel_;
    LinkBudget budget_;
    ArrayConfig array_;
    std::uint64_t key_;
    bool shared_;
    std::uint64_t count_ = 0;
};

} // namespace uavtrack

#endif
