#ifndef UAVTRACK_METRICS_HPP
#define UAVTRACK_METRICS_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>

#include <uavtrack/channel.hpp>
#include <uavtrack/errors.hpp>

namespace uavtrack {

/// |w^H H_e| with the path gain divided out, so the aligned maximum is
/// sqrt(nu * nx * ny).
inline double realized_gain(const CVector& w, const EffectiveChannel& h)
{
    const double g = std::abs(h.path_gain);
    if (!(g > 0.0))
        throw InvalidArgumentError("realized_gain: channel has zero path gain");
    return std::abs(w.dot(h.response)) / g;
}

/// First-null offset of an N-element array in spatial-angle units.
inline double main_lobe_limit(int n) { return 2.0 / n; }

/// |sin(pi N d / 2) / (sqrt(N) sin(pi d / 2))|, sqrt(N) at d = 0.
inline double dirichlet_gain(double d, int n)
{
    const double den = std::sin(std::numbers::pi * d / 2.0);
    const double rn = std::sqrt(static_cast<double>(n));
    if (std::abs(den) < 1e-300)
        return rn;
    // Near zero the ratio is well conditioned; only the exact limit needs care.
    return std::abs(std::sin(std::numbers::pi * n * d / 2.0) / (rn * den));
}

/// Gain of an ideally precoded link steered with errors (du, dv).
inline double closed_form_gain(double du, double dv, const ArrayConfig& cfg)
{
    return std::sqrt(static_cast<double>(cfg.nu)) * dirichlet_gain(du, cfg.nx) * dirichlet_gain(dv, cfg.ny);
}

/// Gain predicted from a scalar mean absolute error applied to both axes.
/// Only meaningful inside the main lobe.
inline double predicted_gain_from_mae(double mae, const ArrayConfig& cfg)
{
    if (std::abs(mae) > main_lobe_limit(cfg.nx) || std::abs(mae) > main_lobe_limit(cfg.ny))
        throw OutOfMainLobeError("predicted_gain_from_mae: error lies outside the main lobe");
    return closed_form_gain(mae, mae, cfg);
}

/// log2(1 + E_s gain^2 / (noise_variance ||w||^2)).
inline double spectral_efficiency(double gain, double symbol_energy, double noise_variance, double w_norm = 1.0)
{
    if (!(noise_variance > 0.0))
        throw InvalidArgumentError("spectral_efficiency: noise variance must be positive");
    return std::log2(1.0 + symbol_energy * gain * gain / (noise_variance * w_norm * w_norm));
}

/// One row of a trial trace: one block, one scheme.
struct BlockMetrics {
    int trial = 0;
    int block = 0;
    std::string scheme;
    double snr_db = 0.0;
    int phase_bits = 0;
    double true_x = 0.0, true_y = 0.0, true_u = 0.0, true_v = 0.0;
    double est_x = 0.0, est_y = 0.0, est_u = 0.0, est_v = 0.0;
    double gain = 0.0;      // path gain divided out
    double norm_gain = 0.0; // gain / sqrt(nu nx ny)
    double se = 0.0;
    double link_snr = 1.0;  // E_s |xi|^2 / noise variance, linear
    int iterations = 0;
    std::uint64_t measurements = 0;

    double err_u() const { return est_u - true_u; }
    double err_v() const { return est_v - true_v; }
    double position_error() const { return std::hypot(est_x - true_x, est_y - true_y); }
};

struct Aggregate {
    std::size_t rows = 0;
    double mse_u = 0.0, mse_v = 0.0, mse = 0.0; // mse is the mean of the two axes
    double mae_u = 0.0, mae_v = 0.0, mae = 0.0;
    double mean_gain = 0.0;
    double mean_norm_gain = 0.0;
    double mean_se = 0.0;
    double mean_iterations = 0.0;
    double mean_measurements = 0.0;
    double mean_position_error = 0.0;
    /// Gain and SE from the closed form at the campaign MAE; empty outside
    /// the main lobe.
    std::optional<double> predicted_gain;
    std::optional<double> predicted_se;
    std::optional<double> se_gap; // predicted minus realized, relative to realized
};

/// Unweighted means in row order.
inline Aggregate campaign_aggregate(std::span<const BlockMetrics> rows, const ArrayConfig& cfg)
{
    if (rows.empty())
        throw InvalidArgumentError("campaign_aggregate: no rows");
    Aggregate a;
    a.rows = rows.size();
    double link_snr = 0.0;
    for (const BlockMetrics& r : rows) {
        a.mse_u += r.err_u() * r.err_u();
        a.mse_v += r.err_v() * r.err_v();
        a.mae_u += std::abs(r.err_u());
        a.mae_v += std::abs(r.err_v());
        a.mean_gain += r.gain;
        a.mean_norm_gain += r.norm_gain;
        a.mean_se += r.se;
        a.mean_iterations += r.iterations;
        a.mean_measurements += static_cast<double>(r.measurements);
        a.mean_position_error += r.position_error();
        link_snr += r.link_snr;
    }
    const double n = static_cast<double>(rows.size());
    for (double* v : {&a.mse_u, &a.mse_v, &a.mae_u, &a.mae_v, &a.mean_gain, &a.mean_norm_gain, &a.mean_se,
                      &a.mean_iterations, &a.mean_measurements, &a.mean_position_error, &link_snr})
        *v /= n;
    a.mse = 0.5 * (a.mse_u + a.mse_v);
    a.mae = 0.5 * (a.mae_u + a.mae_v);
    try {
        a.predicted_gain = predicted_gain_from_mae(a.mae, cfg);
        a.predicted_se = std::log2(1.0 + link_snr * *a.predicted_gain * *a.predicted_gain);
        if (a.mean_se > 0.0)
            a.se_gap = (*a.predicted_se - a.mean_se) / a.mean_se;
    } catch (const OutOfMainLobeError&) {
    }
    return a;
}

} // namespace uavtrack

#endif
