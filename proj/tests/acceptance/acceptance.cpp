// Acceptance checks. `acceptance N` runs criterion N, `acceptance` runs all.
// Each prints one PASS/FAIL line; the exit status is nonzero on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <uavtrack/uavtrack.hpp>

using namespace uavtrack;

namespace {

// Pinned tolerances and budgets.
constexpr double geometry_tol = 1e-9;
constexpr double rotation_tol = 1e-12;
constexpr double gain_tol = 1e-10;
constexpr double interpolation_tol = 1e-8;
constexpr double gradient_rel_tol = 1e-5;
constexpr double floor_rel_tol = 0.20;
constexpr double se_rel_tol = 0.05;
constexpr double gain_margin = 0.01;
constexpr double confidence = 0.95;
constexpr int bootstrap_draws = 4000;
constexpr int paired_trials = 500;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok)
            pass = false;
        if (!detail.empty())
            detail += "; ";
        detail += (ok ? "" : "FAILED ") + what;
    }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

/// One-sided lower bound of the mean of `d` at the given confidence.
double bootstrap_lower(const std::vector<double>& d, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<double> means(bootstrap_draws);
    const std::size_t n = d.size();
    for (double& m : means) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            s += d[static_cast<std::size_t>(rng() % n)];
        m = s / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    return means[static_cast<std::size_t>((1.0 - confidence) * bootstrap_draws)];
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

/// Per-trial mean of `f` over the rows of one scheme.
std::vector<double> per_trial(const std::vector<BlockMetrics>& rows, const std::string& scheme,
                              const std::function<double(const BlockMetrics&)>& f)
{
    std::map<int, std::pair<double, int>> acc;
    for (const BlockMetrics& r : rows)
        if (r.scheme == scheme) {
            acc[r.trial].first += f(r);
            ++acc[r.trial].second;
        }
    std::vector<double> out;
    for (const auto& [t, s] : acc)
        out.push_back(s.first / s.second);
    return out;
}

double sq_err(const BlockMetrics& r) { return 0.5 * (r.err_u() * r.err_u() + r.err_v() * r.err_v()); }

std::vector<double> difference(const std::vector<double>& a, const std::vector<double>& b)
{
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        d[i] = a[i] - b[i];
    return d;
}

ScenarioConfig campaign(const std::string& text)
{
    ScenarioConfig cfg;
    apply_config_text(cfg, text, "acceptance");
    cfg.validate();
    return cfg;
}

// Geometry round trip and rotation orthonormality.
Outcome criterion1()
{
    Outcome o;
    Rng rng(101);
    const Position3 gs{0, 0, 25, Frame::n};
    double worst = 0;
    for (int i = 0; i < 10000; ++i) {
        double u, v;
        do {
            u = rng.uniform(-1, 1);
            v = rng.uniform(-1, 1);
        } while (u * u + v * v > 0.99);
        const double dh = rng.uniform(10, 500);
        const HorizontalPosition p = position_from_angles(u, v, dh);
        const SpatialAngles a = arrival_angles({gs.x + p.x, gs.y + p.y, gs.z + dh, Frame::n}, gs);
        worst = std::max({worst, std::abs(a.u - u), std::abs(a.v - v)});
    }
    o.require(worst < geometry_tol, fmt("round-trip max error %.2e < %.0e", worst, geometry_tol));
    double rot = 0;
    for (int i = 0; i < 10000; ++i) {
        const Attitude att{rng.uniform(-3.14, 3.14), rng.uniform(-1.5, 1.5), rng.uniform(-3.14, 3.14)};
        const Eigen::Matrix3d r = rotation_matrix(att);
        rot = std::max(rot, (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
        rot = std::max(rot, std::abs(r.determinant() - 1.0));
    }
    o.require(rot < rotation_tol, fmt("rotation orthonormality %.2e < %.0e", rot, rotation_tol));
    return o;
}

// Direct gain vs closed form.
Outcome criterion2()
{
    Outcome o;
    const ArrayConfig a;
    const LinkBudget b = LinkBudget::from_snr_db(20);
    Rng rng(202);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(-0.6, 0.6), v = rng.uniform(-0.6, 0.6), dep = rng.uniform(-0.9, 0.9);
        const double du = rng.uniform(-0.4, 0.4), dv = rng.uniform(-0.4, 0.4);
        const EffectiveChannel h = effective_channel({u, v, dep}, steer_precoder(dep, a.nu).weights, b, a);
        const double direct = realized_gain(steer_weights(u + du, v + dv, a).weights, h);
        worst = std::max(worst, std::abs(direct - closed_form_gain(du, dv, a)));
    }
    o.require(worst < gain_tol, fmt("direct vs closed form max diff %.2e < %.0e", worst, gain_tol));
    const double peak = closed_form_gain(0, 0, a), null = closed_form_gain(2.0 / 8, 0, a);
    o.require(std::abs(peak - std::sqrt(512.0)) < gain_tol, fmt("aligned gain %.6f", peak));
    o.require(std::abs(null) < gain_tol, fmt("gain at 2/8 offset %.1e", null));
    return o;
}

// GPR interpolation and gradients.
Outcome criterion3()
{
    using namespace gpr;
    Outcome o;
    Rng rng(303);
    auto points = [&](int n) {
        Points x(n, 2);
        for (int i = 0; i < n; ++i)
            x.row(i) << rng.uniform(0, 0.5), rng.uniform(0, 0.5);
        return x;
    };
    auto outputs = [&](int n) {
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i)
            y[i] = rng.normal();
        return y;
    };
    auto hyper = [&](double noise) {
        return Hyperparams{rng.uniform(0.5, 2.0), {rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3)}, noise};
    };

    // Length scales up to the point spacing: beyond that the 1e-10 jitter
    // times |alpha| alone exceeds the tolerance.
    double interp = 0;
    for (int t = 0; t < 100; ++t) {
        Points x(9, 2);
        for (int i = 0; i < 9; ++i)
            x.row(i) << 0.1 * (i % 3), 0.1 * (i / 3);
        const Eigen::VectorXd y = outputs(9);
        const GprModel m(x, y, {rng.uniform(0.5, 2.0), {rng.uniform(0.03, 0.1), rng.uniform(0.03, 0.1)}, 0.0});
        interp = std::max(interp, (m.posterior(x).mean - y).cwiseAbs().maxCoeff());
    }
    o.require(interp < interpolation_tol, fmt("interpolation (l <= spacing) max error %.2e < %.0e", interp, interpolation_tol));

    double lik = 0, mg = 0;
    for (int t = 0; t < 100; ++t) {
        const Points x = points(12);
        const Eigen::VectorXd y = outputs(12);
        const Hyperparams hp = hyper(rng.uniform(0.05, 0.5));
        const Eigen::Vector4d g = GprModel(x, y, hp).likelihood_gradient().vector();
        Eigen::Vector4d fd;
        for (int j = 0; j < 4; ++j) {
            Hyperparams a = hp, b = hp;
            double* pa[] = {&a.signal_std, &a.length_scales[0], &a.length_scales[1], &a.noise_std};
            double* pb[] = {&b.signal_std, &b.length_scales[0], &b.length_scales[1], &b.noise_std};
            const double h = 1e-6 * *pa[j];
            *pa[j] += h;
            *pb[j] -= h;
            fd[j] = (GprModel(x, y, a).log_marginal_likelihood() - GprModel(x, y, b).log_marginal_likelihood()) / (2 * h);
        }
        lik = std::max(lik, (g - fd).norm() / fd.norm());

        const GprModel m(x, y, hp);
        const Point q{rng.uniform(0, 0.5), rng.uniform(0, 0.5)};
        const double h = 1e-6;
        const Point fdm{(m.mean(q + Point(h, 0)) - m.mean(q - Point(h, 0))) / (2 * h),
                        (m.mean(q + Point(0, h)) - m.mean(q - Point(0, h))) / (2 * h)};
        mg = std::max(mg, (m.mean_gradient(q) - fdm).norm() / fdm.norm());
    }
    o.require(lik < gradient_rel_tol, fmt("likelihood gradient max rel error %.2e < %.0e", lik, gradient_rel_tol));
    o.require(mg < gradient_rel_tol, fmt("mean gradient max rel error %.2e < %.0e", mg, gradient_rel_tol));
    return o;
}

// Hybrid vs perturbation at 20 dB, paired trials.
Outcome criterion4()
{
    Outcome o;
    const ScenarioConfig cfg = campaign("campaign.trials = " + std::to_string(paired_trials) +
                                        "\ncampaign.blocks = 5\ncampaign.seed = 4\ncampaign.snr_db = 20\n"
                                        "campaign.schemes = hybrid_gpr, perturbation\n");
    const std::vector<BlockMetrics> rows = run_trials(cfg);

    const std::vector<double> mse_h = per_trial(rows, "hybrid_gpr", sq_err);
    const std::vector<double> mse_p = per_trial(rows, "perturbation", sq_err);
    const auto its = [](const BlockMetrics& r) { return double(r.iterations); };
    const std::vector<double> it_h = per_trial(rows, "hybrid_gpr", its);
    const std::vector<double> it_p = per_trial(rows, "perturbation", its);
    const double lo_mse = bootstrap_lower(difference(mse_p, mse_h), 41);
    const double lo_it = bootstrap_lower(difference(it_p, it_h), 42);
    o.require(lo_mse > 0, fmt("MSE hybrid %.3e vs perturbation %.3e, 95%% lower bound of gap %.3e > 0", mean(mse_h),
                              mean(mse_p), lo_mse));
    o.require(lo_it > 0, fmt("iterations hybrid %.2f vs perturbation %.2f, 95%% lower bound of gap %.2f > 0",
                             mean(it_h), mean(it_p), lo_it));

    const std::uint64_t gs = candidate_set(0, 0, main_lobe_half_width(8), grid_step(6)).size();
    std::size_t bad = 0;
    for (const BlockMetrics& r : rows) {
        const std::uint64_t it = static_cast<std::uint64_t>(r.iterations);
        if (r.scheme == "hybrid_gpr" ? r.measurements != gs + it : r.measurements != 3 * it)
            ++bad;
    }
    o.require(bad == 0, fmt("measurement accounting (hybrid G_s + 1/iteration, perturbation 3/iteration): "
                            "%.0f mismatches",
                            double(bad)));
    return o;
}

// Analog vs codebook, quantization floor, bit-depth trend.
Outcome criterion5()
{
    Outcome o;
    {
        // Noiseless codebook against the uniform-error floor.
        const ArrayConfig a;
        const LinkBudget b = LinkBudget::from_snr_db(300);
        const double delta = grid_step(6), half = main_lobe_half_width(8);
        EstimatorConfig ec;
        Rng rng(505);
        double su = 0, sv = 0, brute = 0;
        const int n = 4000;
        for (int i = 0; i < n; ++i) {
            const double u = rng.uniform(-0.5, 0.5), v = rng.uniform(-0.5, 0.5);
            const SpatialAngles seed{u + rng.uniform(-0.5, 0.5) * delta, v + rng.uniform(-0.5, 0.5) * delta,
                                     std::nullopt};
            const EffectiveChannel h = effective_channel({u, v, 0.2}, steer_precoder(0.2, a.nu).weights, b, a);
            PilotSounder s(h, b, a, derive_key(505, {static_cast<std::uint64_t>(i)}));
            const Refinement r = baseline_codebook(s, seed, ec);
            su += std::pow(r.estimate.u - u, 2);
            sv += std::pow(r.estimate.v - v, 2);
            // Brute force: distance to the nearest grid point.
            double best = 1e9;
            for (double p : candidate_set(seed.u, seed.v, half, delta).u_axis)
                best = std::min(best, std::abs(p - u));
            brute += best * best;
        }
        const double floor = delta * delta / 12;
        su /= n;
        sv /= n;
        brute /= n;
        o.require(std::abs(su - floor) < floor_rel_tol * floor && std::abs(sv - floor) < floor_rel_tol * floor,
                  fmt("noiseless codebook MSE u %.3e, v %.3e vs floor %.3e (brute force %.3e), within 20%%", su, sv,
                      floor, brute));
    }

    const ScenarioConfig cfg = campaign("campaign.trials = " + std::to_string(paired_trials) +
                                        "\ncampaign.blocks = 2\ncampaign.seed = 5\ncampaign.snr_db = 10, 20, 30\n"
                                        "campaign.phase_bits = 4, 5, 6\n"
                                        "campaign.schemes = analog_gpr, codebook_max\n");
    const std::vector<SummaryRow> summary = summarize(run_trials(cfg), cfg);
    std::map<std::tuple<std::string, double, int>, double> mse;
    for (const SummaryRow& r : summary)
        if (r.scope == "campaign")
            mse[{r.scheme, r.snr_db, r.phase_bits}] = r.stats.mse;
    for (double snr : {10.0, 20.0, 30.0}) {
        const double an = mse[{"analog_gpr", snr, 6}], cb = mse[{"codebook_max", snr, 6}];
        o.require(an < cb, fmt("%.0f dB l=6: analog %.3e < codebook %.3e", snr, an, cb));
        const double m4 = mse[{"analog_gpr", snr, 4}], m5 = mse[{"analog_gpr", snr, 5}], m6 = an;
        o.require(m4 > m5 && m5 > m6, fmt("%.0f dB analog MSE over l=4,5,6: %.3e > %.3e > %.3e", snr, m4, m5, m6));
    }
    return o;
}

// Predicted SE from the campaign MAE vs realized SE.
Outcome criterion6()
{
    Outcome o;
    const ScenarioConfig cfg = campaign("campaign.trials = 200\ncampaign.blocks = 5\ncampaign.seed = 6\n"
                                        "campaign.snr_db = 10, 20, 30\n"
                                        "campaign.schemes = hybrid_gpr, analog_gpr, gps_only, perturbation, "
                                        "codebook_max\n");
    const std::vector<SummaryRow> summary = summarize(run_trials(cfg), cfg);
    int checked = 0;
    for (const SummaryRow& r : summary) {
        if (r.scope != "campaign")
            continue;
        if (r.stats.mae > 1.0 / cfg.array.nx || !r.stats.se_gap) {
            std::printf("  %s %.0f dB: MAE %.3e outside main lobe, skipped\n", r.scheme.c_str(), r.snr_db,
                        r.stats.mae);
            continue;
        }
        ++checked;
        o.require(std::abs(*r.stats.se_gap) < se_rel_tol,
                  r.scheme + fmt(" %.0f dB: MAE %.2e, predicted SE %.4f vs realized %.4f", r.snr_db, r.stats.mae,
                                 *r.stats.predicted_se, r.stats.mean_se));
    }
    o.require(checked > 0, fmt("%.0f cells in the main-lobe regime", checked));
    return o;
}

// Integrated tracking vs GPS-only under poor sensing.
Outcome criterion7()
{
    Outcome o;
    const ScenarioConfig cfg = campaign("campaign.trials = " + std::to_string(paired_trials) +
                                        "\ncampaign.blocks = 10\ncampaign.seed = 7\ncampaign.snr_db = 10\n"
                                        "campaign.schemes = hybrid_gpr, gps_only\n"
                                        "sensors.gps_sigma = 5\nsensors.ins_position_sigma = 5\n"
                                        "sensors.ins_heading_sigma_deg = 0.05\n");
    const std::vector<BlockMetrics> rows = run_trials(cfg);
    const auto g = [](const BlockMetrics& r) { return r.norm_gain; };
    const std::vector<double> h = per_trial(rows, "hybrid_gpr", g), p = per_trial(rows, "gps_only", g);
    const double lo = bootstrap_lower(difference(h, p), 71);
    o.require(lo >= gain_margin, fmt("normalized gain hybrid %.4f vs GPS-only %.4f, 95%% lower bound of gap %.4f >= %.2f",
                                     mean(h), mean(p), lo, gain_margin));
    return o;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

// Byte-identical traces for identical config and seed.
Outcome criterion8()
{
    Outcome o;
    ScenarioConfig cfg = campaign("campaign.trials = 4\ncampaign.blocks = 4\ncampaign.seed = 8\n"
                                  "campaign.snr_db = 0, 20\ncampaign.phase_bits = 5, 6\n");
    const auto base = std::filesystem::temp_directory_path() / "uavtrack_acceptance_determinism";
    std::filesystem::remove_all(base);
    run_campaign(cfg, base / "a");
    run_campaign(cfg, base / "b");
    cfg.campaign.threads = 2;
    run_campaign(cfg, base / "c");
    const std::string a = slurp(base / "a" / "trace.csv");
    o.require(!a.empty() && a == slurp(base / "b" / "trace.csv"), "repeated run trace identical");
    o.require(a == slurp(base / "c" / "trace.csv"), "two-thread run trace identical");
    o.require(slurp(base / "a" / "summary.csv") == slurp(base / "b" / "summary.csv"), "summary identical");
    std::filesystem::remove_all(base);
    return o;
}

struct Criterion {
    const char* name;
    double budget_s;
    Outcome (*run)();
};

const Criterion criteria[] = {
    {"geometry round trip", 1, criterion1},
    {"beam-gain oracle", 1, criterion2},
    {"GPR correctness", 30, criterion3},
    {"hybrid vs perturbation", 180, criterion4},
    {"analog vs codebook", 180, criterion5},
    {"MAE to SE prediction", 120, criterion6},
    {"integrated vs GPS-only", 180, criterion7},
    {"determinism", 60, criterion8},
};

} // namespace

int main(int argc, char** argv)
{
    std::vector<int> which;
    for (int i = 1; i < argc; ++i)
        which.push_back(std::atoi(argv[i]));
    if (which.empty())
        for (int i = 1; i <= 8; ++i)
            which.push_back(i);

    bool all = true;
    for (int c : which) {
        if (c < 1 || c > 8) {
            std::fprintf(stderr, "no criterion %d\n", c);
            return 2;
        }
        const Criterion& k = criteria[c - 1];
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = k.run();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.require(s < k.budget_s, fmt("runtime %.2f s < %.0f s", s, k.budget_s));
        std::printf("criterion %d (%s): %s: %s\n", c, k.name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
