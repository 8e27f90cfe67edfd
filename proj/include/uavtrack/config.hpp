#ifndef UAVTRACK_CONFIG_HPP
#define UAVTRACK_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <uavtrack/beamforming.hpp>
#include <uavtrack/channel.hpp>
#include <uavtrack/errors.hpp>
#include <uavtrack/geometry.hpp>
#include <uavtrack/mobility.hpp>
#include <uavtrack/sensors.hpp>
#include <uavtrack/tracking.hpp>

namespace uavtrack {

struct ChannelSettings {
    ChannelMode mode = ChannelMode::normalized;
    double antenna_gain = 1.0;
    double path_loss_exponent = 2.0;
    double symbol_energy = 1.0;
    /// Draw a fresh uniform phase for the small-scale gain every block.
    bool random_phase = true;
    /// One noise vector per batch of grid beams (simultaneous RF chains).
    bool shared_noise = false;
};

struct CampaignSettings {
    int trials = 200;
    int blocks = 20;
    std::uint64_t seed = 1;
    std::vector<double> snr_db{0.0, 10.0, 20.0, 30.0};
    std::vector<Scheme> schemes{Scheme::hybrid_gpr, Scheme::analog_gpr, Scheme::gps_only, Scheme::perturbation,
                                Scheme::codebook_max};
    std::vector<int> phase_bits{6};
    int threads = 1;
};

/// Everything a campaign needs. Defaults reproduce the reference scenario:
/// GS at (0, 0, 25) m, UAV at 200 m over [10, 100]^2 m, 8x8 UPA and 8-element
/// ULA, pilots every 10 ms, EGI every 20 ms, ground GPS every 50 ms.
struct ScenarioConfig {
    ArrayConfig array;
    Schedule schedule;
    SensorNoiseConfig sensors;
    MobilityConfig mobility;
    Position3 ground{0.0, 0.0, 25.0, Frame::n};
    ChannelSettings channel;
    EstimatorConfig estimator;
    CampaignSettings campaign;

    void validate() const
    {
        array.validate();
        schedule.validate();
        sensors.validate();
        mobility.validate();
        estimator.validate();
        if (!(mobility.height > ground.z))
            throw InvalidArgumentError("mobility.height must exceed ground.z");
        if (!(channel.symbol_energy > 0.0))
            throw InvalidArgumentError("channel.symbol_energy must be positive");
        if (campaign.trials < 1 || campaign.blocks < 1)
            throw InvalidArgumentError("campaign.trials and campaign.blocks must be >= 1");
        if (campaign.snr_db.empty() || campaign.schemes.empty() || campaign.phase_bits.empty())
            throw InvalidArgumentError("campaign lists must not be empty");
        if (campaign.threads < 1)
            throw InvalidArgumentError("campaign.threads must be >= 1");
        for (int b : campaign.phase_bits)
            if (b < 1 || b > 16)
                throw InvalidArgumentError("campaign.phase_bits entries must lie in [1, 16]");
    }
};

namespace config_detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    if (out.size() == 1 && out[0].empty())
        out.clear();
    return out;
}

template <class T>
T parse_number(std::string_view s)
{
    const std::string t = trim(s);
    T v{};
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError("expected a number, got '" + t + "'");
    if constexpr (std::is_floating_point_v<T>)
        if (!std::isfinite(v))
            throw ConfigError("expected a finite number, got '" + t + "'");
    return v;
}

inline bool parse_bool(std::string_view s)
{
    std::string t = trim(s);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "1" || t == "yes" || t == "on")
        return true;
    if (t == "false" || t == "0" || t == "no" || t == "off")
        return false;
    throw ConfigError("expected a boolean, got '" + t + "'");
}

template <class T>
std::vector<T> parse_list(std::string_view s)
{
    std::vector<T> out;
    for (const std::string& item : split_list(s))
        out.push_back(parse_number<T>(item));
    if (out.empty())
        throw ConfigError("expected a non-empty list");
    return out;
}

inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

template <class T>
std::string join(const std::vector<T>& v, std::function<std::string(const T&)> f)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + f(v[i]);
    return out;
}

constexpr double deg = std::numbers::pi / 180.0;
constexpr double kmh = 1.0 / 3.6;

} // namespace config_detail

/// One documented configuration key.
struct ConfigKey {
    std::string name; // section.key
    std::string help;
    std::function<void(ScenarioConfig&, std::string_view)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

/// The full schema, in documentation order.
inline const std::vector<ConfigKey>& config_keys()
{
    using namespace config_detail;
    using C = ScenarioConfig;
    using S = std::string_view;
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        auto num = [&k](std::string name, std::string help, auto member) {
            k.push_back({std::move(name), std::move(help),
                         [member](C& c, S s) {
                             auto& ref = member(c);
                             ref = parse_number<std::remove_reference_t<decltype(ref)>>(s);
                         },
                         [member](const C& c) { return fmt(static_cast<double>(member(const_cast<C&>(c)))); }});
        };
        auto flag = [&k](std::string name, std::string help, auto member) {
            k.push_back({std::move(name), std::move(help), [member](C& c, S s) { member(c) = parse_bool(s); },
                         [member](const C& c) { return std::string(member(const_cast<C&>(c)) ? "true" : "false"); }});
        };
        auto scaled = [&k](std::string name, std::string help, double unit, auto member) {
            k.push_back({std::move(name), std::move(help),
                         [member, unit](C& c, S s) { member(c) = parse_number<double>(s) * unit; },
                         [member, unit](const C& c) { return fmt(member(const_cast<C&>(c)) / unit); }});
        };

        num("array.nx", "GS UPA elements along x", [](C& c) -> int& { return c.array.nx; });
        num("array.ny", "GS UPA elements along y", [](C& c) -> int& { return c.array.ny; });
        num("array.nu", "UAV ULA elements", [](C& c) -> int& { return c.array.nu; });

        num("schedule.block_period", "pilot period T_p [s]", [](C& c) -> double& { return c.schedule.block_period; });
        num("schedule.gps_period", "ground GPS period [s], multiple of T_p",
            [](C& c) -> double& { return c.schedule.gps_period; });
        num("schedule.ins_period", "on-board EGI period [s], multiple of T_p",
            [](C& c) -> double& { return c.schedule.ins_period; });

        num("sensors.gps_sigma", "ground GPS position std per axis [m]",
            [](C& c) -> double& { return c.sensors.gps_sigma; });
        num("sensors.ins_position_sigma", "EGI position std per axis [m]",
            [](C& c) -> double& { return c.sensors.ins_position_sigma; });
        scaled("sensors.ins_heading_sigma_deg", "EGI heading std [deg]", deg,
               [](C& c) -> double& { return c.sensors.ins_heading_sigma; });

        num("mobility.rho", "Gauss-Markov memory in (0, 1]", [](C& c) -> double& { return c.mobility.rho; });
        num("mobility.speed_sigma", "speed process std [m/s]", [](C& c) -> double& { return c.mobility.speed_sigma; });
        num("mobility.heading_sigma", "heading process std [rad]",
            [](C& c) -> double& { return c.mobility.heading_sigma; });
        num("mobility.yaw_sigma", "attitude yaw random-walk std per block [rad]",
            [](C& c) -> double& { return c.mobility.yaw_sigma; });
        k.push_back({"mobility.variance", "process noise scaling: stationary | literal",
                     [](C& c, S s) {
                         const std::string t = trim(s);
                         if (t == "stationary")
                             c.mobility.variance = NoiseVariance::stationary;
                         else if (t == "literal")
                             c.mobility.variance = NoiseVariance::literal;
                         else
                             throw ConfigError("expected stationary or literal, got '" + t + "'");
                     },
                     [](const C& c) {
                         return std::string(c.mobility.variance == NoiseVariance::stationary ? "stationary" : "literal");
                     }});
        scaled("mobility.speed_min_kmh", "minimum speed [km/h]", kmh, [](C& c) -> double& { return c.mobility.speed_min; });
        scaled("mobility.speed_max_kmh", "maximum speed [km/h]", kmh, [](C& c) -> double& { return c.mobility.speed_max; });
        flag("mobility.clamp_speed", "clamp speed to [min, max] after each step",
             [](C& c) -> bool& { return c.mobility.clamp_speed; });
        num("mobility.x_min", "initial x lower bound [m]", [](C& c) -> double& { return c.mobility.x_min; });
        num("mobility.x_max", "initial x upper bound [m]", [](C& c) -> double& { return c.mobility.x_max; });
        num("mobility.y_min", "initial y lower bound [m]", [](C& c) -> double& { return c.mobility.y_min; });
        num("mobility.y_max", "initial y upper bound [m]", [](C& c) -> double& { return c.mobility.y_max; });
        num("mobility.height", "UAV flight height [m]", [](C& c) -> double& { return c.mobility.height; });

        num("ground.x", "GS x [m]", [](C& c) -> double& { return c.ground.x; });
        num("ground.y", "GS y [m]", [](C& c) -> double& { return c.ground.y; });
        num("ground.z", "GS antenna height [m]", [](C& c) -> double& { return c.ground.z; });

        k.push_back({"channel.mode", "normalized (|xi| = 1) | link_budget (xi = G mu / d^PL)",
                     [](C& c, S s) {
                         const std::string t = trim(s);
                         if (t == "normalized")
                             c.channel.mode = ChannelMode::normalized;
                         else if (t == "link_budget")
                             c.channel.mode = ChannelMode::link_budget;
                         else
                             throw ConfigError("expected normalized or link_budget, got '" + t + "'");
                     },
                     [](const C& c) {
                         return std::string(c.channel.mode == ChannelMode::normalized ? "normalized" : "link_budget");
                     }});
        num("channel.antenna_gain", "G in link_budget mode", [](C& c) -> double& { return c.channel.antenna_gain; });
        num("channel.path_loss_exponent", "PL in link_budget mode",
            [](C& c) -> double& { return c.channel.path_loss_exponent; });
        num("channel.symbol_energy", "pilot symbol energy E_s", [](C& c) -> double& { return c.channel.symbol_energy; });
        flag("channel.random_phase", "uniform small-scale phase per block",
             [](C& c) -> bool& { return c.channel.random_phase; });
        flag("channel.shared_noise", "grid beams of one batch share a noise vector",
             [](C& c) -> bool& { return c.channel.shared_noise; });

        num("estimator.step_size", "ascent step eta", [](C& c) -> double& { return c.estimator.step_size; });
        num("estimator.tolerance", "stopping threshold in units of sqrt(E_s)",
            [](C& c) -> double& { return c.estimator.tolerance; });
        num("estimator.max_iterations", "iteration cap per block",
            [](C& c) -> int& { return c.estimator.max_iterations; });
        k.push_back({"estimator.perturbation_size", "probe offset of the perturbation baseline, or auto (grid step / 2)",
                     [](C& c, S s) {
                         if (trim(s) == "auto")
                             c.estimator.perturbation_size.reset();
                         else
                             c.estimator.perturbation_size = parse_number<double>(s);
                     },
                     [](const C& c) {
                         return c.estimator.perturbation_size ? fmt(*c.estimator.perturbation_size) : std::string("auto");
                     }});
        k.push_back({"estimator.grid_rule", "grid step from phase bits: literal (2 pi / 2^l) | phase_over_pi (2 / 2^l)",
                     [](C& c, S s) {
                         const std::string t = trim(s);
                         if (t == "literal")
                             c.estimator.grid_rule = GridStep::literal;
                         else if (t == "phase_over_pi")
                             c.estimator.grid_rule = GridStep::phase_over_pi;
                         else
                             throw ConfigError("expected literal or phase_over_pi, got '" + t + "'");
                     },
                     [](const C& c) {
                         return std::string(c.estimator.grid_rule == GridStep::literal ? "literal" : "phase_over_pi");
                     }});
        k.push_back({"estimator.half_width", "candidate box half-width, or auto (2 / N per axis)",
                     [](C& c, S s) {
                         if (trim(s) == "auto")
                             c.estimator.half_width.reset();
                         else
                             c.estimator.half_width = parse_number<double>(s);
                     },
                     [](const C& c) {
                         return c.estimator.half_width ? fmt(*c.estimator.half_width) : std::string("auto");
                     }});
        num("estimator.refit_every", "hybrid: refit hyperparameters every n appended pilots (0 = never)",
            [](C& c) -> int& { return c.estimator.refit_every; });
        flag("estimator.fit_noise", "fit the GP noise std jointly", [](C& c) -> bool& { return c.estimator.fit_noise; });
        flag("estimator.literal_descent", "move along -g instead of +g",
             [](C& c) -> bool& { return c.estimator.literal_descent; });
        flag("estimator.literal_loop", "iterate while the change is below the threshold",
             [](C& c) -> bool& { return c.estimator.literal_loop; });
        flag("estimator.backtracking", "halve steps that lower the posterior mean",
             [](C& c) -> bool& { return c.estimator.backtracking; });

        num("campaign.trials", "Monte Carlo trials", [](C& c) -> int& { return c.campaign.trials; });
        num("campaign.blocks", "blocks per trial", [](C& c) -> int& { return c.campaign.blocks; });
        num("campaign.seed", "master seed", [](C& c) -> std::uint64_t& { return c.campaign.seed; });
        k.push_back({"campaign.snr_db", "comma-separated SNR list [dB]",
                     [](C& c, S s) { c.campaign.snr_db = parse_list<double>(s); },
                     [](const C& c) { return join<double>(c.campaign.snr_db, [](const double& v) { return fmt(v); }); }});
        k.push_back({"campaign.phase_bits", "comma-separated phase-shifter resolutions l",
                     [](C& c, S s) { c.campaign.phase_bits = parse_list<int>(s); },
                     [](const C& c) {
                         return join<int>(c.campaign.phase_bits, [](const int& v) { return std::to_string(v); });
                     }});
        k.push_back({"campaign.schemes",
                     "comma-separated schemes: hybrid_gpr, analog_gpr, gps_only, perturbation, codebook_max",
                     [](C& c, S s) {
                         std::vector<Scheme> out;
                         for (const std::string& item : split_list(s)) {
                             try {
                                 out.push_back(parse_scheme(item));
                             } catch (const InvalidArgumentError& e) {
                                 throw ConfigError(e.what());
                             }
                         }
                         if (out.empty())
                             throw ConfigError("expected a non-empty list");
                         c.campaign.schemes = out;
                     },
                     [](const C& c) {
                         return join<Scheme>(c.campaign.schemes,
                                             [](const Scheme& s) { return std::string(scheme_name(s)); });
                     }});
        num("campaign.threads", "worker threads", [](C& c) -> int& { return c.campaign.threads; });
        return k;
    }();
    return keys;
}

/// Sets one key; errors are reported as ConfigError prefixed with `where`.
inline void set_config_value(ScenarioConfig& cfg, std::string_view key, std::string_view value,
                             const std::string& where = {})
{
    const std::string prefix = where.empty() ? std::string() : where + ": ";
    const auto& keys = config_keys();
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == key; });
    if (it == keys.end())
        throw ConfigError(prefix + "unknown key '" + std::string(key) + "'");
    try {
        it->set(cfg, value);
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + std::string(key) + ": " + e.what());
    }
}

/// Applies `section.key = value` lines. '#' starts a comment.
inline void apply_config_text(ScenarioConfig& cfg, std::string_view text, const std::string& source = "config")
{
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const std::string t = config_detail::trim(line);
        if (t.empty())
            continue;
        const std::string where = source + ":" + std::to_string(number);
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected 'section.key = value'");
        set_config_value(cfg, config_detail::trim(std::string_view(t).substr(0, eq)),
                         std::string_view(t).substr(eq + 1), where);
    }
}

/// Environment variable that overrides `key`: UAVTRACK_<SECTION>_<KEY>.
inline std::string env_name(std::string_view key)
{
    std::string out = "UAVTRACK_";
    for (char c : key)
        out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

inline void apply_environment(ScenarioConfig& cfg)
{
    for (const ConfigKey& k : config_keys()) {
        const std::string name = env_name(k.name);
        if (const char* v = std::getenv(name.c_str()))
            set_config_value(cfg, k.name, v, "environment " + name);
    }
}

/// Defaults, then the file, then environment overrides.
inline ScenarioConfig load_config(const std::string& path, bool use_environment = true)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    ScenarioConfig cfg;
    apply_config_text(cfg, buf.str(), path);
    if (use_environment)
        apply_environment(cfg);
    return cfg;
}

/// Every key with its current value, in the file format.
inline std::string dump_config(const ScenarioConfig& cfg)
{
    std::string out;
    for (const ConfigKey& k : config_keys())
        out += k.name + " = " + k.get(cfg) + "\n";
    return out;
}

} // namespace uavtrack

#endif
