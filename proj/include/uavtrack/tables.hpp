#ifndef UAVTRACK_TABLES_HPP
#define UAVTRACK_TABLES_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <uavtrack/campaign.hpp>
#include <uavtrack/errors.hpp>

namespace uavtrack {

/// A parsed summary.csv: one string map per data row, keyed by header.
struct SummaryTable {
    std::vector<std::string> columns;
    std::vector<std::map<std::string, std::string>> rows;
};

namespace tables_detail {

inline std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

} // namespace tables_detail

inline SummaryTable parse_summary(const std::string& text)
{
    SummaryTable t;
    std::stringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        return t;
    t.columns = tables_detail::split(line);
    int number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty())
            continue;
        const std::vector<std::string> cells = tables_detail::split(line);
        if (cells.size() != t.columns.size())
            throw IoError("summary line " + std::to_string(number) + ": expected " + std::to_string(t.columns.size()) +
                          " fields, got " + std::to_string(cells.size()));
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < cells.size(); ++i)
            row[t.columns[i]] = cells[i];
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline SummaryTable read_summary(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read summary '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_summary(buf.str());
}

namespace tables_detail {

using Row = std::map<std::string, std::string>;

inline const std::string& field(const Row& r, const std::string& name)
{
    const auto it = r.find(name);
    if (it == r.end())
        throw IoError("summary has no column '" + name + "'");
    return it->second;
}

inline std::vector<Row> select(const SummaryTable& t, const std::string& scope, const std::set<std::string>& schemes)
{
    std::vector<Row> out;
    for (const Row& r : t.rows)
        if (field(r, "scope") == scope && schemes.count(field(r, "scheme")))
            out.push_back(r);
    return out;
}

inline std::size_t distinct(const std::vector<Row>& rows, const std::string& column)
{
    std::set<std::string> values;
    for (const Row& r : rows)
        values.insert(field(r, column));
    return values.size();
}

/// Long-format panel: the key columns followed by the value columns.
inline std::string panel(const std::vector<Row>& rows, const std::vector<std::string>& keys,
                         const std::vector<std::string>& values)
{
    std::string out;
    std::vector<std::string> header = keys;
    header.insert(header.end(), values.begin(), values.end());
    for (std::size_t i = 0; i < header.size(); ++i)
        out += (i ? "," : "") + header[i];
    out += '\n';
    for (const Row& r : rows) {
        for (std::size_t i = 0; i < header.size(); ++i)
            out += (i ? "," : "") + field(r, header[i]);
        out += '\n';
    }
    return out;
}

} // namespace tables_detail

/// Writes the tidy CSV panels of one figure into `out_dir` and returns
/// their paths. Nothing is written if a needed sweep axis is absent.
///
///   fig5  position error vs block                 (block rows)
///   fig6  normalized gain and SE vs block         (block rows)
///   fig7  hybrid vs perturbation vs SNR: a mse, b iterations, c SE
///   fig8  analog MSE vs phase bits, one row per l
///   fig9  analog vs codebook vs SNR: a mse, b iterations, c SE
inline std::vector<std::filesystem::path> emit_figure_tables(const SummaryTable& summary, const std::string& figure,
                                                             const std::filesystem::path& out_dir)
{
    using namespace tables_detail;
    if (summary.rows.empty())
        throw InvalidArgumentError("emit_figure_tables: summary is empty");

    const std::set<std::string> all{"hybrid_gpr", "analog_gpr", "gps_only", "perturbation", "codebook_max"};
    const std::set<std::string> hybrid{"hybrid_gpr", "perturbation", "gps_only"};
    const std::set<std::string> analog{"analog_gpr", "codebook_max"};
    const std::vector<std::string> sweep_keys{"scheme", "phase_bits", "snr_db"};
    const std::vector<std::string> block_keys{"scheme", "snr_db", "phase_bits", "block"};

    std::vector<std::pair<std::string, std::string>> files; // name, content
    auto need = [&](const std::vector<Row>& rows, const std::string& axis, std::size_t min) {
        if (rows.empty())
            throw MissingSweepError(figure, "scheme");
        if (distinct(rows, axis) < min)
            throw MissingSweepError(figure, axis);
    };

    if (figure == "fig5" || figure == "fig6") {
        const std::vector<Row> rows = select(summary, "block", all);
        if (rows.empty())
            throw MissingSweepError(figure, "block");
        if (figure == "fig5") {
            files.emplace_back("fig5_position_error.csv", panel(rows, block_keys, {"mean_pos_err"}));
        } else {
            files.emplace_back("fig6a_norm_gain.csv", panel(rows, block_keys, {"mean_norm_gain"}));
            files.emplace_back("fig6b_se.csv", panel(rows, block_keys, {"mean_se"}));
        }
    } else if (figure == "fig7" || figure == "fig9") {
        const std::vector<Row> rows = select(summary, "campaign", figure == "fig7" ? hybrid : analog);
        need(rows, "snr_db", 2);
        files.emplace_back(figure + "a_mse.csv", panel(rows, sweep_keys, {"mse", "mse_u", "mse_v"}));
        files.emplace_back(figure + "b_iterations.csv", panel(rows, sweep_keys, {"mean_iterations", "mean_measurements"}));
        files.emplace_back(figure + "c_se.csv", panel(rows, sweep_keys, {"mean_se", "predicted_se"}));
    } else if (figure == "fig8") {
        const std::vector<Row> rows = select(summary, "campaign", analog);
        need(rows, "phase_bits", 2);
        // Wide layout: one row per l, one MSE column per (scheme, SNR).
        std::vector<std::string> series;
        std::map<std::pair<int, std::string>, std::string> cell;
        std::set<int> bits;
        for (const Row& r : rows) {
            const std::string name = field(r, "scheme") + "_snr" + field(r, "snr_db");
            if (std::find(series.begin(), series.end(), name) == series.end())
                series.push_back(name);
            const int l = std::stoi(field(r, "phase_bits"));
            bits.insert(l);
            cell[{l, name}] = field(r, "mse");
        }
        std::string out = "phase_bits";
        for (const std::string& s : series)
            out += ',' + s;
        out += '\n';
        for (int l : bits) {
            out += std::to_string(l);
            for (const std::string& s : series) {
                const auto it = cell.find({l, s});
                out += ',' + (it == cell.end() ? std::string() : it->second);
            }
            out += '\n';
        }
        files.emplace_back("fig8_mse_vs_bits.csv", out);
    } else {
        throw InvalidArgumentError("emit_figure_tables: unknown figure '" + figure + "'");
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());
    std::vector<std::filesystem::path> written;
    for (const auto& [name, content] : files) {
        written.push_back(out_dir / name);
        csv::write_atomic(written.back(), content);
    }
    return written;
}

} // namespace uavtrack

#endif
