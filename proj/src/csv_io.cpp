#include "recon/csv_io.hpp"

#include "recon/error.hpp"
#include "recon/fs_util.hpp"

#include <charconv>
#include <string>
#include <vector>

namespace recon {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

struct Grid {
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
};

Grid parse_grid(std::string_view text) {
    Grid g;
    std::size_t line_no = 0;
    bool header = true;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        auto fields = split(line);
        if (header) {
            if (fields.size() < 2 || fields[0] != "t")
                throw InvalidArgument("csv header must be `t,<channel>,...`");
            for (std::size_t i = 1; i < fields.size(); ++i) g.names.emplace_back(fields[i]);
            header = false;
            continue;
        }
        if (fields.size() != g.names.size() + 1)
            throw InvalidArgument("csv line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(g.names.size() + 1) + " fields");
        std::vector<double> row;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            double v = 0.0;
            const auto f = fields[i];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc{} || ptr != f.data() + f.size())
                throw InvalidArgument("csv line " + std::to_string(line_no) + ": bad number `" +
                                      std::string(f) + "`");
            row.push_back(v);
        }
        g.rows.push_back(std::move(row));
    }
    if (header) throw InvalidArgument("csv input is empty");
    if (g.rows.empty()) throw InvalidArgument("csv input has no data rows");
    return g;
}

}  // namespace

TimeSeries parse_series_csv(std::string_view text, double dt) {
    Grid g = parse_grid(text);
    Matrix v(static_cast<Eigen::Index>(g.rows.size()), static_cast<Eigen::Index>(g.names.size()));
    for (std::size_t t = 0; t < g.rows.size(); ++t)
        for (std::size_t l = 0; l < g.names.size(); ++l)
            v(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(l)) = g.rows[t][l];
    return TimeSeries(std::move(v), std::move(g.names), dt);
}

CorruptionMask parse_mask_csv(std::string_view text) {
    Grid g = parse_grid(text);
    BoolMatrix f(static_cast<Eigen::Index>(g.rows.size()), static_cast<Eigen::Index>(g.names.size()));
    for (std::size_t t = 0; t < g.rows.size(); ++t)
        for (std::size_t l = 0; l < g.names.size(); ++l) {
            const double v = g.rows[t][l];
            if (v != 0.0 && v != 1.0) throw InvalidArgument("mask entries must be 0 or 1");
            f(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(l)) = v == 1.0;
        }
    return CorruptionMask(std::move(f));
}

std::string series_to_csv(const TimeSeries& series) {
    std::string out = "t";
    for (const auto& n : series.channel_names()) out += "," + n;
    out += '\n';
    for (std::size_t t = 0; t < series.length(); ++t) {
        out += std::to_string(t);
        for (std::size_t l = 0; l < series.channels(); ++l) out += "," + format_double(series(t, l));
        out += '\n';
    }
    return out;
}

std::string mask_to_csv(const CorruptionMask& mask, const std::vector<std::string>& channel_names) {
    if (channel_names.size() != mask.cols()) throw InvalidArgument("mask/channel name count mismatch");
    std::string out = "t";
    for (const auto& n : channel_names) out += "," + n;
    out += '\n';
    for (std::size_t t = 0; t < mask.rows(); ++t) {
        out += std::to_string(t);
        for (std::size_t l = 0; l < mask.cols(); ++l) out += mask(t, l) ? ",1" : ",0";
        out += '\n';
    }
    return out;
}

TimeSeries read_series_csv(const std::filesystem::path& path, double dt) {
    return parse_series_csv(read_file(path), dt);
}

CorruptionMask read_mask_csv(const std::filesystem::path& path) {
    return parse_mask_csv(read_file(path));
}

void write_series_csv(const std::filesystem::path& path, const TimeSeries& series) {
    write_file_atomic(path, series_to_csv(series));
}

void write_mask_csv(const std::filesystem::path& path, const CorruptionMask& mask,
                    const std::vector<std::string>& channel_names) {
    write_file_atomic(path, mask_to_csv(mask, channel_names));
}

}  // namespace recon
