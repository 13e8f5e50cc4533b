#include "recon/evaluation.hpp"

#include "recon/csv_io.hpp"
#include "recon/error.hpp"
#include "recon/fs_util.hpp"
#include "recon/rng.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

namespace recon {

namespace {

std::string rho_key(double rho) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", rho);
    return buf;
}

std::uint64_t series_fingerprint(const TimeSeries& s, std::uint64_t h) {
    for (Eigen::Index k = 0; k < s.values().size(); ++k) {
        const auto bits = std::bit_cast<std::uint64_t>(s.values().data()[k]);
        h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&bits), sizeof bits), h);
    }
    return h;
}

std::string fixed(double v, int digits) {
    if (std::isnan(v)) return "FAILED";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string significant(double v) {
    if (std::isnan(v)) return "FAILED";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.5g", v);
    return buf;
}

}  // namespace

double nmse(const TimeSeries& clean, const TimeSeries& reconstructed, const CorruptionMask& mask, NmseScope scope) {
    if (clean.length() != reconstructed.length() || clean.channels() != reconstructed.channels() ||
        mask.rows() != clean.length() || mask.cols() != clean.channels())
        throw InvalidArgument("nmse inputs differ in shape");
    if (scope == NmseScope::masked && mask.corrupted_count() == 0)
        throw InvalidArgument("nmse needs at least one masked entry");
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < clean.length(); ++t)
        for (std::size_t l = 0; l < clean.channels(); ++l) {
            if (scope == NmseScope::masked && !mask(t, l)) continue;
            const double x = clean(t, l);
            const double e = x - reconstructed(t, l);
            num += e * e;
            den += x * x;
        }
    if (den == 0.0) throw UndefinedMetric("nmse is undefined: clean values are all zero");
    return num / den;
}

void ExperimentPlan::validate() const {
    if (methods.empty()) throw InvalidArgument("plan lists no methods");
    if (proportions.empty()) throw InvalidArgument("plan lists no proportions");
    for (double p : proportions)
        if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("proportions must lie in (0, 1]");
    if (repeats < 1) throw InvalidArgument("repeats must be >= 1");
    if (train_rho && !(*train_rho >= 0.0 && *train_rho <= 1.0)) throw InvalidArgument("train_rho must lie in [0, 1]");
    if (dataset.kind == DatasetKind::csv && dataset.csv_path.empty()) throw InvalidArgument("csv dataset needs a path");
    train.validate();
}

bool CellResult::failed() const {
    for (const auto& r : repeats)
        if (r.failed) return true;
    return repeats.empty();
}

double CellResult::mean_nmse() const {
    if (failed()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (const auto& r : repeats) s += r.nmse;
    return s / static_cast<double>(repeats.size());
}

const CellResult& NmseReport::cell(ModelKind method, double rho) const {
    for (const auto& c : cells)
        if (c.method == method && rho_key(c.rho) == rho_key(rho)) return c;
    throw InvalidArgument("report has no cell for " + std::string(to_string(method)) + " at rho " + rho_key(rho));
}

std::uint64_t data_seed(const ExperimentPlan& plan, std::size_t repeat) {
    return derive_seed(plan.base_seed, fnv1a64("data"), repeat);
}

std::uint64_t corruption_seed(const ExperimentPlan& plan, double rho, std::size_t repeat) {
    return derive_seed(plan.base_seed, fnv1a64("corrupt|" + rho_key(rho)), repeat);
}

std::uint64_t cell_seed(std::uint64_t base_seed, ModelKind method, double rho, std::size_t repeat) {
    const std::string key = std::string(to_string(method)) + "|" + rho_key(rho) + "|" + std::to_string(repeat);
    return base_seed ^ splitmix64(fnv1a64(key));
}

TimeSeries load_dataset(const DatasetSpec& spec, std::uint64_t seed) {
    switch (spec.kind) {
    case DatasetKind::random: {
        RandomSeqConfig c = spec.random;
        c.seed = splitmix64(c.seed ^ seed);
        return generate_random_sequence(c);
    }
    case DatasetKind::power: {
        PowerProfileConfig c = spec.power;
        c.seed = splitmix64(c.seed ^ seed);
        return generate_power_profile(c);
    }
    case DatasetKind::csv: return read_series_csv(spec.csv_path);
    }
    throw InvalidArgument("unknown dataset kind");
}

NmseReport run_experiment(const ExperimentPlan& plan) {
    plan.validate();
    NmseReport report;
    report.plan = plan;
    for (ModelKind m : plan.methods)
        for (double rho : plan.proportions) report.cells.push_back({m, rho, {}});

    double plot_rho = plan.proportions.front();
    for (double rho : plan.proportions)
        if (rho_key(rho) == rho_key(plan.plot_rho)) plot_rho = rho;

    std::uint64_t fingerprint = 0xcbf29ce484222325ULL;
    for (std::size_t r = 0; r < plan.repeats; ++r) {
        const TimeSeries clean = load_dataset(plan.dataset, data_seed(plan, r));
        fingerprint = series_fingerprint(clean, fingerprint);
        const std::size_t plot_channel = std::min(plan.plot_channel, clean.channels() - 1);
        for (std::size_t pi = 0; pi < plan.proportions.size(); ++pi) {
            const double rho = plan.proportions[pi];
            const CorruptedSeries corrupted = corrupt_series(clean, rho, corruption_seed(plan, rho, r));
            for (std::size_t mi = 0; mi < plan.methods.size(); ++mi) {
                const ModelKind method = plan.methods[mi];
                RepeatResult res;
                res.seed = cell_seed(plan.base_seed, method, rho, r);
                const auto start = std::chrono::steady_clock::now();
                try {
                    TrainConfig cfg = plan.train;
                    cfg.seed = res.seed;
                    cfg.rho_train = plan.train_rho.value_or(rho);
                    const TrainedModel model = train_model(method, clean, corrupted, cfg);
                    const TimeSeries rec = reconstruct(model, corrupted, cfg.exec);
                    res.nmse = nmse(clean, rec, corrupted.mask(), plan.scope);
                    if (r == 0 && rho == plot_rho) {
                        PlotSeries p;
                        p.method = method;
                        p.channel = clean.channel_names()[plot_channel];
                        const auto col = static_cast<Eigen::Index>(plot_channel);
                        for (std::size_t t = 0; t < clean.length(); ++t) {
                            const auto row = static_cast<Eigen::Index>(t);
                            p.clean.push_back(clean.values()(row, col));
                            p.corrupted.push_back(corrupted.series().values()(row, col));
                            p.reconstructed.push_back(rec.values()(row, col));
                        }
                        report.plots.push_back(std::move(p));
                    }
                } catch (const std::exception& e) {
                    res.failed = true;
                    res.error = e.what();
                }
                if (plan.record_timing)
                    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                report.cells[mi * plan.proportions.size() + pi].repeats.push_back(std::move(res));
            }
        }
    }
    report.dataset_fingerprint = fingerprint;
    return report;
}

std::string format_table_text(const NmseReport& report) {
    const auto& props = report.plan.proportions;
    std::string out = "NMSE of reconstructed entries (mean over " + std::to_string(report.plan.repeats) +
                      " repeats)\n\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-10s", "method");
    out += buf;
    for (double p : props) {
        std::snprintf(buf, sizeof buf, "  rho=%-7s", fixed(p * 100.0, 0).append("%").c_str());
        out += buf;
    }
    out += '\n';
    for (ModelKind m : report.plan.methods) {
        std::snprintf(buf, sizeof buf, "%-10s", std::string(to_string(m)).c_str());
        out += buf;
        for (double p : props) {
            std::snprintf(buf, sizeof buf, "  %-11s", significant(report.cell(m, p).mean_nmse()).c_str());
            out += buf;
        }
        out += '\n';
    }
    std::snprintf(buf, sizeof buf, "\ndataset fingerprint %016llx\n",
                  static_cast<unsigned long long>(report.dataset_fingerprint));
    out += buf;
    return out;
}

std::string format_table_csv(const NmseReport& report) {
    std::string out = "method";
    for (double p : report.plan.proportions) out += ",rho=" + format_double(p);
    out += '\n';
    for (ModelKind m : report.plan.methods) {
        out += std::string(to_string(m));
        for (double p : report.plan.proportions) {
            const CellResult& c = report.cell(m, p);
            out += "," + (c.failed() ? std::string("FAILED") : format_double(c.mean_nmse()));
        }
        out += '\n';
    }
    return out;
}

std::string format_report_csv(const NmseReport& report) {
    std::string out = "method,rho,seed,nmse,seconds\n";
    for (const CellResult& c : report.cells)
        for (const RepeatResult& r : c.repeats) {
            out += std::string(to_string(c.method)) + "," + format_double(c.rho) + "," + std::to_string(r.seed) + ",";
            out += r.failed ? std::string("FAILED") : format_double(r.nmse);
            out += ",";
            if (report.plan.record_timing) out += format_double(r.seconds);
            out += '\n';
        }
    return out;
}

std::string format_plot_csv(const PlotSeries& p) {
    std::string out = "t,clean,corrupted,reconstructed\n";
    for (std::size_t t = 0; t < p.clean.size(); ++t)
        out += std::to_string(t) + "," + format_double(p.clean[t]) + "," + format_double(p.corrupted[t]) + "," +
               format_double(p.reconstructed[t]) + "\n";
    return out;
}

std::vector<std::filesystem::path> emit_report(const NmseReport& report, ReportFormat format,
                                               const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string());
    std::vector<std::filesystem::path> written;
    auto put = [&](const std::string& name, const std::string& text) {
        const auto path = dir / name;
        write_file_atomic(path, text);
        written.push_back(path);
    };
    if (format == ReportFormat::table) {
        put("table.txt", format_table_text(report));
        put("table.csv", format_table_csv(report));
        put("report.csv", format_report_csv(report));
    } else {
        for (const PlotSeries& p : report.plots) put("plot_" + std::string(to_string(p.method)) + ".csv", format_plot_csv(p));
    }
    return written;
}

}  // namespace recon
