#pragma once

#include "recon/models.hpp"
#include "recon/synthetic.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace recon {

enum class NmseScope { masked, all };

/// sum (x - z)^2 / sum x^2 over masked entries (or every entry under NmseScope::all).
double nmse(const TimeSeries& clean, const TimeSeries& reconstructed, const CorruptionMask& mask,
            NmseScope scope = NmseScope::masked);

enum class DatasetKind { random, power, csv };

struct DatasetSpec {
    DatasetKind kind = DatasetKind::random;
    RandomSeqConfig random;
    PowerProfileConfig power;
    std::string csv_path;
};

struct ExperimentPlan {
    DatasetSpec dataset;
    std::vector<ModelKind> methods{ModelKind::AE, ModelKind::DAE, ModelKind::EDAE_LSTM};
    std::vector<double> proportions{0.1, 0.2, 0.3, 0.4, 0.5};
    std::size_t repeats = 3;
    std::uint64_t base_seed = 0;
    TrainConfig train;
    std::optional<double> train_rho;  ///< empty: train each cell at its evaluation proportion
    NmseScope scope = NmseScope::masked;
    double plot_rho = 0.2;            ///< cell whose first repeat is kept as plot data
    std::size_t plot_channel = 0;
    bool record_timing = false;       ///< wall-clock seconds are not reproducible

    void validate() const;
};

struct RepeatResult {
    std::uint64_t seed = 0;
    double nmse = 0.0;
    double seconds = 0.0;
    bool failed = false;
    std::string error;
};

struct CellResult {
    ModelKind method = ModelKind::IM;
    double rho = 0.0;
    std::vector<RepeatResult> repeats;

    bool failed() const;
    double mean_nmse() const;  ///< NaN when any repeat failed
};

struct PlotSeries {
    ModelKind method = ModelKind::IM;
    std::string channel;
    std::vector<double> clean, corrupted, reconstructed;
};

struct NmseReport {
    ExperimentPlan plan;
    std::uint64_t dataset_fingerprint = 0;
    std::vector<CellResult> cells;  ///< method-major, then proportion
    std::vector<PlotSeries> plots;

    const CellResult& cell(ModelKind method, double rho) const;
};

// Per-cell seeds. The clean series depends on the repeat only and the
// corruption on (rho, repeat), so every method in a column sees the same
// corrupted data; training seeds mix in the method name.
std::uint64_t data_seed(const ExperimentPlan& plan, std::size_t repeat);
std::uint64_t corruption_seed(const ExperimentPlan& plan, double rho, std::size_t repeat);
std::uint64_t cell_seed(std::uint64_t base_seed, ModelKind method, double rho, std::size_t repeat);

TimeSeries load_dataset(const DatasetSpec& spec, std::uint64_t seed);

NmseReport run_experiment(const ExperimentPlan& plan);

enum class ReportFormat { table, plotdata };

/// table: table.txt, table.csv, report.csv. plotdata: plot_<method>.csv per method.
std::vector<std::filesystem::path> emit_report(const NmseReport& report, ReportFormat format,
                                               const std::filesystem::path& dir);

std::string format_table_text(const NmseReport& report);
std::string format_table_csv(const NmseReport& report);
std::string format_report_csv(const NmseReport& report);
std::string format_plot_csv(const PlotSeries& plot);

}  // namespace recon
