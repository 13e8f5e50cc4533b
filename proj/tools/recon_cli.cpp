#include "recon/config.hpp"
#include "recon/csv_io.hpp"
#include "recon/error.hpp"
#include "recon/evaluation.hpp"
#include "recon/fs_util.hpp"
#include "recon/model_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace recon;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// Raised while turning flags and config files into a resolved run; maps to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Json load_config(const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (path.empty()) return Json::object();
    Json j;
    try {
        j = parse_json_file(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (!j.is_object()) throw ConfigError(path + ": config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (auto a : allowed) known = known || key == a;
        if (!known) throw ConfigError(path + ": unknown key `" + key + "`");
    }
    return j;
}

template <class T>
T config_value(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("bad value for `") + key + "`");
    }
}

// Wraps a library parser so that its validation errors count as config errors.
template <class F>
auto resolve(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

std::string require_path(const std::string& value, const char* what) {
    if (value.empty()) throw ConfigError(std::string("missing ") + what);
    return value;
}

void echo_config(const fs::path& output, const Json& resolved) {
    fs::path echo = output;
    echo += ".config.json";
    write_file_atomic(echo, resolved.dump(2) + "\n");
}

// ------------------------------------------------------------ generate ----

struct GenerateArgs {
    std::string config, kind, out;
    std::size_t n = 0, days = 0;
    std::uint64_t seed = 0;
    CLI::Option *n_opt = nullptr, *days_opt = nullptr, *seed_opt = nullptr;
};

int cmd_generate(const GenerateArgs& a) {
    const Json cfg = load_config(a.config, {"kind", "random", "power", "out"});
    const std::string kind = a.kind.empty() ? config_value<std::string>(cfg, "kind", "random") : a.kind;
    if (kind != "random" && kind != "power") throw ConfigError("kind must be `random` or `power`");
    const std::string out = require_path(a.out.empty() ? config_value<std::string>(cfg, "out", "") : a.out, "--out");

    Json resolved{{"kind", kind}};
    std::optional<TimeSeries> series;
    if (kind == "random") {
        RandomSeqConfig rc = resolve([&] { return random_config_from_json(cfg.value("random", Json::object())); });
        if (a.n_opt->count()) rc.n = a.n;
        if (a.seed_opt->count()) rc.seed = a.seed;
        if (a.days_opt->count()) throw ConfigError("--days applies to --kind power");
        rc = resolve([&] { return random_config_from_json(to_json(rc)); });
        resolved["random"] = to_json(rc);
        series = generate_random_sequence(rc);
    } else {
        PowerProfileConfig pc = resolve([&] { return power_config_from_json(cfg.value("power", Json::object())); });
        if (a.days_opt->count()) pc.days = a.days;
        if (a.seed_opt->count()) pc.seed = a.seed;
        if (a.n_opt->count()) throw ConfigError("--n applies to --kind random");
        pc = resolve([&] { return power_config_from_json(to_json(pc)); });
        resolved["power"] = to_json(pc);
        series = generate_power_profile(pc);
    }
    resolved["out"] = out;
    write_series_csv(out, *series);
    echo_config(out, resolved);
    std::printf("wrote %zu x %zu series to %s\n", series->length(), series->channels(), out.c_str());
    return 0;
}

// ------------------------------------------------------------- corrupt ----

struct CorruptArgs {
    std::string config, in, out, mask_out;
    double rho = 0.0;
    std::uint64_t seed = 0;
    CLI::Option *rho_opt = nullptr, *seed_opt = nullptr;
};

int cmd_corrupt(const CorruptArgs& a) {
    const Json cfg = load_config(a.config, {"in", "rho", "seed", "out", "mask_out"});
    const std::string in = require_path(a.in.empty() ? config_value<std::string>(cfg, "in", "") : a.in, "--in");
    const std::string out = require_path(a.out.empty() ? config_value<std::string>(cfg, "out", "") : a.out, "--out");
    const std::string mask_out =
        require_path(a.mask_out.empty() ? config_value<std::string>(cfg, "mask_out", "") : a.mask_out, "--mask-out");
    const double rho = a.rho_opt->count() ? a.rho : config_value<double>(cfg, "rho", 0.2);
    const std::uint64_t seed = a.seed_opt->count() ? a.seed : config_value<std::uint64_t>(cfg, "seed", 0);
    if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in [0, 1]");

    const TimeSeries clean = read_series_csv(in);
    const CorruptedSeries c = corrupt_series(clean, rho, seed);
    write_series_csv(out, c.series());
    write_mask_csv(mask_out, c.mask(), clean.channel_names());
    echo_config(out, Json{{"in", in}, {"rho", rho}, {"seed", seed}, {"out", out}, {"mask_out", mask_out}});
    std::printf("corrupted %zu of %zu entries\n", c.mask().corrupted_count(), clean.length() * clean.channels());
    return 0;
}

// --------------------------------------------------------------- train ----

struct TrainArgs {
    std::string config, clean, corrupted, mask, method, out;
    std::size_t epochs = 0;
    std::uint64_t seed = 0;
    double rho_train = 0.0;
    CLI::Option *epochs_opt = nullptr, *seed_opt = nullptr, *rho_opt = nullptr;
};

int cmd_train(const TrainArgs& a) {
    const Json cfg = load_config(a.config, {"clean", "corrupted", "mask", "method", "train", "out"});
    auto pick = [&](const std::string& flag, const char* key) {
        return flag.empty() ? config_value<std::string>(cfg, key, "") : flag;
    };
    const std::string clean_path = pick(a.clean, "clean");
    const std::string corrupted_path = pick(a.corrupted, "corrupted");
    const std::string mask_path = pick(a.mask, "mask");
    const std::string out = require_path(pick(a.out, "out"), "--out");
    const ModelKind kind =
        resolve([&] { return model_kind_from_string(require_path(pick(a.method, "method"), "--method")); });

    TrainConfig tc = resolve([&] { return train_config_from_json(cfg.value("train", Json::object())); });
    if (a.epochs_opt->count()) tc.epochs = a.epochs;
    if (a.seed_opt->count()) tc.seed = a.seed;
    if (a.rho_opt->count()) tc.rho_train = a.rho_train;
    resolve([&] { tc.validate(); });

    const bool needs_corrupted = kind == ModelKind::AE;
    const bool needs_clean = kind != ModelKind::AE && kind != ModelKind::IM;
    if (needs_clean && clean_path.empty()) throw ConfigError(std::string(to_string(kind)) + " trains on --clean data");
    if (needs_corrupted && (corrupted_path.empty() || mask_path.empty()))
        throw ConfigError("AE trains on --corrupted data and needs its --mask");
    if (corrupted_path.empty() != mask_path.empty()) throw ConfigError("--corrupted and --mask go together");

    std::optional<TimeSeries> clean;
    if (!clean_path.empty()) clean = read_series_csv(clean_path);
    std::optional<CorruptedSeries> corrupted;
    if (!corrupted_path.empty()) corrupted.emplace(read_series_csv(corrupted_path), read_mask_csv(mask_path));
    if (!clean) clean = corrupted->series();
    if (!corrupted) corrupted.emplace(*clean, CorruptionMask::none(clean->length(), clean->channels()));

    const TrainedModel model = train_model(kind, *clean, *corrupted, tc);
    save_model(model, out);
    echo_config(out, Json{{"clean", clean_path},
                          {"corrupted", corrupted_path},
                          {"mask", mask_path},
                          {"method", std::string(to_string(kind))},
                          {"train", to_json(tc)},
                          {"out", out}});
    std::printf("trained %s, final loss %s, saved to %s\n", std::string(to_string(kind)).c_str(),
                format_double(model.meta.final_loss).c_str(), out.c_str());
    return 0;
}

// --------------------------------------------------------- reconstruct ----

struct ReconstructArgs {
    std::string config, model, corrupted, mask, out;
};

int cmd_reconstruct(const ReconstructArgs& a) {
    const Json cfg = load_config(a.config, {"model", "corrupted", "mask", "out"});
    auto pick = [&](const std::string& flag, const char* key, const char* what) {
        return require_path(flag.empty() ? config_value<std::string>(cfg, key, "") : flag, what);
    };
    const std::string model_path = pick(a.model, "model", "--model");
    const std::string corrupted_path = pick(a.corrupted, "corrupted", "--corrupted");
    const std::string mask_path = pick(a.mask, "mask", "--mask");
    const std::string out = pick(a.out, "out", "--out");

    const TrainedModel model = load_model(model_path);
    const CorruptedSeries corrupted(read_series_csv(corrupted_path), read_mask_csv(mask_path));
    const TimeSeries rec = reconstruct(model, corrupted);
    write_series_csv(out, rec);
    echo_config(out, Json{{"model", model_path}, {"corrupted", corrupted_path}, {"mask", mask_path}, {"out", out}});
    std::printf("reconstructed %zu entries with %s\n", corrupted.mask().corrupted_count(),
                std::string(to_string(model.kind)).c_str());
    return 0;
}

// --------------------------------------------------------------- bench ----

struct BenchArgs {
    std::string config, outdir, dataset;
    std::vector<std::string> methods;
    std::size_t repeats = 0, epochs = 0;
    std::uint64_t seed = 0;
    CLI::Option *repeats_opt = nullptr, *epochs_opt = nullptr, *seed_opt = nullptr;
};

int cmd_bench(const BenchArgs& a) {
    const Json cfg = a.config.empty() ? Json::object() : resolve([&] { return parse_json_file(a.config); });
    ExperimentPlan plan = resolve([&] { return plan_from_json(cfg); });
    if (!a.dataset.empty()) plan.dataset.kind = a.dataset == "power" ? DatasetKind::power : DatasetKind::random;
    if (!a.methods.empty()) {
        plan.methods.clear();
        for (const auto& m : a.methods) plan.methods.push_back(resolve([&] { return model_kind_from_string(m); }));
    }
    if (a.repeats_opt->count()) plan.repeats = a.repeats;
    if (a.epochs_opt->count()) plan.train.epochs = a.epochs;
    if (a.seed_opt->count()) plan.base_seed = a.seed;
    resolve([&] { plan.validate(); });
    const fs::path outdir = require_path(a.outdir, "--outdir");

    const NmseReport report = run_experiment(plan);
    emit_report(report, ReportFormat::table, outdir);
    emit_report(report, ReportFormat::plotdata, outdir);
    write_file_atomic(outdir / "config.json", to_json(plan).dump(2) + "\n");
    std::fputs(format_table_text(report).c_str(), stdout);

    for (const CellResult& c : report.cells)
        for (const RepeatResult& r : c.repeats)
            if (r.failed)
                std::fprintf(stderr, "warning: %s at rho=%s failed (seed %llu): %s\n",
                             std::string(to_string(c.method)).c_str(), format_double(c.rho).c_str(),
                             static_cast<unsigned long long>(r.seed), r.error.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Missing-data reconstruction for multichannel time series"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Write a synthetic series as CSV");
    g->add_option("--config", gen.config, "JSON config");
    g->add_option("--kind", gen.kind, "random | power")->check(CLI::IsMember({"random", "power"}));
    gen.n_opt = g->add_option("--n", gen.n, "samples (random)");
    gen.days_opt = g->add_option("--days", gen.days, "days (power)");
    gen.seed_opt = g->add_option("--seed", gen.seed, "generator seed");
    g->add_option("--out", gen.out, "output CSV");

    CorruptArgs cor;
    auto* c = app.add_subcommand("corrupt", "Zero a random proportion of entries");
    c->add_option("--config", cor.config, "JSON config");
    c->add_option("--in", cor.in, "clean series CSV");
    cor.rho_opt = c->add_option("--rho", cor.rho, "corruption proportion in [0, 1]");
    cor.seed_opt = c->add_option("--seed", cor.seed, "corruption seed");
    c->add_option("--out", cor.out, "corrupted series CSV");
    c->add_option("--mask-out", cor.mask_out, "mask CSV");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train a reconstruction model");
    t->add_option("--config", tr.config, "JSON config");
    t->add_option("--clean", tr.clean, "clean series CSV");
    t->add_option("--corrupted", tr.corrupted, "corrupted series CSV (AE)");
    t->add_option("--mask", tr.mask, "mask CSV for --corrupted");
    t->add_option("--method", tr.method, "AE | DAE | EDAE_NN | EDAE_LSTM | IM | ELM");
    tr.epochs_opt = t->add_option("--epochs", tr.epochs, "training epochs");
    tr.seed_opt = t->add_option("--seed", tr.seed, "training seed");
    tr.rho_opt = t->add_option("--rho-train", tr.rho_train, "training corruption proportion");
    t->add_option("--out", tr.out, "model file");

    ReconstructArgs rc;
    auto* r = app.add_subcommand("reconstruct", "Fill masked entries with a trained model");
    r->add_option("--config", rc.config, "JSON config");
    r->add_option("--model", rc.model, "model file");
    r->add_option("--corrupted", rc.corrupted, "corrupted series CSV");
    r->add_option("--mask", rc.mask, "mask CSV");
    r->add_option("--out", rc.out, "reconstructed series CSV");

    BenchArgs be;
    auto* b = app.add_subcommand("bench", "Run the NMSE grid and write tables and plot data");
    b->add_option("--config", be.config, "experiment plan JSON");
    b->add_option("--outdir", be.outdir, "output directory")->required();
    b->add_option("--dataset", be.dataset, "random | power")->check(CLI::IsMember({"random", "power"}));
    b->add_option("--methods", be.methods, "methods to run")->delimiter(',');
    be.repeats_opt = b->add_option("--repeats", be.repeats, "seeds per cell");
    be.epochs_opt = b->add_option("--epochs", be.epochs, "training epochs");
    be.seed_opt = b->add_option("--seed", be.seed, "base seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    CLI::App* active = app.get_subcommands().front();
    try {
        if (active == g) return cmd_generate(gen);
        if (active == c) return cmd_corrupt(cor);
        if (active == t) return cmd_train(tr);
        if (active == r) return cmd_reconstruct(rc);
        if (active == b) return cmd_bench(be);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << active->help();
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
