#include "recon/config.hpp"

#include "recon/error.hpp"
#include "recon/fs_util.hpp"

#include <initializer_list>
#include <string>

namespace recon {

namespace {

void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!j.is_object()) throw InvalidArgument(std::string(where) + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw InvalidArgument("unknown key `" + key + "` in " + std::string(where));
    }
}

template <class T>
void read(const Json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw InvalidArgument(std::string("bad value for `") + key + "`");
    }
}

std::string_view to_string(NoiseShape s) { return s == NoiseShape::gaussian ? "gaussian" : "uniform"; }

NoiseShape noise_shape(const std::string& s) {
    if (s == "gaussian") return NoiseShape::gaussian;
    if (s == "uniform") return NoiseShape::uniform;
    throw InvalidArgument("r_noise must be `gaussian` or `uniform`");
}

std::string_view to_string(DatasetKind k) {
    switch (k) {
    case DatasetKind::random: return "random";
    case DatasetKind::power: return "power";
    case DatasetKind::csv: return "csv";
    }
    return "random";
}

DatasetKind dataset_kind(const std::string& s) {
    if (s == "random") return DatasetKind::random;
    if (s == "power") return DatasetKind::power;
    if (s == "csv") return DatasetKind::csv;
    throw InvalidArgument("dataset kind must be `random`, `power`, or `csv`");
}

}  // namespace

RandomSeqConfig random_config_from_json(const Json& j, RandomSeqConfig c) {
    check_keys(j, {"n", "seed", "noise_scale", "r_offset", "r_span", "r_noise", "sort_by_r"}, "random config");
    read(j, "n", c.n);
    read(j, "seed", c.seed);
    read(j, "noise_scale", c.noise_scale);
    read(j, "r_offset", c.r_offset);
    read(j, "r_span", c.r_span);
    read(j, "sort_by_r", c.sort_by_r);
    if (j.contains("r_noise")) {
        std::string s;
        read(j, "r_noise", s);
        c.r_noise = noise_shape(s);
    }
    if (c.n < 1) throw InvalidArgument("n must be >= 1");
    if (!(c.noise_scale >= 0.0)) throw InvalidArgument("noise_scale must be nonnegative");
    return c;
}

PowerProfileConfig power_config_from_json(const Json& j, PowerProfileConfig c) {
    check_keys(j, {"days", "samples_per_day", "base_load", "daily_amplitude", "noise_sigma", "seed"}, "power config");
    read(j, "days", c.days);
    read(j, "samples_per_day", c.samples_per_day);
    read(j, "base_load", c.base_load);
    read(j, "daily_amplitude", c.daily_amplitude);
    read(j, "noise_sigma", c.noise_sigma);
    read(j, "seed", c.seed);
    if (c.days < 1 || c.samples_per_day < 1) throw InvalidArgument("days and samples_per_day must be >= 1");
    return c;
}

TrainConfig train_config_from_json(const Json& j, TrainConfig c) {
    check_keys(j,
               {"k_back", "k_fwd", "dense_hidden", "lstm_hidden", "lstm_code", "peephole", "sparsity_weight",
                "sparsity_target", "learning_rate", "beta1", "beta2", "epsilon", "epochs", "batch_size", "rho_train",
                "seed", "elm_hidden", "elm_lambda", "exec"},
               "train config");
    read(j, "k_back", c.window.k_back);
    read(j, "k_fwd", c.window.k_fwd);
    read(j, "dense_hidden", c.dense_hidden);
    read(j, "lstm_hidden", c.lstm_hidden);
    read(j, "lstm_code", c.lstm_code);
    read(j, "sparsity_weight", c.loss.sparsity_weight);
    read(j, "sparsity_target", c.loss.sparsity_target);
    read(j, "learning_rate", c.optimizer.learning_rate);
    read(j, "beta1", c.optimizer.beta1);
    read(j, "beta2", c.optimizer.beta2);
    read(j, "epsilon", c.optimizer.epsilon);
    read(j, "epochs", c.epochs);
    read(j, "batch_size", c.batch_size);
    read(j, "rho_train", c.rho_train);
    read(j, "seed", c.seed);
    read(j, "elm_hidden", c.elm_hidden);
    read(j, "elm_lambda", c.elm_lambda);
    if (j.contains("peephole")) {
        std::string s;
        read(j, "peephole", s);
        if (s == "full") c.peephole = nn::Peephole::full;
        else if (s == "diagonal") c.peephole = nn::Peephole::diagonal;
        else throw InvalidArgument("peephole must be `full` or `diagonal`");
    }
    if (j.contains("exec")) {
        std::string s;
        read(j, "exec", s);
        if (s == "parallel") c.exec = nn::Exec::parallel;
        else if (s == "serial") c.exec = nn::Exec::serial;
        else throw InvalidArgument("exec must be `parallel` or `serial`");
    }
    c.validate();
    return c;
}

ExperimentPlan plan_from_json(const Json& j, ExperimentPlan p) {
    check_keys(j,
               {"dataset", "methods", "proportions", "repeats", "base_seed", "train", "train_rho", "nmse_scope",
                "plot_rho", "plot_channel", "record_timing"},
               "plan");
    if (j.contains("dataset")) {
        const Json& d = j.at("dataset");
        check_keys(d, {"kind", "random", "power", "csv_path"}, "dataset");
        if (d.contains("kind")) {
            std::string s;
            read(d, "kind", s);
            p.dataset.kind = dataset_kind(s);
        }
        if (d.contains("random")) p.dataset.random = random_config_from_json(d.at("random"), p.dataset.random);
        if (d.contains("power")) p.dataset.power = power_config_from_json(d.at("power"), p.dataset.power);
        read(d, "csv_path", p.dataset.csv_path);
    }
    if (j.contains("methods")) {
        std::vector<std::string> names;
        read(j, "methods", names);
        p.methods.clear();
        for (const auto& n : names) p.methods.push_back(model_kind_from_string(n));
    }
    read(j, "proportions", p.proportions);
    read(j, "repeats", p.repeats);
    read(j, "base_seed", p.base_seed);
    if (j.contains("train")) p.train = train_config_from_json(j.at("train"), p.train);
    if (j.contains("train_rho")) {
        if (j.at("train_rho").is_null()) p.train_rho.reset();
        else {
            double v = 0.0;
            read(j, "train_rho", v);
            p.train_rho = v;
        }
    }
    if (j.contains("nmse_scope")) {
        std::string s;
        read(j, "nmse_scope", s);
        if (s == "masked") p.scope = NmseScope::masked;
        else if (s == "all") p.scope = NmseScope::all;
        else throw InvalidArgument("nmse_scope must be `masked` or `all`");
    }
    read(j, "plot_rho", p.plot_rho);
    read(j, "plot_channel", p.plot_channel);
    read(j, "record_timing", p.record_timing);
    p.validate();
    return p;
}

Json to_json(const RandomSeqConfig& c) {
    return Json{{"n", c.n},
                {"seed", c.seed},
                {"noise_scale", c.noise_scale},
                {"r_offset", c.r_offset},
                {"r_span", c.r_span},
                {"r_noise", to_string(c.r_noise)},
                {"sort_by_r", c.sort_by_r}};
}

Json to_json(const PowerProfileConfig& c) {
    return Json{{"days", c.days},
                {"samples_per_day", c.samples_per_day},
                {"base_load", c.base_load},
                {"daily_amplitude", c.daily_amplitude},
                {"noise_sigma", c.noise_sigma},
                {"seed", c.seed}};
}

Json to_json(const TrainConfig& c) {
    return Json{{"k_back", c.window.k_back},
                {"k_fwd", c.window.k_fwd},
                {"dense_hidden", c.dense_hidden},
                {"lstm_hidden", c.lstm_hidden},
                {"lstm_code", c.lstm_code},
                {"peephole", c.peephole == nn::Peephole::full ? "full" : "diagonal"},
                {"sparsity_weight", c.loss.sparsity_weight},
                {"sparsity_target", c.loss.sparsity_target},
                {"learning_rate", c.optimizer.learning_rate},
                {"beta1", c.optimizer.beta1},
                {"beta2", c.optimizer.beta2},
                {"epsilon", c.optimizer.epsilon},
                {"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"rho_train", c.rho_train},
                {"seed", c.seed},
                {"elm_hidden", c.elm_hidden},
                {"elm_lambda", c.elm_lambda},
                {"exec", c.exec == nn::Exec::parallel ? "parallel" : "serial"}};
}

Json to_json(const ExperimentPlan& p) {
    Json methods = Json::array();
    for (ModelKind m : p.methods) methods.push_back(std::string(to_string(m)));
    Json j;
    j["dataset"] = Json{{"kind", to_string(p.dataset.kind)},
                        {"random", to_json(p.dataset.random)},
                        {"power", to_json(p.dataset.power)},
                        {"csv_path", p.dataset.csv_path}};
    j["methods"] = methods;
    j["proportions"] = p.proportions;
    j["repeats"] = p.repeats;
    j["base_seed"] = p.base_seed;
    j["train"] = to_json(p.train);
    j["train_rho"] = p.train_rho ? Json(*p.train_rho) : Json(nullptr);
    j["nmse_scope"] = p.scope == NmseScope::masked ? "masked" : "all";
    j["plot_rho"] = p.plot_rho;
    j["plot_channel"] = p.plot_channel;
    j["record_timing"] = p.record_timing;
    return j;
}

Json parse_json_file(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument("cannot parse " + path.string() + ": " + e.what());
    }
}

}  // namespace recon
