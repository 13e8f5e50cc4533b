#include "recon/error.hpp"
#include "recon/fs_util.hpp"
#include "recon/model_io.hpp"
#include "recon/rng.hpp"
#include "recon/synthetic.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>

using namespace recon;

namespace {

TrainConfig tiny(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.seed = seed;
    cfg.window = {1, 2};
    cfg.dense_hidden = 6;
    cfg.lstm_hidden = 5;
    cfg.elm_hidden = 12;
    return cfg;
}

TimeSeries data() {
    PowerProfileConfig p;
    p.days = 1;
    p.samples_per_day = 120;
    p.seed = 8;
    return generate_power_profile(p);
}

// Replaces the trailing checksum so that an edited body passes the integrity check.
std::string reseal(std::string bytes) {
    bytes.resize(bytes.size() - 8);
    const std::uint64_t h = fnv1a64(bytes);
    bytes.append(reinterpret_cast<const char*>(&h), 8);
    return bytes;
}

template <class T>
void poke(std::string& bytes, std::size_t at, T v) {
    std::memcpy(bytes.data() + at, &v, sizeof v);
}

}  // namespace

TEST_CASE("every kind survives save, load, save") {
    const TimeSeries clean = data();
    const CorruptedSeries c = corrupt_series(clean, 0.2, 3);
    for (ModelKind kind : kAllModelKinds) {
        CAPTURE(to_string(kind));
        TrainConfig cfg = tiny(4);
        if (kind == ModelKind::EDAE_LSTM) cfg.peephole = nn::Peephole::diagonal;
        const TrainedModel m = train_model(kind, clean, c, cfg);
        const std::string bytes = serialize_model(m);
        const TrainedModel back = deserialize_model(bytes);
        CHECK(serialize_model(back) == bytes);
        CHECK(back.kind == m.kind);
        CHECK(back.window == m.window);
        CHECK(back.norm == m.norm);
        CHECK(back.meta.seed == m.meta.seed);
        CHECK(back.meta.final_loss == m.meta.final_loss);
        CHECK(reconstruct(back, c).values() == reconstruct(m, c).values());
    }
}

TEST_CASE("files on disk round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "recon_model_io";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const TimeSeries clean = data();
    const TrainedModel m = train_model(ModelKind::EDAE_LSTM, clean, corrupt_series(clean, 0.1, 1), tiny(5));
    save_model(m, dir / "a.model");
    save_model(load_model(dir / "a.model"), dir / "b.model");
    CHECK(read_file(dir / "a.model") == read_file(dir / "b.model"));

    const TrainedModel again = train_model(ModelKind::EDAE_LSTM, clean, corrupt_series(clean, 0.1, 1), tiny(5));
    CHECK(serialize_model(again) == read_file(dir / "a.model"));

    CHECK_THROWS_AS(load_model(dir / "missing.model"), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("damaged files raise distinct load errors") {
    const TimeSeries clean = data();
    const std::string bytes = serialize_model(train_model(ModelKind::DAE, clean, corrupt_series(clean, 0.1, 1), tiny(6)));

    SUBCASE("truncated") {
        for (std::size_t keep : {std::size_t{0}, std::size_t{5}, std::size_t{40}, bytes.size() - 1})
            CHECK_THROWS_AS(deserialize_model(bytes.substr(0, keep)), CorruptFile);
    }
    SUBCASE("flipped payload byte") {
        std::string b = bytes;
        b[b.size() / 2] ^= 0x40;
        CHECK_THROWS_AS(deserialize_model(b), CorruptFile);
    }
    SUBCASE("trailing garbage") {
        CHECK_THROWS_AS(deserialize_model(bytes + "x"), CorruptFile);
    }
    SUBCASE("not a model") {
        CHECK_THROWS_AS(deserialize_model("t,x\n0,1\n"), CorruptFile);
    }
    SUBCASE("future version") {
        std::string b = bytes;
        poke<std::uint32_t>(b, 8, kModelFormatVersion + 1);
        try {
            deserialize_model(reseal(b));
            FAIL("expected VersionMismatch");
        } catch (const VersionMismatch& e) {
            CHECK(e.reason() == ModelLoadError::Reason::version_mismatch);
        }
    }
    SUBCASE("shapes disagree with the window") {
        // Layout: magic(8) version(4) kind(4 + 3 for "DAE") channels(8) k_back(8) ...
        std::string b = bytes;
        poke<std::uint64_t>(b, 8 + 4 + 4 + 3 + 8, 2);
        try {
            deserialize_model(reseal(b));
            FAIL("expected ShapeMismatch");
        } catch (const ShapeMismatch& e) {
            CHECK(e.reason() == ModelLoadError::Reason::shape_mismatch);
        }
    }
}
