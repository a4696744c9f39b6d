#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "recompress/corpus_sim.hpp"
#include "recompress/io.hpp"

using namespace recompress;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kFixtures{RECOMPRESS_FIXTURES_DIR};
const fs::path kSchemas{RECOMPRESS_SCHEMAS_DIR};
const std::string kCli{RECOMPRESS_CLI};

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() / "recompress_cli_io";
    fs::create_directories(dir);
    const fs::path out = dir / ("out" + std::to_string(counter) + ".txt");
    const fs::path err = dir / ("err" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string command =
        kCli + " " + args + " >" + out.string() + " 2>" + err.string();
    const int raw = std::system(command.c_str());
    RunResult result;
    result.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    result.out = slurp(out);
    result.err = slurp(err);
    return result;
}

/// Minimal structural validator for the committed schema subset
/// (type / required / properties / items).
bool validates(const json& doc, const json& schema) {
    const std::string type = schema.value("type", "");
    if (type == "object") {
        if (!doc.is_object()) return false;
        for (const auto& req : schema.value("required", json::array()))
            if (!doc.contains(req.get<std::string>())) return false;
        if (schema.contains("properties"))
            for (const auto& [key, sub] : schema["properties"].items())
                if (doc.contains(key) && !validates(doc[key], sub)) return false;
        return true;
    }
    if (type == "array") {
        if (!doc.is_array()) return false;
        if (schema.contains("items"))
            for (const auto& item : doc)
                if (!validates(item, schema["items"])) return false;
        return true;
    }
    if (type == "string") return doc.is_string();
    if (type == "integer") return doc.is_number_integer();
    if (type == "number") return doc.is_number();
    if (type == "boolean") return doc.is_boolean();
    return true;
}

json load_schema(const std::string& name) { return json::parse(slurp(kSchemas / name)); }

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("recompress_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("inspect reports geometry and estimated quality") {
    const auto result = run_cli("inspect " + (kFixtures / "qf80_sweep.jpg").string());
    REQUIRE(result.code == 0);
    const json doc = json::parse(result.out);
    CHECK(doc["estimated_qf"] == 80);
    CHECK(validates(doc, load_schema("inspect_report.schema.json")));

    const auto gray = run_cli("inspect " + (kFixtures / "qf80_gray8_flat.jpg").string());
    REQUIRE(gray.code == 0);
    CHECK(json::parse(gray.out)["sampling"] == "gray");
}

TEST_CASE("inspect rejects non-JPEG input with exit 2") {
    const fs::path dir = scratch_dir("notjpeg");
    const fs::path bogus = dir / "bogus.jpg";
    std::ofstream(bogus) << "definitely not a jpeg";
    const auto result = run_cli("inspect " + bogus.string());
    CHECK(result.code == 2);
    CHECK(result.err.find("CorruptStream") != std::string::npos);
}

TEST_CASE("analyze writes heatmap, mask, and a schema-valid report") {
    const fs::path dir = scratch_dir("analyze");
    const auto result = run_cli("analyze " + (kFixtures / "qf80_gray8_flat.jpg").string() +
                                " --out-dir " + dir.string());
    REQUIRE(result.code == 0);
    const json doc = json::parse(result.out);
    CHECK(validates(doc, load_schema("analysis_report.schema.json")));
    CHECK(doc["image_score"] == 0.0); // flat gray block is perfectly stable
    CHECK(doc["per_step_change_counts"].size() == 7);
    for (const auto& v : doc["per_step_change_counts"]) CHECK(v == 0);

    const ByteGrid heat = read_pgm(doc["heatmap_path"].get<std::string>());
    for (auto v : heat.data()) CHECK(v == 0);
    const ByteGrid mask = read_pgm(doc["mask_path"].get<std::string>());
    CHECK(mask.rows() == 8);
    CHECK(mask.cols() == 8);
}

TEST_CASE("analyze honors --k") {
    const fs::path dir = scratch_dir("analyze_k1");
    const auto result = run_cli("analyze " + (kFixtures / "qf75_photo16.jpg").string() +
                                " --k 1 --out-dir " + dir.string());
    REQUIRE(result.code == 0);
    CHECK(json::parse(result.out)["per_step_change_counts"].size() == 1);

    const auto bad = run_cli("analyze " + (kFixtures / "qf75_photo16.jpg").string() + " --k 0");
    CHECK(bad.code == 1); // flag range is a usage error
}

TEST_CASE("analyze localizes a simulated splice dump") {
    const fs::path dir = scratch_dir("analyze_splice");
    ForgerySpec spec;
    spec.width = 128;
    spec.height = 128;
    spec.qf = 75;
    spec.seed = 4242;
    spec.texture = TextureKind::Gradient;
    spec.splice_rect = {48, 64, 32, 24};
    const LabeledSample sample = simulate_spliced_double(spec);
    CoefficientDump dump;
    dump.plane = sample.coeffs;
    dump.pixel_width = 128;
    dump.pixel_height = 128;
    dump.qf = spec.qf;
    write_coefficient_dump(dir / "splice.dump", dump);

    const auto result =
        run_cli("analyze " + (dir / "splice.dump").string() + " --out-dir " + dir.string());
    REQUIRE(result.code == 0);
    const json doc = json::parse(result.out);
    CHECK(doc["estimated_qf"] == 75);

    const ByteGrid mask = read_pgm(doc["mask_path"].get<std::string>());
    long in_hits = 0, in_total = 0, out_hits = 0, out_total = 0;
    for (int r = 0; r < 128; ++r)
        for (int c = 0; c < 128; ++c) {
            const bool inside = sample.gt_mask.pixels.at(r, c) != 0;
            (inside ? in_total : out_total) += 1;
            if (mask.at(r, c) > 0) (inside ? in_hits : out_hits) += 1;
        }
    CHECK(in_hits > 0); // predicted mask overlaps the ground truth
    CHECK(static_cast<double>(in_hits) / in_total >
          static_cast<double>(out_hits) / out_total);
}

TEST_CASE("histogram emits 2T+1 rows") {
    const auto result =
        run_cli("histogram " + (kFixtures / "qf75_photo16.jpg").string() + " --pos 0,1 --t 20");
    REQUIRE(result.code == 0);
    std::istringstream lines(result.out);
    std::string line;
    int rows = 0, nonzero = 0;
    while (std::getline(lines, line)) {
        ++rows;
        const auto comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        if (line.substr(comma + 1) != "0") ++nonzero;
    }
    CHECK(rows == 41);
    CHECK(nonzero >= 1);
}

TEST_CASE("histogram of the flat fixture is a spike at zero") {
    const auto result = run_cli("histogram " + (kFixtures / "qf80_gray8_flat.jpg").string() +
                                " --pos 0,1 --t 20");
    REQUIRE(result.code == 0);
    std::istringstream lines(result.out);
    std::string line;
    while (std::getline(lines, line)) {
        const auto comma = line.find(',');
        const std::string value = line.substr(0, comma);
        const std::string count = line.substr(comma + 1);
        CHECK(count == (value == "0" ? "1" : "0"));
    }
}

TEST_CASE("histogram shows the different-QF double-compression gaps") {
    const fs::path dir = scratch_dir("hist_gaps");
    const PixelPlane px = make_texture(TextureKind::Gradient, 96, 96, 31337);
    CoefficientDump six_oh_nine, ninety;
    six_oh_nine.plane = simulate_double(px, 60, 90);
    ninety.plane = simulate_single(px, 90);
    six_oh_nine.pixel_width = six_oh_nine.pixel_height = 96;
    ninety.pixel_width = ninety.pixel_height = 96;
    write_coefficient_dump(dir / "double.dump", six_oh_nine);
    write_coefficient_dump(dir / "single.dump", ninety);

    auto count_gaps = [&](const std::string& file) {
        const auto result = run_cli("histogram " + file + " --pos 0,1 --t 20");
        REQUIRE(result.code == 0);
        std::istringstream lines(result.out);
        std::string line;
        int gaps = 0;
        while (std::getline(lines, line)) {
            const auto comma = line.find(',');
            const int value = std::stoi(line.substr(0, comma));
            if (value > -20 && value < 20 && line.substr(comma + 1) == "0") ++gaps;
        }
        return gaps;
    };
    CHECK(count_gaps((dir / "double.dump").string()) >
          count_gaps((dir / "single.dump").string()));
}

TEST_CASE("histogram position bounds are a usage error") {
    const auto result =
        run_cli("histogram " + (kFixtures / "qf75_photo16.jpg").string() + " --pos 8,0");
    CHECK(result.code == 1);
    CHECK(result.err.find("PositionOutOfRange") != std::string::npos);
}

TEST_CASE("simulate is deterministic and respects its bounds") {
    const fs::path dir = scratch_dir("simulate");
    const std::string common = " --n 3 --qf-min 55 --qf-max 90 --seed 17 --width 64 --height 64"
                               " --min-area 0.02 --max-area 0.1";
    REQUIRE(run_cli("simulate --out-dir " + (dir / "a").string() + common).code == 0);
    REQUIRE(run_cli("simulate --out-dir " + (dir / "b").string() + common + " --jobs 4").code == 0);
    CHECK(slurp(dir / "a/manifest.csv") == slurp(dir / "b/manifest.csv"));

    const auto rows = read_manifest(dir / "a/manifest.csv");
    REQUIRE(rows.size() == 6); // 3 tampered + 3 authentic
    int tampered = 0, authentic = 0;
    for (const auto& row : rows) {
        CHECK(row.qf >= 55);
        CHECK(row.qf <= 90);
        (row.label == "double" ? tampered : authentic) += 1;
        CHECK(slurp(dir / "a" / row.coeff_path) == slurp(dir / "b" / row.coeff_path));
        CHECK(slurp(dir / "a" / row.mask_path) == slurp(dir / "b" / row.mask_path));
    }
    CHECK(tampered == 3);
    CHECK(authentic == 3);
}

TEST_CASE("evaluate scores perfect and empty predictions as documented") {
    const fs::path dir = scratch_dir("evaluate");
    const std::string sim = "simulate --out-dir " + dir.string() +
                            " --n 3 --qf-min 60 --qf-max 85 --seed 23 --width 64 --height 64"
                            " --min-area 0.05 --max-area 0.15";
    REQUIRE(run_cli(sim).code == 0);
    const auto rows = read_manifest(dir / "manifest.csv");

    SUBCASE("ground truth as predictions") {
        const fs::path preds = dir / "gt_preds";
        fs::create_directories(preds);
        for (const auto& row : rows) {
            const ByteGrid mask = read_pgm(dir / row.mask_path);
            write_pgm(preds / (row.id + "_heatmap.pgm"), mask);
        }
        const auto result = run_cli("evaluate --manifest " + (dir / "manifest.csv").string() +
                                    " --pred-dir " + preds.string());
        REQUIRE(result.code == 0);
        const json doc = json::parse(result.out);
        CHECK(validates(doc, load_schema("eval_report.schema.json")));
        CHECK(doc["f1_fixed"] == 1.0);
        CHECK(doc["f1_best"] == 1.0);
        CHECK(doc["auc"] == 1.0);
        CHECK(doc["score_kind"] == "heatmap_gmp");
    }
    SUBCASE("all-zero predictions") {
        const fs::path preds = dir / "zero_preds";
        fs::create_directories(preds);
        for (const auto& row : rows)
            write_pgm(preds / (row.id + "_heatmap.pgm"), ByteGrid(row.height, row.width));
        const auto result = run_cli("evaluate --manifest " + (dir / "manifest.csv").string() +
                                    " --pred-dir " + preds.string());
        REQUIRE(result.code == 0);
        const json doc = json::parse(result.out);
        CHECK(doc["f1_fixed"] == 0.0);
        CHECK(doc["auc"] == 0.5); // all scores tie
    }
    SUBCASE("missing predictions are skipped with a warning") {
        const fs::path preds = dir / "partial_preds";
        fs::create_directories(preds);
        bool first = true;
        for (const auto& row : rows) {
            if (first) { first = false; continue; } // drop one file
            const ByteGrid mask = read_pgm(dir / row.mask_path);
            write_pgm(preds / (row.id + "_heatmap.pgm"), mask);
        }
        const auto result = run_cli("evaluate --manifest " + (dir / "manifest.csv").string() +
                                    " --pred-dir " + preds.string());
        CHECK(result.code == 0);
        CHECK(result.err.find("ItemSkipped") != std::string::npos);
        const json doc = json::parse(result.out);
        CHECK(doc["skipped"].size() == 1);
    }
    SUBCASE("empty intersection fails with ManifestEmpty") {
        const fs::path preds = dir / "no_preds";
        fs::create_directories(preds);
        const auto result = run_cli("evaluate --manifest " + (dir / "manifest.csv").string() +
                                    " --pred-dir " + preds.string());
        CHECK(result.code == 2);
        CHECK(result.err.find("ManifestEmpty") != std::string::npos);
    }
}

TEST_CASE("evaluate --self-run produces byte-identical reports across runs") {
    const fs::path dir = scratch_dir("selfrun");
    const std::string sim = "simulate --out-dir " + dir.string() +
                            " --n 2 --qf-min 60 --qf-max 85 --seed 29 --width 64 --height 64"
                            " --min-area 0.05 --max-area 0.15";
    REQUIRE(run_cli(sim).code == 0);
    const std::string eval = "evaluate --manifest " + (dir / "manifest.csv").string() +
                             " --self-run --k 3";
    const auto a = run_cli(eval + " --out " + (dir / "a.json").string());
    const auto b = run_cli(eval + " --jobs 4 --out " + (dir / "b.json").string());
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    const json doc = json::parse(slurp(dir / "a.json"));
    CHECK(validates(doc, load_schema("eval_report.schema.json")));
    CHECK(doc["score_kind"] == "heatmap_gmp");
    CHECK(doc["n_images"] == 4);
}

TEST_CASE("evaluate writes the optional per-image CSV") {
    const fs::path dir = scratch_dir("evalcsv");
    REQUIRE(run_cli("simulate --out-dir " + dir.string() +
                    " --n 2 --qf-min 60 --qf-max 85 --seed 31 --width 64 --height 64"
                    " --min-area 0.05 --max-area 0.15")
                .code == 0);
    const auto result = run_cli("evaluate --manifest " + (dir / "manifest.csv").string() +
                                " --self-run --k 2 --out " + (dir / "r.json").string() +
                                " --per-image-csv " + (dir / "r.csv").string());
    REQUIRE(result.code == 0);
    const std::string csv = slurp(dir / "r.csv");
    CHECK(csv.rfind("id,label,f1_fixed", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5); // header + 4 rows
}

TEST_CASE("RECOMPRESS_JOBS overrides --jobs without changing output") {
    const fs::path dir = scratch_dir("jobsenv");
    const std::string sim = " --n 2 --qf-min 60 --qf-max 85 --seed 37 --width 64 --height 64"
                            " --min-area 0.05 --max-area 0.15 --jobs 1";
    REQUIRE(run_cli("simulate --out-dir " + (dir / "a").string() + sim).code == 0);
    const int raw = std::system(("RECOMPRESS_JOBS=4 " + kCli + " simulate --out-dir " +
                                 (dir / "b").string() + sim + " >/dev/null 2>&1")
                                    .c_str());
    REQUIRE(WIFEXITED(raw));
    REQUIRE(WEXITSTATUS(raw) == 0);
    CHECK(slurp(dir / "a/manifest.csv") == slurp(dir / "b/manifest.csv"));
    const auto rows = read_manifest(dir / "a/manifest.csv");
    for (const auto& row : rows)
        CHECK(slurp(dir / "a" / row.coeff_path) == slurp(dir / "b" / row.coeff_path));
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run_cli("").code == 1);
    CHECK(run_cli("frobnicate x").code == 1);
    CHECK(run_cli("evaluate --manifest nowhere.csv").code == 1); // needs a mode
}
