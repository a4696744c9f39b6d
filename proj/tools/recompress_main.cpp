// Command-line front end: inspect / analyze / histogram / simulate / evaluate.
//
// Exit codes: 0 success, 1 usage, 2 input format, 3 I/O.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "recompress/analysis.hpp"
#include "recompress/block_codec.hpp"
#include "recompress/corpus_sim.hpp"
#include "recompress/dct_features.hpp"
#include "recompress/errors.hpp"
#include "recompress/evaluation.hpp"
#include "recompress/io.hpp"
#include "recompress/jpeg_parser.hpp"
#include "recompress/localization.hpp"
#include "recompress/threading.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace recompress;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFormat = 2;
constexpr int kExitIo = 3;

int exit_code_for(const Error& e) {
    switch (e.code()) {
    case ErrorCode::IOFailure:
        return kExitIo;
    case ErrorCode::QFOutOfRange:
    case ErrorCode::PositionOutOfRange:
    case ErrorCode::InvalidK:
    case ErrorCode::InvalidArgument:
    case ErrorCode::SpecInvalid:
        return kExitUsage;
    default:
        return kExitFormat;
    }
}

/// Load either a real JPEG (by magic) or a coefficient dump.
CoefficientDump load_input(const fs::path& path) {
    if (looks_like_jpeg(path)) {
        CoefficientDump dump = dump_from_image(parse_jpeg_file(path));
        return dump;
    }
    return read_coefficient_dump(path);
}

int cmd_inspect(const std::string& input) {
    const CoefficientImage image = parse_jpeg_file(input);
    json doc;
    doc["source"] = input;
    doc["pixel_width"] = image.pixel_width;
    doc["pixel_height"] = image.pixel_height;
    doc["block_rows"] = image.block_rows();
    doc["block_cols"] = image.block_cols();
    doc["sampling"] = image.sampling;
    doc["edge_padded"] = image.edge_padded;
    doc["estimated_qf"] = estimate_quality(image.q_luma);
    doc["qmatrix"] = image.q_luma.entries;
    std::cout << doc.dump(2) << "\n";
    return kExitOk;
}

int cmd_analyze(const std::string& input, int k, double threshold, const std::string& out_dir,
                const std::string& rt_mode) {
    const auto started = std::chrono::steady_clock::now();
    const CoefficientDump dump = load_input(input);
    const RoundTruncateMode mode =
        rt_mode == "round" ? RoundTruncateMode::RoundOnly : RoundTruncateMode::ClampToByte;
    const AnalysisResult result = analyze_plane(dump.plane, k, mode);

    fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IOFailure("cannot create output directory " + dir.string());
    const std::string stem = fs::path(input).stem().string();
    const fs::path heat_path = dir / (stem + "_heatmap.pgm");
    const fs::path mask_path = dir / (stem + "_mask.pgm");

    // Luma-subsampled streams have a coefficient grid smaller than the pixel
    // extent; never crop beyond the heatmap itself.
    const Heatmap cropped = crop_heatmap(
        result.aggregated, std::min(dump.pixel_height, result.aggregated.values.rows()),
        std::min(dump.pixel_width, result.aggregated.values.cols()));
    write_pgm(heat_path, heatmap_to_bytes(cropped));
    write_pgm(mask_path, mask_to_bytes(binarize(cropped, threshold)));

    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    json doc;
    doc["source"] = input;
    doc["estimated_qf"] = dump.qf ? *dump.qf : estimate_quality(dump.plane.q);
    doc["k"] = k;
    doc["per_step_change_counts"] = result.per_step_change_counts;
    doc["image_score"] = result.image_score;
    doc["heatmap_path"] = heat_path.string();
    doc["mask_path"] = mask_path.string();
    doc["timing_ms"] = elapsed;
    std::cout << doc.dump(2) << "\n";
    return kExitOk;
}

int cmd_histogram(const std::string& input, const std::string& pos, int threshold,
                  const std::string& out_file) {
    const auto comma = pos.find(',');
    if (comma == std::string::npos)
        throw InvalidArgument("--pos expects \"row,col\"");
    int u = 0, v = 0;
    try {
        u = std::stoi(pos.substr(0, comma));
        v = std::stoi(pos.substr(comma + 1));
    } catch (const std::exception&) {
        throw InvalidArgument("--pos expects integers \"row,col\"");
    }
    const CoefficientDump dump = load_input(input);
    const CoefficientHistogram hist =
        coefficient_histogram(dump.plane.coeffs, u, v, threshold);
    std::string csv;
    for (int value = -hist.threshold; value <= hist.threshold; ++value)
        csv += std::to_string(value) + "," + std::to_string(hist.count(value)) + "\n";
    if (out_file.empty())
        std::cout << csv;
    else
        write_file_atomic(out_file, csv);
    return kExitOk;
}

int cmd_simulate(int pairs, int qf_min, int qf_max, std::uint64_t seed, int width, int height,
                 double min_area, double max_area, const std::string& texture,
                 const std::string& out_dir, int jobs) {
    CorpusConfig config;
    config.n_samples = 2 * pairs;
    config.qf_min = qf_min;
    config.qf_max = qf_max;
    config.seed = seed;
    config.width = width;
    config.height = height;
    config.min_area_fraction = min_area;
    config.max_area_fraction = max_area;
    config.texture = texture_kind_from_string(texture);
    config.out_dir = out_dir;
    config.jobs = jobs;
    const auto rows = generate_corpus(config);
    std::cout << "wrote " << rows.size() << " samples under " << out_dir << "\n";
    return kExitOk;
}

struct EvalItem {
    ManifestRow row;
    bool ok = false;
    PerImageResult result;
};

std::string per_image_csv(const EvalReport& report) {
    std::string csv = "id,label,f1_fixed,f1_best,best_threshold,score\n";
    for (const auto& row : report.per_image) {
        std::ostringstream line;
        line << row.id << ',' << row.label << ',' << row.f1_fixed << ',' << row.f1_best << ','
             << row.best_threshold << ',' << row.score << "\n";
        csv += line.str();
    }
    return csv;
}

int cmd_evaluate(const std::string& manifest_path, const std::string& pred_dir, bool self_run,
                 int k, const std::string& out_file, const std::string& csv_file, int jobs) {
    const fs::path manifest(manifest_path);
    const fs::path base = manifest.parent_path();
    const std::vector<ManifestRow> rows = read_manifest(manifest);
    if (rows.empty()) throw ManifestEmpty("manifest has no rows: " + manifest_path);

    std::vector<EvalItem> items(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) items[i].row = rows[i];

    std::mutex warn_mutex;
    std::vector<std::string> skipped;
    parallel_for(static_cast<int>(items.size()), jobs, [&](int idx) {
        EvalItem& item = items[static_cast<std::size_t>(idx)];
        try {
            const BinaryMask gt = mask_from_bytes(read_pgm(base / item.row.mask_path));
            Heatmap heat;
            double score = 0.0;
            std::string kind;
            if (self_run) {
                const CoefficientDump dump = read_coefficient_dump(base / item.row.coeff_path);
                const AnalysisResult result = analyze_plane(dump.plane, k);
                heat = crop_heatmap(
                    result.aggregated,
                    std::min(dump.pixel_height, result.aggregated.values.rows()),
                    std::min(dump.pixel_width, result.aggregated.values.cols()));
            } else {
                heat = heatmap_from_bytes(
                    read_pgm(fs::path(pred_dir) / (item.row.id + "_heatmap.pgm")));
            }
            score = image_level_score(heat);
            PerImageResult& r = item.result;
            r.id = item.row.id;
            r.label = item.row.label;
            r.score = score;
            if (item.row.label == "double") {
                r.f1_fixed = pixel_f1(heat, gt, 0.5);
                const auto [f1, thr] = best_threshold_f1(heat, gt);
                r.f1_best = f1;
                r.best_threshold = thr;
            }
            item.ok = true;
        } catch (const Error& e) {
            std::lock_guard<std::mutex> lock(warn_mutex);
            skipped.push_back(item.row.id);
            std::cerr << "warning: ItemSkipped " << item.row.id << ": " << e.what() << "\n";
        }
    });

    std::vector<PerImageResult> per_image;
    for (auto& item : items)
        if (item.ok) per_image.push_back(std::move(item.result));
    if (per_image.empty())
        throw ManifestEmpty("no manifest entry could be evaluated");

    EvalReport report = summarize(std::move(per_image));
    std::sort(skipped.begin(), skipped.end());
    report.skipped = std::move(skipped);
    report.score_kind = "heatmap_gmp";
    if (!report.skipped.empty())
        std::cerr << "warning: skipped " << report.skipped.size() << " of " << rows.size()
                  << " manifest entries\n";
    const std::string doc = eval_report_to_json(report);
    if (out_file.empty())
        std::cout << doc;
    else
        write_file_atomic(out_file, doc);
    if (!csv_file.empty()) write_file_atomic(csv_file, per_image_csv(report));
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"JPEG double-compression forensics toolkit"};
    app.require_subcommand(1);

    std::string input, out_dir, out_file, csv_file, pos = "0,1", rt_mode = "clamp", pred_dir,
                manifest_path, texture = "gradient";
    int k = 7, t = 20, pairs = 20, qf_min = 50, qf_max = 99, width = 128, height = 128,
        jobs = 0;
    double threshold = 0.5, min_area = 0.005, max_area = 0.015;
    std::uint64_t seed = 1;
    bool self_run = false;

    auto* inspect = app.add_subcommand("inspect", "print stream geometry and tables as JSON");
    inspect->add_option("file", input, "baseline JPEG file")->required();

    auto* analyze = app.add_subcommand("analyze", "recompression-instability tamper analysis");
    analyze->add_option("file", input, "baseline JPEG or coefficient dump")->required();
    analyze->add_option("--k", k, "recompression count")->check(CLI::Range(1, 16));
    analyze->add_option("--threshold,--t", threshold, "mask threshold")
        ->check(CLI::Range(0.0, 1.0));
    analyze->add_option("--out-dir", out_dir, "directory for heatmap/mask images");
    analyze->add_option("--rt-mode", rt_mode, "pixel rounding: clamp|round")
        ->check(CLI::IsMember({"clamp", "round"}));

    auto* histogram = app.add_subcommand("histogram", "per-position coefficient histogram CSV");
    histogram->add_option("file", input, "baseline JPEG or coefficient dump")->required();
    histogram->add_option("--pos", pos, "block position row,col (default 0,1)");
    histogram->add_option("--t", t, "histogram range [-T, T]")->check(CLI::Range(1, 1024));
    histogram->add_option("--out", out_file, "write CSV here instead of stdout");

    auto* simulate = app.add_subcommand("simulate", "generate a paired forgery corpus");
    simulate->add_option("--n", pairs, "number of tampered/authentic pairs")->check(CLI::PositiveNumber);
    simulate->add_option("--qf-min", qf_min)->check(CLI::Range(1, 100));
    simulate->add_option("--qf-max", qf_max)->check(CLI::Range(1, 100));
    simulate->add_option("--seed", seed, "corpus master seed");
    simulate->add_option("--width", width)->check(CLI::Range(8, 4096));
    simulate->add_option("--height", height)->check(CLI::Range(8, 4096));
    simulate->add_option("--min-area", min_area, "min splice area fraction");
    simulate->add_option("--max-area", max_area, "max splice area fraction");
    simulate->add_option("--texture", texture, "scene texture: noise|gradient|mixed")
        ->check(CLI::IsMember({"noise", "gradient", "mixed"}));
    simulate->add_option("--out-dir", out_dir, "corpus output directory")->required();
    simulate->add_option("--jobs", jobs, "worker threads (0 = auto)");

    auto* evaluate = app.add_subcommand("evaluate", "score predictions against a manifest");
    evaluate->add_option("--manifest", manifest_path, "corpus manifest.csv")->required();
    auto* pred_opt = evaluate->add_option("--pred-dir", pred_dir,
                                          "directory of <id>_heatmap.pgm predictions");
    auto* self_opt = evaluate->add_flag("--self-run", self_run,
                                        "run the built-in analyzer instead of reading predictions");
    pred_opt->excludes(self_opt);
    evaluate->add_option("--k", k, "recompression count for --self-run")->check(CLI::Range(1, 16));
    evaluate->add_option("--out", out_file, "write the JSON report here instead of stdout");
    evaluate->add_option("--per-image-csv", csv_file, "also write a per-image CSV table");
    evaluate->add_option("--jobs", jobs, "worker threads (0 = auto)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int cli_code = app.exit(e);
        return cli_code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (inspect->parsed()) return cmd_inspect(input);
        if (analyze->parsed()) return cmd_analyze(input, k, threshold, out_dir, rt_mode);
        if (histogram->parsed()) return cmd_histogram(input, pos, t, out_file);
        if (simulate->parsed())
            return cmd_simulate(pairs, qf_min, qf_max, seed, width, height, min_area, max_area,
                                texture, out_dir, jobs);
        if (evaluate->parsed()) {
            if (!self_run && pred_dir.empty())
                throw InvalidArgument("evaluate needs --pred-dir or --self-run");
            return cmd_evaluate(manifest_path, pred_dir, self_run, k, out_file, csv_file, jobs);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFormat;
    }
    return kExitUsage;
}
