// Command-line front end: synth | edges | train-gen | train-seg | infer |
// eval | baseline. JSON config file with flag overrides; every run directory
// receives the fully resolved config so it can be reproduced from disk.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lowbridge/data.hpp"
#include "lowbridge/edge.hpp"
#include "lowbridge/error.hpp"
#include "lowbridge/metrics.hpp"
#include "lowbridge/pgm.hpp"
#include "lowbridge/pipeline.hpp"
#include "lowbridge/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lowbridge;

namespace {

struct ConfigFile {
    json data = json::object();
    json canny = json::object();
    json generator = json::object();
    json segmenter = json::object();
    json train = json::object();
    json eval = json::object();
};

void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            known = known || it.key() == k;
        if (!known)
            throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
    }
}

ConfigFile load_config_file(const std::string& path) {
    ConfigFile cf;
    if (path.empty())
        return cf;
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("config file " + path + ": malformed JSON: " + e.what());
    }
    if (!j.is_object())
        throw ValidationError("config file " + path + ": top level must be an object");
    reject_unknown(j, {"data", "canny", "generator", "segmenter", "train", "eval"}, path);
    auto section = [&](const char* name, json& out) {
        if (!j.contains(name))
            return;
        if (!j.at(name).is_object())
            throw ValidationError("config file " + path + ": section '" + std::string(name) +
                                  "' must be an object");
        out = j.at(name);
    };
    section("data", cf.data);
    section("canny", cf.canny);
    section("generator", cf.generator);
    section("segmenter", cf.segmenter);
    section("train", cf.train);
    section("eval", cf.eval);
    reject_unknown(cf.eval, {}, "eval section"); // reserved, no keys defined yet
    return cf;
}

CannyParams canny_from_json(const json& j, CannyParams base) {
    reject_unknown(j, {"sigma", "low_ratio", "high_ratio", "kernel_radius"}, "canny section");
    if (j.contains("sigma"))
        base = base.with_sigma(j.at("sigma").get<double>());
    if (j.contains("low_ratio"))
        base.low_ratio = j.at("low_ratio").get<double>();
    if (j.contains("high_ratio"))
        base.high_ratio = j.at("high_ratio").get<double>();
    if (j.contains("kernel_radius"))
        base.kernel_radius = j.at("kernel_radius").get<int>();
    return base;
}

SynthConfig synth_from_json(const json& j, SynthConfig base) {
    reject_unknown(j, {"seed", "n_train", "n_test", "image_size", "num_structures"},
                   "data section");
    if (j.contains("seed"))
        base.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("n_train"))
        base.n_train = j.at("n_train").get<int>();
    if (j.contains("n_test"))
        base.n_test = j.at("n_test").get<int>();
    if (j.contains("image_size"))
        base.image_size = j.at("image_size").get<int>();
    if (j.contains("num_structures"))
        base.num_structures = j.at("num_structures").get<int>();
    return base;
}

void write_text(const std::string& path, const std::string& content) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty())
        fs::create_directories(parent);
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out << content;
    if (!out)
        throw IoError("failed writing " + path);
}

// Flags shared by the training subcommands. Only flags the user actually
// passed override the config file, which in turn overrides the preset.
struct TrainFlags {
    std::string preset = "desk";
    int epochs = 0;
    int batch_size = 0;
    int input_size = 0;
    double lr = 0.0;
    std::uint64_t seed = 0;
    std::string model;
    int base_channels = 0;
    int depth = 0;

    CLI::Option* epochs_opt = nullptr;
    CLI::Option* batch_opt = nullptr;
    CLI::Option* input_opt = nullptr;
    CLI::Option* lr_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* model_opt = nullptr;
    CLI::Option* base_opt = nullptr;
    CLI::Option* depth_opt = nullptr;

    void attach(CLI::App* cmd) {
        cmd->add_option("--preset", preset, "Hyperparameter preset")
            ->check(CLI::IsMember({"desk", "paper"}))
            ->capture_default_str();
        epochs_opt = cmd->add_option("--epochs", epochs, "Training epochs");
        batch_opt = cmd->add_option("--batch-size", batch_size, "Mini-batch size");
        input_opt = cmd->add_option("--input-size", input_size, "Square training resolution");
        lr_opt = cmd->add_option("--lr", lr, "Learning rate");
        seed_opt = cmd->add_option("--seed", seed, "Run seed");
        model_opt = cmd->add_option("--model", model, "Backbone kind")
                        ->check(CLI::IsMember({"unet", "mini_unet"}));
        base_opt = cmd->add_option("--base-channels", base_channels, "Channels at full res");
        depth_opt = cmd->add_option("--depth", depth, "Encoder levels");
    }

    TrainConfig resolve(const ConfigFile& cf, bool segmenter_stage) const {
        TrainConfig cfg;
        if (preset == "paper")
            cfg = segmenter_stage ? TrainConfig::segmenter_paper() : TrainConfig::generator_paper();
        else
            cfg = segmenter_stage ? TrainConfig::segmenter_desk() : TrainConfig::generator_desk();
        if (!cf.train.empty())
            cfg = train_config_from_json(cf.train.dump(), cfg);
        const json& stage = segmenter_stage ? cf.segmenter : cf.generator;
        if (!stage.empty())
            cfg = train_config_from_json(stage.dump(), cfg);
        if (epochs_opt->count())
            cfg.epochs = epochs;
        if (batch_opt->count())
            cfg.batch_size = batch_size;
        if (input_opt->count())
            cfg.input_size = input_size;
        if (lr_opt->count())
            cfg.optimizer.lr = lr;
        if (seed_opt->count())
            cfg.seed = seed;
        if (model_opt->count())
            cfg.model.kind = model_kind_from_string(model);
        if (base_opt->count())
            cfg.model.base_channels = base_channels;
        if (depth_opt->count())
            cfg.model.depth = depth;
        return cfg;
    }
};

struct CannyFlags {
    double sigma = 0.0;
    double low = 0.0;
    double high = 0.0;
    int radius = 0;
    CLI::Option* sigma_opt = nullptr;
    CLI::Option* low_opt = nullptr;
    CLI::Option* high_opt = nullptr;
    CLI::Option* radius_opt = nullptr;

    void attach(CLI::App* cmd) {
        sigma_opt = cmd->add_option("--sigma", sigma, "Gaussian blur sigma");
        low_opt = cmd->add_option("--low", low, "Hysteresis low ratio of max magnitude");
        high_opt = cmd->add_option("--high", high, "Hysteresis high ratio of max magnitude");
        radius_opt = cmd->add_option("--radius", radius, "Blur kernel radius");
    }

    CannyParams resolve(const ConfigFile& cf) const {
        CannyParams p = canny_from_json(cf.canny, CannyParams{});
        if (sigma_opt->count())
            p = p.with_sigma(sigma);
        if (low_opt->count())
            p.low_ratio = low;
        if (high_opt->count())
            p.high_ratio = high;
        if (radius_opt->count())
            p.kernel_radius = radius;
        return p;
    }
};

json canny_to_json(const CannyParams& p) {
    return json{{"sigma", p.sigma},
                {"low_ratio", p.low_ratio},
                {"high_ratio", p.high_ratio},
                {"kernel_radius", p.kernel_radius}};
}

std::string pred_name(const std::string& image_path, std::map<std::string, int>& seen) {
    std::string stem = fs::path(image_path).stem().string();
    int n = seen[stem]++;
    if (n > 0)
        stem += "_" + std::to_string(n);
    return stem + ".pred.pgm";
}

void write_report(const MetricsReport& report, const std::string& out_dir) {
    write_text((fs::path(out_dir) / "report.json").string(), report.to_json() + "\n");
    write_text((fs::path(out_dir) / "report.csv").string(), report.to_csv());
    std::cout << format_report(report);
}

int run(int argc, char** argv) {
    CLI::App app{"Cross-modal 2-D segmentation by bridging domains at the edge level.\n"
                 "Stages: extract edges, hallucinate source-style images from edges,\n"
                 "segment the hallucinated images; at test time the frozen cascade is\n"
                 "applied to the unseen modality."};
    app.require_subcommand(1);
    app.footer("Environment:\n"
               "  LOWBRIDGE_THREADS  caps worker threads (default: hardware parallelism)\n"
               "Exit codes: 0 success, 1 validation/usage error, 2 runtime failure.");
    std::string config_path;
    app.add_option("--config", config_path,
                   "JSON config file, sections {data, canny, generator, segmenter, train, eval}");

    // ---- synth ----------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "Generate the paired-modality benchmark");
    synth->fallthrough();
    std::string synth_out;
    synth->add_option("--out", synth_out, "Output dataset directory")->required();
    std::uint64_t synth_seed = 0;
    auto* synth_seed_opt = synth->add_option("--seed", synth_seed, "Dataset seed");
    int synth_ntrain = 0, synth_ntest = 0, synth_size = 0, synth_structs = 0;
    auto* ntrain_opt = synth->add_option("--n-train", synth_ntrain, "Training pairs per modality");
    auto* ntest_opt = synth->add_option("--n-test", synth_ntest, "Test pairs per modality");
    auto* size_opt = synth->add_option("--size", synth_size, "Image side length");
    auto* structs_opt = synth->add_option("--structures", synth_structs, "Foreground structures");

    // ---- edges ----------------------------------------------------------
    auto* edges = app.add_subcommand("edges", "Extract an edge map from one PGM image");
    edges->fallthrough();
    std::string edges_in, edges_out;
    edges->add_option("--in", edges_in, "Input PGM image")->required()->check(CLI::ExistingFile);
    edges->add_option("--out", edges_out, "Output PGM (default: <in stem>.edges.pgm)");
    CannyFlags edge_canny;
    edge_canny.attach(edges);

    // ---- train-gen ------------------------------------------------------
    auto* tgen = app.add_subcommand("train-gen", "Stage 1: train the edge-to-image generator");
    tgen->fallthrough();
    std::string tgen_manifest, tgen_out, tgen_ckpt;
    tgen->add_option("--manifest", tgen_manifest, "Source training manifest")
        ->required()
        ->check(CLI::ExistingFile);
    tgen->add_option("--out", tgen_out, "Run directory")->required();
    tgen->add_option("--ckpt", tgen_ckpt, "Checkpoint path (default: <out>/gen.ckpt)");
    TrainFlags tgen_flags;
    tgen_flags.attach(tgen);

    // ---- train-seg ------------------------------------------------------
    auto* tseg = app.add_subcommand("train-seg", "Stage 2: train the segmenter on generated images");
    tseg->fallthrough();
    std::string tseg_manifest, tseg_out, tseg_ckpt, tseg_gen;
    tseg->add_option("--manifest", tseg_manifest, "Labeled source training manifest")
        ->required()
        ->check(CLI::ExistingFile);
    tseg->add_option("--gen-ckpt", tseg_gen, "Frozen generator checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    tseg->add_option("--out", tseg_out, "Run directory")->required();
    tseg->add_option("--ckpt", tseg_ckpt, "Checkpoint path (default: <out>/seg.ckpt)");
    TrainFlags tseg_flags;
    tseg_flags.attach(tseg);

    // ---- infer ----------------------------------------------------------
    auto* infer = app.add_subcommand("infer", "Segment a target manifest with the frozen cascade");
    infer->fallthrough();
    std::string infer_manifest, infer_out, infer_gen, infer_seg;
    infer->add_option("--manifest", infer_manifest, "Target manifest")
        ->required()
        ->check(CLI::ExistingFile);
    infer->add_option("--gen-ckpt", infer_gen, "Generator checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    infer->add_option("--seg-ckpt", infer_seg, "Segmenter checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    infer->add_option("--out", infer_out, "Prediction directory")->required();
    CannyFlags infer_canny;
    infer_canny.attach(infer);

    // ---- eval -----------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "Score predictions against a labeled manifest");
    eval->fallthrough();
    std::string eval_manifest, eval_pred, eval_out;
    eval->add_option("--manifest", eval_manifest, "Labeled truth manifest")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--pred-dir", eval_pred, "Directory holding <stem>.pred.pgm files")
        ->required()
        ->check(CLI::ExistingDirectory);
    eval->add_option("--out", eval_out, "Report directory")->required();

    // ---- baseline -------------------------------------------------------
    auto* base = app.add_subcommand("baseline", "Train/evaluate a plain segmenter for reference");
    base->fallthrough();
    std::string base_mode, base_train, base_test, base_out;
    base->add_option("--mode", base_mode, "no-adapt: cross-modality; supervised: within-target")
        ->required()
        ->check(CLI::IsMember({"no-adapt", "supervised"}));
    base->add_option("--train-manifest", base_train, "Labeled training manifest")
        ->required()
        ->check(CLI::ExistingFile);
    base->add_option("--test-manifest", base_test, "Labeled test manifest")
        ->required()
        ->check(CLI::ExistingFile);
    base->add_option("--out", base_out, "Run directory")->required();
    TrainFlags base_flags;
    base_flags.attach(base);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // usage problems are validation errors
    }
    const ConfigFile cf = load_config_file(config_path);

    if (*synth) {
        SynthConfig cfg = synth_from_json(cf.data, SynthConfig{});
        if (synth_seed_opt->count())
            cfg.seed = synth_seed;
        if (ntrain_opt->count())
            cfg.n_train = synth_ntrain;
        if (ntest_opt->count())
            cfg.n_test = synth_ntest;
        if (size_opt->count())
            cfg.image_size = synth_size;
        if (structs_opt->count())
            cfg.num_structures = synth_structs;
        SynthOutput out = generate_synthetic_benchmark(cfg, synth_out);
        json resolved = {{"data",
                          {{"seed", cfg.seed},
                           {"n_train", cfg.n_train},
                           {"n_test", cfg.n_test},
                           {"image_size", cfg.image_size},
                           {"num_structures", cfg.num_structures}}}};
        write_text((fs::path(synth_out) / "synth_config.json").string(), resolved.dump(2) + "\n");
        std::cout << out.manifest_a_train << "\n"
                  << out.manifest_a_test << "\n"
                  << out.manifest_b_train << "\n"
                  << out.manifest_b_test << "\n";
        return 0;
    }

    if (*edges) {
        CannyParams params = edge_canny.resolve(cf);
        Image img = load_image(edges_in);
        EdgeMap e = extract_edges(img, params);
        std::string out_path = edges_out;
        if (out_path.empty()) {
            fs::path p(edges_in);
            out_path = (p.parent_path() / (p.stem().string() + ".edges.pgm")).string();
        }
        PgmData pgm;
        pgm.width = e.w;
        pgm.height = e.h;
        pgm.maxval = 255;
        pgm.pixels.resize(e.v.size());
        for (std::size_t i = 0; i < e.v.size(); ++i)
            pgm.pixels[i] = e.v[i] > 0.5f ? 255 : 0;
        write_pgm(out_path, pgm);
        std::cout << out_path << "\n";
        return 0;
    }

    if (*tgen) {
        TrainConfig cfg = tgen_flags.resolve(cf, false);
        cfg.run_dir = tgen_out;
        cfg.checkpoint_path =
            tgen_ckpt.empty() ? (fs::path(tgen_out) / "gen.ckpt").string() : tgen_ckpt;
        fs::create_directories(tgen_out);
        DatasetManifest manifest = load_manifest(tgen_manifest);
        RunRecord rec = train_generator(manifest, cfg);
        std::cout << "generator: " << rec.epochs.size() << " epochs, final loss "
                  << rec.final_loss() << "\n"
                  << cfg.checkpoint_path << "\n";
        return 0;
    }

    if (*tseg) {
        TrainConfig cfg = tseg_flags.resolve(cf, true);
        cfg.run_dir = tseg_out;
        cfg.checkpoint_path =
            tseg_ckpt.empty() ? (fs::path(tseg_out) / "seg.ckpt").string() : tseg_ckpt;
        fs::create_directories(tseg_out);
        DatasetManifest manifest = load_manifest(tseg_manifest);
        cfg.model.out_channels = manifest.num_classes;
        RunRecord rec = train_segmenter(manifest, tseg_gen, cfg);
        std::cout << "segmenter: " << rec.epochs.size() << " epochs, final loss "
                  << rec.final_loss() << "\n"
                  << cfg.checkpoint_path << "\n";
        return 0;
    }

    if (*infer) {
        CannyParams params = infer_canny.resolve(cf);
        DatasetManifest manifest = load_manifest(infer_manifest);
        std::vector<LabelMap> preds = adapt_and_segment(manifest, infer_gen, infer_seg, params);
        fs::create_directories(infer_out);
        std::map<std::string, int> seen;
        json listed = json::array();
        for (std::size_t i = 0; i < preds.size(); ++i) {
            const std::string name = pred_name(manifest.records[i].image_path, seen);
            const std::string path = (fs::path(infer_out) / name).string();
            save_label(path, preds[i], manifest.num_classes);
            listed.push_back(name);
        }
        json resolved = {{"canny", canny_to_json(params)},
                         {"generator_checkpoint", infer_gen},
                         {"segmenter_checkpoint", infer_seg},
                         {"manifest", infer_manifest},
                         {"predictions", listed}};
        write_text((fs::path(infer_out) / "infer_config.json").string(), resolved.dump(2) + "\n");
        std::cout << preds.size() << " predictions written to " << infer_out << "\n";
        return 0;
    }

    if (*eval) {
        DatasetManifest manifest = load_manifest(eval_manifest);
        if (!manifest.is_labeled())
            throw ValidationError("eval: manifest must be labeled");
        std::vector<LabelMap> preds, truths;
        std::vector<std::array<float, 2>> spacings;
        std::map<std::string, int> seen;
        for (const auto& rec : manifest.records) {
            const std::string name = pred_name(rec.image_path, seen);
            const std::string path = (fs::path(eval_pred) / name).string();
            if (!fs::exists(path))
                throw IoError("eval: missing prediction " + path);
            preds.push_back(load_label(path, manifest.num_classes));
            truths.push_back(load_label(*rec.label_path, manifest.num_classes));
            spacings.push_back(rec.spacing_mm);
        }
        MetricsReport report = evaluate_dataset(preds, truths, spacings, manifest.num_classes);
        write_report(report, eval_out);
        return 0;
    }

    if (*base) {
        TrainConfig cfg = base_flags.resolve(cf, true);
        cfg.run_dir = base_out;
        cfg.checkpoint_path = (fs::path(base_out) / "baseline.ckpt").string();
        fs::create_directories(base_out);
        DatasetManifest train_set = load_manifest(base_train);
        DatasetManifest test_set = load_manifest(base_test);
        cfg.model.out_channels = train_set.num_classes;
        BaselineMode mode =
            base_mode == "supervised" ? BaselineMode::supervised : BaselineMode::no_adapt;
        MetricsReport report = baseline(mode, train_set, test_set, cfg);
        write_report(report, base_out);
        return 0;
    }

    return 0; // unreachable: require_subcommand(1)
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
