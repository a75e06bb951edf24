#include "lowbridge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lowbridge/checkpoint.hpp"
#include "lowbridge/error.hpp"
#include "lowbridge/rng.hpp"

namespace fs = std::filesystem;

namespace lowbridge {

namespace {

constexpr std::uint64_t kShuffleStream = 0x51;
constexpr std::uint64_t kAugmentStream = 0x52;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_known_keys(const nlohmann::json& j, std::initializer_list<const char*> keys,
                        const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            known = known || it.key() == k;
        if (!known)
            throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key))
        out = j.at(key).get<T>();
}

struct LoadedSet {
    std::vector<Image> images;
    std::vector<LabelMap> labels; // empty when unlabeled
    std::vector<std::array<float, 2>> spacings;
    int num_classes = 0;
    bool labeled = false;
};

LoadedSet load_set(const DatasetManifest& manifest, int resize_to) {
    manifest.validate();
    LoadedSet set;
    set.labeled = manifest.is_labeled();
    set.num_classes = manifest.num_classes;
    for (const auto& rec : manifest.records) {
        Image img = load_image(rec.image_path, rec.spacing_mm);
        if (resize_to > 0 && (img.h != resize_to || img.w != resize_to))
            img = resize_bilinear(img, resize_to, resize_to);
        if (set.labeled) {
            LabelMap lbl = load_label(*rec.label_path, manifest.num_classes);
            if (lbl.h * lbl.w == 0 || (resize_to <= 0 && (lbl.h != img.h || lbl.w != img.w)))
                throw ShapeError("dataset: label dims differ from image dims for " +
                                 rec.image_path);
            if (resize_to > 0 && (lbl.h != resize_to || lbl.w != resize_to))
                lbl = resize_nearest(lbl, resize_to, resize_to);
            set.labels.push_back(std::move(lbl));
        }
        set.spacings.push_back(img.spacing_mm);
        set.images.push_back(std::move(img));
    }
    return set;
}

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed, int epoch) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    Pcg32 rng(mix_seed(seed, static_cast<std::uint64_t>(epoch)), kShuffleStream);
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = rng.next_below(static_cast<std::uint32_t>(i));
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

void write_run_files(const RunRecord& rec, const TrainConfig& cfg, const char* kind) {
    if (cfg.run_dir.empty())
        return;
    std::error_code ec;
    fs::create_directories(cfg.run_dir, ec);
    if (ec)
        throw IoError("cannot create run dir " + cfg.run_dir + ": " + ec.message());

    auto write_file = [&](const char* name, const std::string& content) {
        const std::string path = (fs::path(cfg.run_dir) / name).string();
        std::ofstream out(path, std::ios::trunc);
        if (!out)
            throw IoError("cannot open " + path + " for writing");
        out << content;
        if (!out)
            throw IoError("failed writing " + path);
    };
    write_file("config.json", rec.config_json + "\n");
    write_file("run_record.jsonl", rec.jsonl());
    nlohmann::json summary = {
        {"kind", kind},
        {"epochs", rec.epochs.size()},
        {"final_loss", rec.final_loss()},
        {"wall_seconds", rec.wall_seconds},
        {"checkpoint", rec.checkpoint_path},
        {"config_hash", rec.config_hash},
    };
    write_file("run_summary.json", summary.dump(2) + "\n");
}

// Shared epoch/batch scaffolding. batch_loss builds the graph for one
// augmented batch and returns the scalar loss.
RunRecord run_training(
    const char* kind, const LoadedSet& set, const TrainConfig& cfg, Model& model,
    const std::function<Tensor(std::vector<Image>&&, std::vector<LabelMap>&&)>& batch_loss) {
    const std::size_t n = set.images.size();
    const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

    model.params().set_requires_grad(true);
    Optimizer opt(cfg.optimizer);

    AugmentationConfig aug = cfg.augmentation;
    aug.output_size = cfg.input_size;

    RunRecord rec;
    rec.config_json = train_config_to_json(cfg);
    rec.config_hash = config_hash(cfg);
    rec.checkpoint_path = cfg.checkpoint_path;

    const auto t_run = Clock::now();
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t_epoch = Clock::now();
        const std::vector<std::size_t> order = shuffled_order(n, cfg.seed, epoch);
        const std::uint64_t epoch_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch));

        double loss_sum = 0.0;
        int batch_count = 0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            std::vector<Image> images;
            std::vector<LabelMap> labels;
            images.reserve(end - start);
            labels.reserve(end - start);
            for (std::size_t b = start; b < end; ++b) {
                const std::size_t k = order[b];
                Pcg32 rng(mix_seed(epoch_seed, static_cast<std::uint64_t>(k)), kAugmentStream);
                const LabelMap& lbl = set.labeled
                                          ? set.labels[k]
                                          : LabelMap(set.images[k].h, set.images[k].w, 0);
                auto [ai, al] = augment(set.images[k], lbl, aug, rng);
                images.push_back(std::move(ai));
                labels.push_back(std::move(al));
            }

            Tensor loss = batch_loss(std::move(images), std::move(labels));
            const double loss_value = loss.item();
            if (!std::isfinite(loss_value)) {
                rec.wall_seconds = seconds_since(t_run);
                write_run_files(rec, cfg, kind);
                throw TrainingDiverged(
                    std::string(kind) + " training diverged: non-finite loss at epoch " +
                    std::to_string(epoch) + ", batch " + std::to_string(batch_count + 1) +
                    (cfg.checkpoint_path.empty()
                         ? std::string()
                         : " (last-good checkpoint: " + cfg.checkpoint_path + ", epoch " +
                               std::to_string(epoch - 1) + ")"));
            }
            model.params().zero_grad();
            loss.backward();
            opt.step(model.params());
            loss_sum += loss_value;
            ++batch_count;
        }

        rec.epochs.push_back({epoch, loss_sum / std::max(1, batch_count), seconds_since(t_epoch)});
        model.params().epoch = epoch;
        if (!cfg.checkpoint_path.empty())
            save_checkpoint(model.params(), cfg.checkpoint_path);
    }
    rec.wall_seconds = seconds_since(t_run);
    write_run_files(rec, cfg, kind);
    return rec;
}

std::vector<float> snapshot_values(const ParameterSet& params) {
    std::vector<float> snap;
    for (const auto& [name, t] : params.tensors)
        snap.insert(snap.end(), t.values().begin(), t.values().end());
    return snap;
}

std::vector<char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ParameterSet load_params_checked(const std::string& path, const char* role) {
    LoadResult res = load_checkpoint(path);
    if (!res.checksum_ok)
        throw CheckpointError(CheckpointError::Kind::malformed,
                              std::string(role) + " checkpoint " + path +
                                  " failed its checksum; refusing to use it");
    return std::move(res.params);
}

void check_generator_spec(const ModelSpec& spec, const std::string& path) {
    if (spec.in_channels != 1 || spec.out_channels != 1 ||
        spec.final_activation != FinalActivation::sigmoid)
        throw ValidationError("generator checkpoint " + path +
                              " does not look like a generator (need in=1, out=1, sigmoid)");
}

} // namespace

void TrainConfig::validate() const {
    if (epochs < 1)
        throw ValidationError("TrainConfig: epochs must be >= 1");
    if (batch_size < 1)
        throw ValidationError("TrainConfig: batch_size must be >= 1");
    if (input_size < 8)
        throw ValidationError("TrainConfig: input_size must be >= 8");
    const std::int64_t div = std::int64_t{1} << model.depth;
    if (input_size % div != 0)
        throw ValidationError("TrainConfig: input_size must be divisible by 2^depth = " +
                              std::to_string(div));
    optimizer.validate();
    weights.validate();
    augmentation.validate();
    canny.validate();
    model.validate();
}

TrainConfig TrainConfig::generator_paper() {
    TrainConfig cfg;
    cfg.epochs = 100;
    cfg.batch_size = 6;
    cfg.optimizer.kind = OptimizerConfig::Kind::adam;
    cfg.optimizer.lr = 1e-4;
    cfg.input_size = 224;
    cfg.model = ModelSpec{ModelKind::unet, 1, 1, 16, 4, FinalActivation::sigmoid};
    return cfg;
}

TrainConfig TrainConfig::segmenter_paper() {
    TrainConfig cfg;
    cfg.epochs = 100;
    cfg.batch_size = 4;
    cfg.optimizer.kind = OptimizerConfig::Kind::adamw;
    cfg.optimizer.lr = 1e-3;
    cfg.input_size = 224;
    cfg.model = ModelSpec{ModelKind::unet, 1, 2, 16, 4, FinalActivation::none};
    return cfg;
}

TrainConfig TrainConfig::generator_desk() {
    TrainConfig cfg = generator_paper();
    cfg.epochs = 12;
    // Desk runs take a few hundred optimizer steps instead of tens of
    // thousands; the learning rate compensates.
    cfg.optimizer.lr = 1e-2;
    cfg.input_size = 64;
    cfg.model = ModelSpec{ModelKind::mini_unet, 1, 1, 8, 3, FinalActivation::sigmoid};
    return cfg;
}

TrainConfig TrainConfig::segmenter_desk() {
    TrainConfig cfg = segmenter_paper();
    cfg.epochs = 12;
    cfg.optimizer.lr = 1e-2;
    cfg.input_size = 64;
    cfg.model = ModelSpec{ModelKind::mini_unet, 1, 3, 8, 3, FinalActivation::none};
    return cfg;
}

std::string train_config_to_json(const TrainConfig& cfg) {
    nlohmann::json j = {
        {"epochs", cfg.epochs},
        {"batch_size", cfg.batch_size},
        {"input_size", cfg.input_size},
        {"seed", cfg.seed},
        {"optimizer",
         {{"kind", to_string(cfg.optimizer.kind)},
          {"lr", cfg.optimizer.lr},
          {"beta1", cfg.optimizer.beta1},
          {"beta2", cfg.optimizer.beta2},
          {"eps", cfg.optimizer.eps},
          {"weight_decay", cfg.optimizer.weight_decay}}},
        {"weights",
         {{"alpha_g", cfg.weights.alpha_g},
          {"alpha_ce", cfg.weights.alpha_ce},
          {"alpha_dice", cfg.weights.alpha_dice}}},
        {"augmentation",
         {{"enable_crop", cfg.augmentation.enable_crop},
          {"crop_scale_min", cfg.augmentation.crop_scale_min},
          {"crop_scale_max", cfg.augmentation.crop_scale_max},
          {"enable_rotation", cfg.augmentation.enable_rotation},
          {"rotation_max_deg", cfg.augmentation.rotation_max_deg},
          {"enable_gamma", cfg.augmentation.enable_gamma},
          {"gamma_min", cfg.augmentation.gamma_min},
          {"gamma_max", cfg.augmentation.gamma_max},
          {"enable_contrast", cfg.augmentation.enable_contrast},
          {"contrast_min", cfg.augmentation.contrast_min},
          {"contrast_max", cfg.augmentation.contrast_max}}},
        {"canny",
         {{"sigma", cfg.canny.sigma},
          {"low_ratio", cfg.canny.low_ratio},
          {"high_ratio", cfg.canny.high_ratio},
          {"kernel_radius", cfg.canny.kernel_radius}}},
        {"model",
         {{"kind", to_string(cfg.model.kind)},
          {"in_channels", cfg.model.in_channels},
          {"out_channels", cfg.model.out_channels},
          {"base_channels", cfg.model.base_channels},
          {"depth", cfg.model.depth},
          {"final_activation", to_string(cfg.model.final_activation)}}},
        {"checkpoint_path", cfg.checkpoint_path},
        {"run_dir", cfg.run_dir},
    };
    return j.dump(2);
}

TrainConfig train_config_from_json(const std::string& json_text, TrainConfig base) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config: malformed JSON: ") + e.what());
    }
    TrainConfig cfg = std::move(base);
    try {
        require_known_keys(j,
                           {"epochs", "batch_size", "input_size", "seed", "optimizer", "weights",
                            "augmentation", "canny", "model", "checkpoint_path", "run_dir"},
                           "top level");
        read_field(j, "epochs", cfg.epochs);
        read_field(j, "batch_size", cfg.batch_size);
        read_field(j, "input_size", cfg.input_size);
        read_field(j, "seed", cfg.seed);
        read_field(j, "checkpoint_path", cfg.checkpoint_path);
        read_field(j, "run_dir", cfg.run_dir);
        if (j.contains("optimizer")) {
            const auto& o = j.at("optimizer");
            require_known_keys(o, {"kind", "lr", "beta1", "beta2", "eps", "weight_decay"},
                               "optimizer");
            if (o.contains("kind"))
                cfg.optimizer.kind = optimizer_kind_from_string(o.at("kind").get<std::string>());
            read_field(o, "lr", cfg.optimizer.lr);
            read_field(o, "beta1", cfg.optimizer.beta1);
            read_field(o, "beta2", cfg.optimizer.beta2);
            read_field(o, "eps", cfg.optimizer.eps);
            read_field(o, "weight_decay", cfg.optimizer.weight_decay);
        }
        if (j.contains("weights")) {
            const auto& w = j.at("weights");
            require_known_keys(w, {"alpha_g", "alpha_ce", "alpha_dice"}, "weights");
            read_field(w, "alpha_g", cfg.weights.alpha_g);
            read_field(w, "alpha_ce", cfg.weights.alpha_ce);
            read_field(w, "alpha_dice", cfg.weights.alpha_dice);
        }
        if (j.contains("augmentation")) {
            const auto& a = j.at("augmentation");
            require_known_keys(a,
                               {"enable_crop", "crop_scale_min", "crop_scale_max",
                                "enable_rotation", "rotation_max_deg", "enable_gamma",
                                "gamma_min", "gamma_max", "enable_contrast", "contrast_min",
                                "contrast_max"},
                               "augmentation");
            read_field(a, "enable_crop", cfg.augmentation.enable_crop);
            read_field(a, "crop_scale_min", cfg.augmentation.crop_scale_min);
            read_field(a, "crop_scale_max", cfg.augmentation.crop_scale_max);
            read_field(a, "enable_rotation", cfg.augmentation.enable_rotation);
            read_field(a, "rotation_max_deg", cfg.augmentation.rotation_max_deg);
            read_field(a, "enable_gamma", cfg.augmentation.enable_gamma);
            read_field(a, "gamma_min", cfg.augmentation.gamma_min);
            read_field(a, "gamma_max", cfg.augmentation.gamma_max);
            read_field(a, "enable_contrast", cfg.augmentation.enable_contrast);
            read_field(a, "contrast_min", cfg.augmentation.contrast_min);
            read_field(a, "contrast_max", cfg.augmentation.contrast_max);
        }
        if (j.contains("canny")) {
            const auto& c = j.at("canny");
            require_known_keys(c, {"sigma", "low_ratio", "high_ratio", "kernel_radius"}, "canny");
            read_field(c, "sigma", cfg.canny.sigma);
            read_field(c, "low_ratio", cfg.canny.low_ratio);
            read_field(c, "high_ratio", cfg.canny.high_ratio);
            read_field(c, "kernel_radius", cfg.canny.kernel_radius);
        }
        if (j.contains("model")) {
            const auto& m = j.at("model");
            require_known_keys(m,
                               {"kind", "in_channels", "out_channels", "base_channels", "depth",
                                "final_activation"},
                               "model");
            if (m.contains("kind"))
                cfg.model.kind = model_kind_from_string(m.at("kind").get<std::string>());
            read_field(m, "in_channels", cfg.model.in_channels);
            read_field(m, "out_channels", cfg.model.out_channels);
            read_field(m, "base_channels", cfg.model.base_channels);
            read_field(m, "depth", cfg.model.depth);
            if (m.contains("final_activation"))
                cfg.model.final_activation =
                    final_activation_from_string(m.at("final_activation").get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config: bad field type: ") + e.what());
    }
    return cfg;
}

std::string config_hash(const TrainConfig& cfg) {
    const std::string text = train_config_to_json(cfg);
    const std::uint64_t crc =
        crc64_xz(reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(crc));
    return buf;
}

std::string RunRecord::jsonl() const {
    std::ostringstream out;
    for (const auto& e : epochs) {
        nlohmann::json j = {{"epoch", e.epoch}, {"loss", e.loss}, {"seconds", e.seconds}};
        out << j.dump() << "\n";
    }
    return out.str();
}

double RunRecord::final_loss() const {
    return epochs.empty() ? std::numeric_limits<double>::quiet_NaN() : epochs.back().loss;
}

RunRecord train_generator(const DatasetManifest& source, const TrainConfig& cfg) {
    cfg.validate();
    if (cfg.model.in_channels != 1 || cfg.model.out_channels != 1 ||
        cfg.model.final_activation != FinalActivation::sigmoid)
        throw ValidationError("train_generator: model spec must be in=1, out=1 with sigmoid head");

    LoadedSet set = load_set(source, cfg.input_size);
    Model model = build_model(cfg.model, cfg.seed);

    auto batch_loss = [&](std::vector<Image>&& images, std::vector<LabelMap>&&) {
        std::vector<EdgeMap> edges;
        edges.reserve(images.size());
        for (const Image& img : images)
            edges.push_back(extract_edges(img, cfg.canny));
        Tensor input = edges_to_tensor(edges);
        Tensor target = images_to_tensor(images);
        Tensor g = model.forward(input);
        return loss_gen(g, target, cfg.weights);
    };
    return run_training("generator", set, cfg, model, batch_loss);
}

RunRecord train_segmenter(const DatasetManifest& source,
                          const std::string& generator_checkpoint, const TrainConfig& cfg) {
    cfg.validate();
    if (!source.is_labeled())
        throw ValidationError("train_segmenter: source manifest must be labeled");
    if (cfg.weights.alpha_ce == 0.0 && cfg.weights.alpha_dice == 0.0)
        throw ValidationError("train_segmenter: alpha_ce and alpha_dice are both zero "
                              "(degenerate objective)");
    if (cfg.model.in_channels != 1)
        throw ValidationError("train_segmenter: segmenter takes 1 input channel");
    if (cfg.model.out_channels != source.num_classes)
        throw ShapeError("train_segmenter: model emits " + std::to_string(cfg.model.out_channels) +
                         " classes but the manifest declares " +
                         std::to_string(source.num_classes));

    ParameterSet gen_params = load_params_checked(generator_checkpoint, "generator");
    check_generator_spec(gen_params.spec, generator_checkpoint);
    const std::vector<float> frozen_before = snapshot_values(gen_params);
    Model generator(gen_params.spec, gen_params);

    LoadedSet set = load_set(source, cfg.input_size);
    Model model = build_model(cfg.model, cfg.seed);

    auto batch_loss = [&](std::vector<Image>&& images, std::vector<LabelMap>&& labels) {
        std::vector<EdgeMap> edges;
        edges.reserve(images.size());
        for (const Image& img : images)
            edges.push_back(extract_edges(img, cfg.canny));
        Tensor generated;
        {
            autograd::NoGradGuard guard;
            generated = generator.forward(edges_to_tensor(edges));
        }
        Tensor logits = model.forward(generated);
        return loss_seg(logits, labels, cfg.weights);
    };
    RunRecord rec = run_training("segmenter", set, cfg, model, batch_loss);

    const std::vector<float> frozen_after = snapshot_values(generator.params());
    if (frozen_before.size() != frozen_after.size() ||
        std::memcmp(frozen_before.data(), frozen_after.data(),
                    frozen_before.size() * sizeof(float)) != 0)
        throw Error("train_segmenter: frozen generator parameters changed during training");
    return rec;
}

std::vector<LabelMap> adapt_and_segment(const DatasetManifest& target,
                                        const std::string& generator_checkpoint,
                                        const std::string& segmenter_checkpoint,
                                        const CannyParams& canny) {
    target.validate();
    canny.validate();

    const std::vector<char> gen_bytes_before = read_file_bytes(generator_checkpoint);
    const std::vector<char> seg_bytes_before = read_file_bytes(segmenter_checkpoint);

    ParameterSet gen_params = load_params_checked(generator_checkpoint, "generator");
    ParameterSet seg_params = load_params_checked(segmenter_checkpoint, "segmenter");
    check_generator_spec(gen_params.spec, generator_checkpoint);
    if (seg_params.spec.in_channels != 1)
        throw ValidationError("segmenter checkpoint " + segmenter_checkpoint +
                              " must take 1 input channel");
    if (seg_params.spec.out_channels < 2)
        throw ValidationError("segmenter checkpoint " + segmenter_checkpoint +
                              " must emit at least 2 class channels");

    const std::vector<float> gen_values_before = snapshot_values(gen_params);
    const std::vector<float> seg_values_before = snapshot_values(seg_params);

    Model generator(gen_params.spec, gen_params);
    Model segmenter(seg_params.spec, seg_params);

    std::vector<LabelMap> predictions;
    predictions.reserve(target.records.size());
    autograd::NoGradGuard guard;
    for (const auto& rec : target.records) {
        Image x = load_image(rec.image_path, rec.spacing_mm);
        EdgeMap e = extract_edges(x, canny, rec.image_path);
        Tensor g = generator.forward(edges_to_tensor({e}));
        Tensor logits = segmenter.forward(g);
        predictions.push_back(argmax_labels(logits, 0));
    }

    auto unchanged = [](const std::vector<float>& a, const std::vector<float>& b) {
        return a.size() == b.size() &&
               std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
    };
    if (!unchanged(gen_values_before, snapshot_values(generator.params())) ||
        !unchanged(seg_values_before, snapshot_values(segmenter.params())))
        throw Error("adapt_and_segment: parameters were modified during inference");
    if (read_file_bytes(generator_checkpoint) != gen_bytes_before ||
        read_file_bytes(segmenter_checkpoint) != seg_bytes_before)
        throw Error("adapt_and_segment: checkpoint files changed during inference");
    return predictions;
}

MetricsReport baseline(BaselineMode mode, const DatasetManifest& train_set,
                       const DatasetManifest& test_set, const TrainConfig& cfg) {
    cfg.validate();
    if (!train_set.is_labeled() || !test_set.is_labeled())
        throw ValidationError("baseline: both manifests must be labeled");
    if (train_set.num_classes != test_set.num_classes)
        throw ValidationError("baseline: train/test class counts differ");
    if (cfg.weights.alpha_ce == 0.0 && cfg.weights.alpha_dice == 0.0)
        throw ValidationError("baseline: alpha_ce and alpha_dice are both zero");
    if (cfg.model.in_channels != 1 || cfg.model.out_channels != train_set.num_classes)
        throw ShapeError("baseline: model spec does not match the dataset class count");

    LoadedSet train = load_set(train_set, cfg.input_size);
    Model model = build_model(cfg.model, cfg.seed);

    auto batch_loss = [&](std::vector<Image>&& images, std::vector<LabelMap>&& labels) {
        Tensor logits = model.forward(images_to_tensor(images));
        return loss_seg(logits, labels, cfg.weights);
    };
    const char* kind = mode == BaselineMode::no_adapt ? "baseline_no_adapt" : "baseline_supervised";
    run_training(kind, train, cfg, model, batch_loss);

    LoadedSet test = load_set(test_set, 0);
    std::vector<LabelMap> preds;
    preds.reserve(test.images.size());
    autograd::NoGradGuard guard;
    for (const Image& img : test.images) {
        Tensor logits = model.forward(images_to_tensor({img}));
        preds.push_back(argmax_labels(logits, 0));
    }
    return evaluate_dataset(preds, test.labels, test.spacings, test.num_classes);
}

} // namespace lowbridge
