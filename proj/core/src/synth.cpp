#include "lowbridge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "lowbridge/error.hpp"
#include "lowbridge/rng.hpp"

namespace fs = std::filesystem;

namespace lowbridge {

namespace {

constexpr std::uint64_t kGeometryStream = 0xA;
constexpr std::uint64_t kNoiseStreamBase = 0xB0;

void validate_rule(const ModalityRule& rule, int num_structures) {
    if (rule.name.empty())
        throw ValidationError("SynthConfig: modality name must not be empty");
    if (static_cast<int>(rule.levels.size()) != num_structures + 1)
        throw ValidationError("SynthConfig: modality '" + rule.name + "' needs " +
                              std::to_string(num_structures + 1) + " intensity levels, has " +
                              std::to_string(rule.levels.size()));
    for (double v : rule.levels)
        if (v < 0.0 || v > 1.0)
            throw ValidationError("SynthConfig: intensity levels must lie in [0,1]");
    if (rule.noise_sigma < 0.0)
        throw ValidationError("SynthConfig: noise_sigma must be >= 0");
}

// Paints a disk of `cls` iff the disk plus a 2 px clearance ring is free.
bool try_place_disk(LabelMap& geo, double cy, double cx, double radius, std::int32_t cls) {
    const int s = geo.h;
    const double clear = radius + 2.0;
    int r0 = std::max(0, static_cast<int>(std::floor(cy - clear)));
    int r1 = std::min(s - 1, static_cast<int>(std::ceil(cy + clear)));
    int c0 = std::max(0, static_cast<int>(std::floor(cx - clear)));
    int c1 = std::min(s - 1, static_cast<int>(std::ceil(cx + clear)));
    if (cy - clear < 0 || cy + clear > s - 1 || cx - clear < 0 || cx + clear > s - 1)
        return false; // keep structures away from the border
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) {
            double d2 = (r - cy) * (r - cy) + (c - cx) * (c - cx);
            if (d2 <= clear * clear && geo.at(r, c) != 0)
                return false;
        }
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) {
            double d2 = (r - cy) * (r - cy) + (c - cx) * (c - cx);
            if (d2 <= radius * radius)
                geo.at(r, c) = cls;
        }
    return true;
}

} // namespace

void SynthConfig::validate() const {
    if (image_size < 32)
        throw ValidationError("SynthConfig: image_size must be >= 32");
    if (n_train < 1 || n_test < 1)
        throw ValidationError("SynthConfig: n_train and n_test must be >= 1");
    if (num_structures < 1)
        throw ValidationError("SynthConfig: num_structures must be >= 1");
    validate_rule(modality_a, num_structures);
    validate_rule(modality_b, num_structures);
}

LabelMap synth_geometry(const SynthConfig& cfg, std::uint64_t sample_index) {
    cfg.validate();
    const int s = cfg.image_size;
    Pcg32 rng(mix_seed(cfg.seed, sample_index), kGeometryStream);
    LabelMap geo(s, s, 0);

    // Class 1: a large rotated ellipse somewhere around the middle.
    {
        double a = rng.uniform(0.17, 0.26) * s;
        double b = rng.uniform(0.17, 0.26) * s;
        double phi = rng.uniform(0.0, std::numbers::pi);
        double cy = rng.uniform(0.34, 0.66) * s;
        double cx = rng.uniform(0.34, 0.66) * s;
        double cp = std::cos(phi), sp = std::sin(phi);
        for (int r = 0; r < s; ++r)
            for (int c = 0; c < s; ++c) {
                double dy = r - cy, dx = c - cx;
                double u = cp * dx + sp * dy;
                double v = -sp * dx + cp * dy;
                if ((u * u) / (a * a) + (v * v) / (b * b) <= 1.0)
                    geo.at(r, c) = 1;
            }
    }

    // Higher classes: progressively smaller disks with clearance.
    for (int cls = 2; cls <= cfg.num_structures; ++cls) {
        double shrink = std::pow(0.85, cls - 2);
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            double radius = rng.uniform(0.055, 0.09) * s * shrink;
            double cy = rng.uniform(0.12, 0.88) * s;
            double cx = rng.uniform(0.12, 0.88) * s;
            placed = try_place_disk(geo, cy, cx, radius, cls);
        }
        if (!placed)
            throw Error("synth_geometry: could not place structure " + std::to_string(cls) +
                        " for sample " + std::to_string(sample_index));
    }
    return geo;
}

Image synth_render(const LabelMap& geometry, const ModalityRule& rule,
                   const SynthConfig& cfg, std::uint64_t sample_index, int modality_index) {
    validate_rule(rule, static_cast<int>(rule.levels.size()) - 1);
    Pcg32 rng(mix_seed(cfg.seed, sample_index),
              kNoiseStreamBase + static_cast<std::uint64_t>(modality_index));
    Image img(geometry.h, geometry.w);
    for (std::size_t i = 0; i < geometry.size(); ++i) {
        std::int32_t cls = geometry.v[i];
        if (cls < 0 || cls >= static_cast<std::int32_t>(rule.levels.size()))
            throw ValidationError("synth_render: geometry class outside the intensity table");
        double v = rule.levels[static_cast<std::size_t>(cls)] + rule.noise_sigma * rng.normal();
        img.v[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return img;
}

SynthOutput generate_synthetic_benchmark(const SynthConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    const fs::path root = out_dir;
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec)
        throw IoError("cannot create directory " + out_dir + ": " + ec.message());

    struct Split {
        const char* dir;
        const ModalityRule* rule;
        int modality_index;
        std::uint64_t first_index;
        int count;
        std::string manifest_path;
    };
    const std::uint64_t test_base = static_cast<std::uint64_t>(cfg.n_train);
    std::vector<Split> splits = {
        {"a_train", &cfg.modality_a, 0, 0, cfg.n_train, {}},
        {"a_test", &cfg.modality_a, 0, test_base, cfg.n_test, {}},
        {"b_train", &cfg.modality_b, 1, 0, cfg.n_train, {}},
        {"b_test", &cfg.modality_b, 1, test_base, cfg.n_test, {}},
    };

    const int num_classes = cfg.num_structures + 1;
    for (auto& split : splits) {
        const fs::path dir = root / split.dir;
        fs::create_directories(dir, ec);
        if (ec)
            throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

        DatasetManifest manifest;
        manifest.modality = split.rule->name;
        manifest.num_classes = num_classes;
        char name[32];
        for (int k = 0; k < split.count; ++k) {
            std::uint64_t index = split.first_index + static_cast<std::uint64_t>(k);
            LabelMap geo = synth_geometry(cfg, index);
            Image img = synth_render(geo, *split.rule, cfg, index, split.modality_index);

            std::snprintf(name, sizeof(name), "img_%04d.pgm", k);
            const std::string img_path = (dir / name).string();
            std::snprintf(name, sizeof(name), "lbl_%04d.pgm", k);
            const std::string lbl_path = (dir / name).string();
            save_image(img_path, img);
            save_label(lbl_path, geo, num_classes);

            DatasetRecord rec;
            rec.image_path = img_path;
            rec.label_path = lbl_path;
            rec.spacing_mm = {1.0f, 1.0f};
            manifest.records.push_back(std::move(rec));
        }
        split.manifest_path = (root / ("manifest_" + std::string(split.dir) + ".json")).string();
        save_manifest(manifest, split.manifest_path);
    }

    return SynthOutput{splits[0].manifest_path, splits[1].manifest_path,
                       splits[2].manifest_path, splits[3].manifest_path};
}

} // namespace lowbridge
