#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lowbridge/image.hpp"
#include "lowbridge/rng.hpp"

namespace lowbridge {

struct DatasetRecord {
    std::string image_path; // absolute after load_manifest
    std::optional<std::string> label_path;
    std::array<float, 2> spacing_mm{1.0f, 1.0f};
};

// On disk: {"modality": str, "num_classes": int, "records": [{"image": path,
// "label": path|null, "spacing_mm": [r, c]}]} with paths relative to the
// manifest file. Iteration order is file order.
struct DatasetManifest {
    std::string modality;
    int num_classes = 2;
    std::vector<DatasetRecord> records;

    bool is_labeled() const;
    void validate() const; // >= 1 record, labels all-or-none
};

DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

// PGM loaders. Images must use maxval 255 or 65535 and are scaled to [0,1];
// labels must use maxval = num_classes - 1 and keep integer classes.
Image load_image(const std::string& path, std::array<float, 2> spacing_mm = {1.0f, 1.0f});
LabelMap load_label(const std::string& path, int num_classes);

void save_image(const std::string& path, const Image& image, int maxval = 255);
void save_label(const std::string& path, const LabelMap& label, int num_classes);

struct AugmentationConfig {
    bool enable_crop = true;
    double crop_scale_min = 0.7; // fraction of area
    double crop_scale_max = 1.0;
    bool enable_rotation = true;
    double rotation_max_deg = 25.0; // uniform in [-max, max]
    bool enable_gamma = true;
    double gamma_min = 0.8;
    double gamma_max = 1.2;
    bool enable_contrast = true;
    double contrast_min = 0.8;
    double contrast_max = 1.2;
    int output_size = 0; // 0 = keep input size
    std::uint64_t seed = 0; // callers derive per-sample rng streams from this

    void validate() const;
};

// Shared geometric transform (rotation + random crop + resize; bilinear for
// the image, nearest for the label, replicate borders), then image-only
// intensity jitter (gamma, contrast around 0.5), clipped to [0,1]. Draws from
// rng in a fixed order regardless of the enable flags.
std::pair<Image, LabelMap> augment(const Image& image, const LabelMap& label,
                                   const AugmentationConfig& cfg, Pcg32& rng);

} // namespace lowbridge
