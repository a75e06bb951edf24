#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lowbridge/data.hpp"
#include "lowbridge/edge.hpp"
#include "lowbridge/metrics.hpp"
#include "lowbridge/model.hpp"
#include "lowbridge/objective.hpp"

namespace lowbridge {

// Everything a training run depends on. (config, seed, dataset bytes) fully
// determine the resulting checkpoint.
struct TrainConfig {
    int epochs = 100;
    int batch_size = 6;
    OptimizerConfig optimizer;
    LossWeights weights;
    int input_size = 224;
    std::uint64_t seed = 0;
    AugmentationConfig augmentation;
    CannyParams canny;
    ModelSpec model;
    std::string checkpoint_path; // saved after every epoch (last-good on abort)
    std::string run_dir;         // run record + resolved config; empty = no files

    void validate() const;

    // Full-scale presets: 224x224 UNet (base 16, depth 4), generator trained
    // with Adam lr 1e-4 / batch 6, segmenter with AdamW lr 1e-3 / batch 4,
    // 100 epochs, all loss weights 1.
    static TrainConfig generator_paper();
    static TrainConfig segmenter_paper();
    // Desk presets: 64x64 mini_unet (base 8, depth 3) sized so a full
    // source->target adaptation study runs on one CPU core in minutes.
    static TrainConfig generator_desk();
    static TrainConfig segmenter_desk();
};

// Canonical JSON (all fields, sorted keys). The hash is the CRC-64 of exactly
// these bytes, rendered as 16 hex digits.
std::string train_config_to_json(const TrainConfig& cfg);
// Fields present in the JSON override `base`; unknown keys are rejected.
TrainConfig train_config_from_json(const std::string& json_text, TrainConfig base = {});
std::string config_hash(const TrainConfig& cfg);

struct EpochStat {
    int epoch = 0;
    double loss = 0.0;
    double seconds = 0.0;
};

struct RunRecord {
    std::vector<EpochStat> epochs;
    double wall_seconds = 0.0;
    std::string checkpoint_path;
    std::string config_json;
    std::string config_hash;

    std::string jsonl() const; // one epoch per line: {"epoch", "loss", "seconds"}
    double final_loss() const;
};

// Stage 1: edge-to-image reconstruction. Labels in `source` are ignored.
// Loop per batch: augment -> extract_edges -> generator forward -> MSE loss.
RunRecord train_generator(const DatasetManifest& source, const TrainConfig& cfg);

// Stage 2: segmentation on generated images with the generator frozen
// (asserted). Source must be labeled. Inputs are G(E(augment(x))) recomputed
// every epoch.
RunRecord train_segmenter(const DatasetManifest& source,
                          const std::string& generator_checkpoint, const TrainConfig& cfg);

// Test-time path: argmax softmax S(G(E(x))) per record, in manifest order, at
// native image resolution. No parameter is modified; checkpoint files are
// byte-compared before/after as a hard assertion.
std::vector<LabelMap> adapt_and_segment(const DatasetManifest& target,
                                        const std::string& generator_checkpoint,
                                        const std::string& segmenter_checkpoint,
                                        const CannyParams& canny);

enum class BaselineMode {
    no_adapt,  // train on raw source images, test on raw target images
    supervised // train and test within the target modality (upper bound)
};

MetricsReport baseline(BaselineMode mode, const DatasetManifest& train_set,
                       const DatasetManifest& test_set, const TrainConfig& cfg);

} // namespace lowbridge
