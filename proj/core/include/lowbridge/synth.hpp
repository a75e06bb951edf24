#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lowbridge/data.hpp"
#include "lowbridge/image.hpp"

namespace lowbridge {

// Intensity mapping of one synthetic modality: per-class mean levels plus
// additive Gaussian noise.
struct ModalityRule {
    std::string name;
    std::vector<double> levels; // size num_structures+1, values in [0,1]
    double noise_sigma = 0.02;
};

// Cross-modal benchmark: both modalities share identical structure geometry
// per sample index and differ only in their intensity rules. The defaults
// invert the contrast between modalities (bright-on-dark vs dark-on-bright)
// with symmetric steps, so edge maps coincide while raw intensities do not.
struct SynthConfig {
    int image_size = 64;
    int n_train = 200;
    int n_test = 50;
    int num_structures = 2; // classes = num_structures + 1 (background)
    ModalityRule modality_a{"a", {0.10, 0.70, 0.95}, 0.02};
    ModalityRule modality_b{"b", {0.90, 0.30, 0.05}, 0.03};
    std::uint64_t seed = 1;

    void validate() const;
};

struct SynthOutput {
    std::string manifest_a_train;
    std::string manifest_a_test;
    std::string manifest_b_train;
    std::string manifest_b_test;
};

// Structure masks for one sample: class 1 is a large rotated ellipse, higher
// classes are progressively smaller disks placed with a 2 px clearance, so
// classes remain distinguishable by scale once reduced to edges.
LabelMap synth_geometry(const SynthConfig& cfg, std::uint64_t sample_index);

// Renders a geometry under one modality rule. modality_index selects the
// noise stream (0 = modality_a, 1 = modality_b).
Image synth_render(const LabelMap& geometry, const ModalityRule& rule,
                   const SynthConfig& cfg, std::uint64_t sample_index, int modality_index);

// Writes images, labels and the four manifests under out_dir
// (a_train/, a_test/, b_train/, b_test/). Fully determined by cfg.seed.
SynthOutput generate_synthetic_benchmark(const SynthConfig& cfg, const std::string& out_dir);

} // namespace lowbridge
