#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lowbridge/edge.hpp"
#include "lowbridge/image.hpp"
#include "lowbridge/tensor.hpp"

namespace lowbridge {

enum class ModelKind { unet, mini_unet };
enum class FinalActivation { sigmoid, none };

std::string to_string(ModelKind kind);
std::string to_string(FinalActivation act);
ModelKind model_kind_from_string(const std::string& s);
FinalActivation final_activation_from_string(const std::string& s);

// Architecture description. `unet` uses two conv+norm+relu blocks per stage,
// `mini_unet` one; both share the encoder/decoder skeleton (maxpool down,
// nearest-2x up, concatenated skips, 1x1 head).
struct ModelSpec {
    ModelKind kind = ModelKind::unet;
    int in_channels = 1;
    int out_channels = 1;
    int base_channels = 16;
    int depth = 4;
    FinalActivation final_activation = FinalActivation::sigmoid;

    void validate() const;
    bool operator==(const ModelSpec&) const = default;
};

// Named parameters in lexicographic order plus provenance metadata.
struct ParameterSet {
    std::map<std::string, Tensor> tensors;
    ModelSpec spec;
    std::uint64_t seed = 0;
    int epoch = 0;

    std::size_t parameter_count() const; // total scalar count
    void set_requires_grad(bool enabled);
    void zero_grad();
};

class Model {
public:
    Model() = default;
    Model(ModelSpec spec, ParameterSet params);

    const ModelSpec& spec() const { return spec_; }
    ParameterSet& params() { return params_; }
    const ParameterSet& params() const { return params_; }

    // x is [N, in_channels, H, W] with H,W divisible by 2^depth.
    Tensor forward(const Tensor& x) const;

private:
    Tensor stage(const Tensor& x, const std::string& prefix) const;
    const Tensor& p(const std::string& name) const;

    ModelSpec spec_;
    ParameterSet params_;
};

using ModelBuilder = std::function<Model(const ModelSpec&, std::uint64_t)>;

// kind name -> builder; extensible so alternative generators/segmenters can
// be swapped in without touching the training loops.
const std::map<std::string, ModelBuilder>& model_registry();
Model build_model(const ModelSpec& spec, std::uint64_t seed);

// Batch conversions between the plain-image world and NCHW tensors.
Tensor edges_to_tensor(const std::vector<EdgeMap>& edges);
Tensor images_to_tensor(const std::vector<Image>& images);
Image tensor_to_image(const Tensor& t, int sample, int channel = 0);
LabelMap argmax_labels(const Tensor& logits, int sample);

// Inference entry points (no autograd graph is built).
Tensor forward_generator(const ParameterSet& params, const std::vector<EdgeMap>& edges);
Tensor forward_segmenter(const ParameterSet& params, const std::vector<Image>& images);

} // namespace lowbridge
