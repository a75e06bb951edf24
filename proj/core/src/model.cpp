#include "lowbridge/model.hpp"

#include <cmath>

#include "lowbridge/error.hpp"
#include "lowbridge/ops.hpp"
#include "lowbridge/rng.hpp"

namespace lowbridge {

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::unet: return "unet";
    case ModelKind::mini_unet: return "mini_unet";
    }
    throw ValidationError("unknown model kind");
}

std::string to_string(FinalActivation act) {
    switch (act) {
    case FinalActivation::sigmoid: return "sigmoid";
    case FinalActivation::none: return "none";
    }
    throw ValidationError("unknown final activation");
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "unet")
        return ModelKind::unet;
    if (s == "mini_unet")
        return ModelKind::mini_unet;
    throw ValidationError("unknown model kind '" + s + "'");
}

FinalActivation final_activation_from_string(const std::string& s) {
    if (s == "sigmoid")
        return FinalActivation::sigmoid;
    if (s == "none")
        return FinalActivation::none;
    throw ValidationError("unknown final activation '" + s + "'");
}

void ModelSpec::validate() const {
    if (in_channels < 1)
        throw ValidationError("ModelSpec: in_channels must be >= 1");
    if (out_channels < 1)
        throw ValidationError("ModelSpec: out_channels must be >= 1");
    if (base_channels < 1)
        throw ValidationError("ModelSpec: base_channels must be >= 1");
    if (depth < 1 || depth > 10)
        throw ValidationError("ModelSpec: depth must be in [1,10]");
}

std::size_t ParameterSet::parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : tensors)
        n += static_cast<std::size_t>(t.numel());
    return n;
}

void ParameterSet::set_requires_grad(bool enabled) {
    for (auto& [name, t] : tensors)
        t.set_requires_grad(enabled);
}

void ParameterSet::zero_grad() {
    for (auto& [name, t] : tensors)
        t.zero_grad();
}

namespace {

int convs_per_stage(ModelKind kind) {
    return kind == ModelKind::unet ? 2 : 1;
}

void add_conv(ParameterSet& ps, Pcg32& rng, const std::string& prefix,
              int in_ch, int out_ch, int ksize, bool with_norm) {
    const double fan_in = static_cast<double>(in_ch) * ksize * ksize;
    const double stddev = std::sqrt(2.0 / fan_in);
    Tensor w = Tensor::zeros({out_ch, in_ch, ksize, ksize});
    float* wd = w.data();
    for (std::int64_t i = 0; i < w.numel(); ++i)
        wd[i] = static_cast<float>(rng.normal(0.0, stddev));
    ps.tensors.emplace(prefix + ".weight", std::move(w));
    ps.tensors.emplace(prefix + ".bias", Tensor::zeros({out_ch}));
    if (with_norm) {
        std::string norm = prefix;
        auto pos = norm.rfind(".conv");
        norm.replace(pos, 5, ".norm");
        ps.tensors.emplace(norm + ".gamma", Tensor::full({out_ch}, 1.0f));
        ps.tensors.emplace(norm + ".beta", Tensor::zeros({out_ch}));
    }
}

void add_stage(ParameterSet& ps, Pcg32& rng, const std::string& prefix,
               ModelKind kind, int in_ch, int out_ch) {
    const int n = convs_per_stage(kind);
    for (int i = 1; i <= n; ++i) {
        add_conv(ps, rng, prefix + ".conv" + std::to_string(i),
                 i == 1 ? in_ch : out_ch, out_ch, 3, true);
    }
}

Model build_unet_family(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    ParameterSet ps;
    ps.spec = spec;
    ps.seed = seed;
    Pcg32 rng(seed, 0x5eedu);

    const int base = spec.base_channels;
    int ch = spec.in_channels;
    for (int i = 0; i < spec.depth; ++i) {
        int out = base << i;
        add_stage(ps, rng, "enc" + std::to_string(i), spec.kind, ch, out);
        ch = out;
    }
    add_stage(ps, rng, "bottleneck", spec.kind, ch, base << spec.depth);
    for (int i = spec.depth - 1; i >= 0; --i) {
        int out = base << i;
        add_stage(ps, rng, "dec" + std::to_string(i), spec.kind, 3 * out, out);
    }
    add_conv(ps, rng, "head", base, spec.out_channels, 1, false);
    return Model(spec, std::move(ps));
}

} // namespace

const std::map<std::string, ModelBuilder>& model_registry() {
    static const std::map<std::string, ModelBuilder> registry = {
        {"unet", build_unet_family},
        {"mini_unet", build_unet_family},
    };
    return registry;
}

Model build_model(const ModelSpec& spec, std::uint64_t seed) {
    const auto& reg = model_registry();
    auto it = reg.find(to_string(spec.kind));
    if (it == reg.end())
        throw ValidationError("no builder registered for model kind '" + to_string(spec.kind) + "'");
    return it->second(spec, seed);
}

Model::Model(ModelSpec spec, ParameterSet params)
    : spec_(spec), params_(std::move(params)) {}

const Tensor& Model::p(const std::string& name) const {
    auto it = params_.tensors.find(name);
    if (it == params_.tensors.end())
        throw ValidationError("missing parameter '" + name + "'");
    return it->second;
}

Tensor Model::stage(const Tensor& x, const std::string& prefix) const {
    Tensor h = x;
    const int n = convs_per_stage(spec_.kind);
    for (int i = 1; i <= n; ++i) {
        std::string c = prefix + ".conv" + std::to_string(i);
        std::string nm = prefix + ".norm" + std::to_string(i);
        h = conv2d(h, p(c + ".weight"), p(c + ".bias"), 1, 1);
        h = instance_norm(h, p(nm + ".gamma"), p(nm + ".beta"));
        h = relu(h);
    }
    return h;
}

Tensor Model::forward(const Tensor& x) const {
    if (x.dims().size() != 4)
        throw ShapeError("model forward: input must be [N,C,H,W], got " +
                         shape_to_string(x.dims()));
    if (x.dims()[1] != spec_.in_channels)
        throw ShapeError("model forward: expected " + std::to_string(spec_.in_channels) +
                         " input channels, got " + std::to_string(x.dims()[1]));
    const std::int64_t h = x.dims()[2], w = x.dims()[3];
    const std::int64_t div = std::int64_t{1} << spec_.depth;
    if (h <= 0 || w <= 0 || h % div != 0 || w % div != 0)
        throw ShapeError("model forward: H and W must be divisible by 2^depth = " +
                         std::to_string(div) + ", got " + std::to_string(h) + "x" +
                         std::to_string(w));

    std::vector<Tensor> skips;
    skips.reserve(static_cast<std::size_t>(spec_.depth));
    Tensor cur = x;
    for (int i = 0; i < spec_.depth; ++i) {
        cur = stage(cur, "enc" + std::to_string(i));
        skips.push_back(cur);
        cur = pool_max2x2(cur);
    }
    cur = stage(cur, "bottleneck");
    for (int i = spec_.depth - 1; i >= 0; --i) {
        cur = upsample_nearest2x(cur);
        cur = concat_channels(cur, skips[static_cast<std::size_t>(i)]);
        cur = stage(cur, "dec" + std::to_string(i));
    }
    cur = conv2d(cur, p("head.weight"), p("head.bias"), 1, 0);
    if (spec_.final_activation == FinalActivation::sigmoid)
        cur = sigmoid(cur);
    return cur;
}

Tensor edges_to_tensor(const std::vector<EdgeMap>& edges) {
    if (edges.empty())
        throw ValidationError("edges_to_tensor: empty batch");
    const int h = edges[0].h, w = edges[0].w;
    Tensor t = Tensor::zeros({static_cast<std::int64_t>(edges.size()), 1, h, w});
    float* d = t.data();
    for (std::size_t n = 0; n < edges.size(); ++n) {
        if (edges[n].h != h || edges[n].w != w)
            throw ShapeError("edges_to_tensor: inconsistent dims in batch");
        std::copy(edges[n].v.begin(), edges[n].v.end(), d + n * edges[n].v.size());
    }
    return t;
}

Tensor images_to_tensor(const std::vector<Image>& images) {
    if (images.empty())
        throw ValidationError("images_to_tensor: empty batch");
    const int h = images[0].h, w = images[0].w;
    Tensor t = Tensor::zeros({static_cast<std::int64_t>(images.size()), 1, h, w});
    float* d = t.data();
    for (std::size_t n = 0; n < images.size(); ++n) {
        if (images[n].h != h || images[n].w != w)
            throw ShapeError("images_to_tensor: inconsistent dims in batch");
        std::copy(images[n].v.begin(), images[n].v.end(), d + n * images[n].v.size());
    }
    return t;
}

Image tensor_to_image(const Tensor& t, int sample, int channel) {
    if (t.dims().size() != 4)
        throw ShapeError("tensor_to_image: expected [N,C,H,W]");
    const auto& dm = t.dims();
    if (sample < 0 || sample >= dm[0] || channel < 0 || channel >= dm[1])
        throw ValidationError("tensor_to_image: sample/channel out of range");
    const int h = static_cast<int>(dm[2]), w = static_cast<int>(dm[3]);
    Image img(h, w);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const std::size_t off = (static_cast<std::size_t>(sample) * dm[1] + channel) * plane;
    std::copy(t.values().begin() + static_cast<std::ptrdiff_t>(off),
              t.values().begin() + static_cast<std::ptrdiff_t>(off + plane), img.v.begin());
    return img;
}

LabelMap argmax_labels(const Tensor& logits, int sample) {
    if (logits.dims().size() != 4)
        throw ShapeError("argmax_labels: expected [N,C,H,W]");
    const auto& dm = logits.dims();
    if (sample < 0 || sample >= dm[0])
        throw ValidationError("argmax_labels: sample out of range");
    const int nc = static_cast<int>(dm[1]);
    const int h = static_cast<int>(dm[2]), w = static_cast<int>(dm[3]);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const float* base = logits.values().data() + static_cast<std::size_t>(sample) * nc * plane;
    LabelMap out(h, w);
    for (std::size_t i = 0; i < plane; ++i) {
        int best = 0;
        float best_v = base[i];
        for (int c = 1; c < nc; ++c) {
            float v = base[static_cast<std::size_t>(c) * plane + i];
            if (v > best_v) {
                best_v = v;
                best = c;
            }
        }
        out.v[i] = best;
    }
    return out;
}

Tensor forward_generator(const ParameterSet& params, const std::vector<EdgeMap>& edges) {
    if (params.spec.in_channels != 1)
        throw ShapeError("forward_generator: generator must take 1 input channel, spec has " +
                         std::to_string(params.spec.in_channels));
    if (params.spec.out_channels != 1)
        throw ShapeError("forward_generator: generator must emit 1 channel, spec has " +
                         std::to_string(params.spec.out_channels));
    if (params.spec.final_activation != FinalActivation::sigmoid)
        throw ValidationError("forward_generator: generator spec requires a sigmoid head");
    autograd::NoGradGuard guard;
    Model model(params.spec, params);
    return model.forward(edges_to_tensor(edges));
}

Tensor forward_segmenter(const ParameterSet& params, const std::vector<Image>& images) {
    if (params.spec.in_channels != 1)
        throw ShapeError("forward_segmenter: segmenter must take 1 input channel, spec has " +
                         std::to_string(params.spec.in_channels));
    autograd::NoGradGuard guard;
    Model model(params.spec, params);
    return model.forward(images_to_tensor(images));
}

} // namespace lowbridge
