#pragma once

#include <map>
#include <string>
#include <vector>

#include "lowbridge/image.hpp"
#include "lowbridge/model.hpp"
#include "lowbridge/tensor.hpp"

namespace lowbridge {

struct LossWeights {
    double alpha_g = 1.0;
    double alpha_ce = 1.0;
    double alpha_dice = 1.0;

    void validate() const;
};

// Mean over all elements of (pred - target)^2.
Tensor mse_loss(const Tensor& pred, const Tensor& target);

// alpha_g * MSE(g, x).
Tensor loss_gen(const Tensor& g, const Tensor& x, const LossWeights& w = {});

// Mean over pixels of -log softmax(logits)[true class], stabilized with
// log-sum-exp. logits: [N,n,H,W], labels: N maps of HxW with classes in [0,n).
Tensor loss_ce(const Tensor& logits, const std::vector<LabelMap>& labels);

// 1 - mean over classes of (2*sum(p_c*y_c)+smooth)/(sum(p_c)+sum(y_c)+smooth)
// with p = softmax(logits), y one-hot, sums over the whole batch.
Tensor loss_dice(const Tensor& logits, const std::vector<LabelMap>& labels,
                 double smooth = 1.0);

// alpha_ce * CE + alpha_dice * Dice. Terms with zero weight are skipped.
Tensor loss_seg(const Tensor& logits, const std::vector<LabelMap>& labels,
                const LossWeights& w = {});

struct OptimizerConfig {
    enum class Kind { adam, adamw };
    Kind kind = Kind::adam;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01; // adamw only

    void validate() const;
};

// Adam / AdamW with per-parameter double-precision moments. AdamW applies the
// decoupled decay theta *= (1 - lr*wd) before the moment update. Gradients
// are left untouched; the caller zeroes them.
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig cfg);

    void step(ParameterSet& params);
    int step_count() const { return step_; }
    const OptimizerConfig& config() const { return cfg_; }

private:
    struct Slot {
        std::vector<double> m;
        std::vector<double> v;
    };
    OptimizerConfig cfg_;
    int step_ = 0;
    std::map<std::string, Slot> slots_;
};

OptimizerConfig::Kind optimizer_kind_from_string(const std::string& s);
std::string to_string(OptimizerConfig::Kind kind);

} // namespace lowbridge
