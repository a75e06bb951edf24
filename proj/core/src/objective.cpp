#include "lowbridge/objective.hpp"

#include <cmath>
#include <memory>

#include "lowbridge/error.hpp"
#include "lowbridge/ops.hpp"

namespace lowbridge {

void LossWeights::validate() const {
    if (alpha_g < 0.0 || alpha_ce < 0.0 || alpha_dice < 0.0)
        throw ValidationError("LossWeights: weights must be >= 0");
}

namespace {

struct BatchView {
    std::int64_t n, c, h, w;
    std::size_t plane;  // h*w
    std::size_t pixels; // n*h*w
};

BatchView check_logits_labels(const Tensor& logits, const std::vector<LabelMap>& labels,
                              const char* who) {
    if (logits.dims().size() != 4)
        throw ShapeError(std::string(who) + ": logits must be [N,C,H,W], got " +
                         shape_to_string(logits.dims()));
    BatchView v;
    v.n = logits.dims()[0];
    v.c = logits.dims()[1];
    v.h = logits.dims()[2];
    v.w = logits.dims()[3];
    if (v.c < 1)
        throw ShapeError(std::string(who) + ": logits need at least 1 class channel");
    if (static_cast<std::int64_t>(labels.size()) != v.n)
        throw ShapeError(std::string(who) + ": batch size mismatch: logits N=" +
                         std::to_string(v.n) + ", labels N=" + std::to_string(labels.size()));
    for (const auto& lm : labels) {
        if (lm.h != v.h || lm.w != v.w)
            throw ShapeError(std::string(who) + ": label dims mismatch");
        for (std::int32_t cls : lm.v)
            if (cls < 0 || cls >= v.c)
                throw ValidationError(std::string(who) + ": label value " + std::to_string(cls) +
                                      " outside [0," + std::to_string(v.c) + ")");
    }
    v.plane = static_cast<std::size_t>(v.h) * static_cast<std::size_t>(v.w);
    v.pixels = static_cast<std::size_t>(v.n) * v.plane;
    return v;
}

std::shared_ptr<std::vector<std::int32_t>> flatten_labels(const std::vector<LabelMap>& labels) {
    auto flat = std::make_shared<std::vector<std::int32_t>>();
    std::size_t total = 0;
    for (const auto& lm : labels)
        total += lm.size();
    flat->reserve(total);
    for (const auto& lm : labels)
        flat->insert(flat->end(), lm.v.begin(), lm.v.end());
    return flat;
}

// Per-pixel softmax over the channel axis, computed in double and stored as
// float [N,C,H,W].
std::shared_ptr<std::vector<float>> softmax_probs(const Tensor& logits, const BatchView& v) {
    auto probs = std::make_shared<std::vector<float>>(static_cast<std::size_t>(logits.numel()));
    const float* x = logits.data();
    for (std::int64_t n = 0; n < v.n; ++n) {
        const float* xn = x + static_cast<std::size_t>(n) * v.c * v.plane;
        float* pn = probs->data() + static_cast<std::size_t>(n) * v.c * v.plane;
        for (std::size_t i = 0; i < v.plane; ++i) {
            double mx = xn[i];
            for (std::int64_t c = 1; c < v.c; ++c)
                mx = std::max(mx, static_cast<double>(xn[static_cast<std::size_t>(c) * v.plane + i]));
            double sum = 0.0;
            for (std::int64_t c = 0; c < v.c; ++c)
                sum += std::exp(static_cast<double>(xn[static_cast<std::size_t>(c) * v.plane + i]) - mx);
            for (std::int64_t c = 0; c < v.c; ++c) {
                double e = std::exp(static_cast<double>(xn[static_cast<std::size_t>(c) * v.plane + i]) - mx);
                pn[static_cast<std::size_t>(c) * v.plane + i] = static_cast<float>(e / sum);
            }
        }
    }
    return probs;
}

} // namespace

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    if (pred.dims() != target.dims())
        throw ShapeError("mse_loss: shape mismatch " + shape_to_string(pred.dims()) + " vs " +
                         shape_to_string(target.dims()));
    const std::size_t n = static_cast<std::size_t>(pred.numel());
    if (n == 0)
        throw ValidationError("mse_loss: empty tensors");
    const float* p = pred.data();
    const float* t = target.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = static_cast<double>(p[i]) - static_cast<double>(t[i]);
        acc += d * d;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    float loss = static_cast<float>(acc * inv_n);

    Tensor pred_k = pred, target_k = target;
    return autograd::make_op(
        {1}, {loss}, {pred, target},
        [pred_k, target_k, n, inv_n](std::span<const float> gout,
                                     std::span<const std::span<float>> pg) {
            const double g = static_cast<double>(gout[0]);
            const float* p = pred_k.data();
            const float* t = target_k.data();
            for (std::size_t i = 0; i < n; ++i) {
                double d = 2.0 * (static_cast<double>(p[i]) - static_cast<double>(t[i])) * inv_n * g;
                if (!pg[0].empty())
                    pg[0][i] += static_cast<float>(d);
                if (!pg[1].empty())
                    pg[1][i] -= static_cast<float>(d);
            }
        });
}

Tensor loss_gen(const Tensor& g, const Tensor& x, const LossWeights& w) {
    w.validate();
    Tensor mse = mse_loss(g, x);
    if (w.alpha_g == 1.0)
        return mse;
    return scale(mse, static_cast<float>(w.alpha_g));
}

Tensor loss_ce(const Tensor& logits, const std::vector<LabelMap>& labels) {
    const BatchView v = check_logits_labels(logits, labels, "loss_ce");
    auto flat = flatten_labels(labels);
    const float* x = logits.data();

    double total = 0.0;
    auto probs = softmax_probs(logits, v);
    for (std::int64_t n = 0; n < v.n; ++n) {
        const float* xn = x + static_cast<std::size_t>(n) * v.c * v.plane;
        for (std::size_t i = 0; i < v.plane; ++i) {
            double mx = xn[i];
            for (std::int64_t c = 1; c < v.c; ++c)
                mx = std::max(mx, static_cast<double>(xn[static_cast<std::size_t>(c) * v.plane + i]));
            double sum = 0.0;
            for (std::int64_t c = 0; c < v.c; ++c)
                sum += std::exp(static_cast<double>(xn[static_cast<std::size_t>(c) * v.plane + i]) - mx);
            std::int32_t y = (*flat)[static_cast<std::size_t>(n) * v.plane + i];
            double xy = xn[static_cast<std::size_t>(y) * v.plane + i];
            total += mx + std::log(sum) - xy;
        }
    }
    const double inv_px = 1.0 / static_cast<double>(v.pixels);
    float loss = static_cast<float>(total * inv_px);

    return autograd::make_op(
        {1}, {loss}, {logits},
        [probs, flat, v, inv_px](std::span<const float> gout,
                                 std::span<const std::span<float>> pg) {
            if (pg[0].empty())
                return;
            const double g = static_cast<double>(gout[0]) * inv_px;
            for (std::int64_t n = 0; n < v.n; ++n) {
                const float* pn = probs->data() + static_cast<std::size_t>(n) * v.c * v.plane;
                float* out = pg[0].data() + static_cast<std::size_t>(n) * v.c * v.plane;
                const std::int32_t* yn = flat->data() + static_cast<std::size_t>(n) * v.plane;
                for (std::int64_t c = 0; c < v.c; ++c) {
                    for (std::size_t i = 0; i < v.plane; ++i) {
                        double p = pn[static_cast<std::size_t>(c) * v.plane + i];
                        double onehot = yn[i] == c ? 1.0 : 0.0;
                        out[static_cast<std::size_t>(c) * v.plane + i] +=
                            static_cast<float>((p - onehot) * g);
                    }
                }
            }
        });
}

Tensor loss_dice(const Tensor& logits, const std::vector<LabelMap>& labels, double smooth) {
    if (smooth < 0.0)
        throw ValidationError("loss_dice: smooth must be >= 0");
    const BatchView v = check_logits_labels(logits, labels, "loss_dice");
    auto flat = flatten_labels(labels);
    auto probs = softmax_probs(logits, v);

    // Per-class intersection and mass sums over the whole batch.
    auto inter = std::make_shared<std::vector<double>>(static_cast<std::size_t>(v.c), 0.0);
    auto union_sum = std::make_shared<std::vector<double>>(static_cast<std::size_t>(v.c), 0.0);
    for (std::int64_t n = 0; n < v.n; ++n) {
        const float* pn = probs->data() + static_cast<std::size_t>(n) * v.c * v.plane;
        const std::int32_t* yn = flat->data() + static_cast<std::size_t>(n) * v.plane;
        for (std::int64_t c = 0; c < v.c; ++c) {
            double isum = 0.0, psum = 0.0, ysum = 0.0;
            const float* pc = pn + static_cast<std::size_t>(c) * v.plane;
            for (std::size_t i = 0; i < v.plane; ++i) {
                double p = pc[i];
                psum += p;
                if (yn[i] == c) {
                    isum += p;
                    ysum += 1.0;
                }
            }
            (*inter)[static_cast<std::size_t>(c)] += isum;
            (*union_sum)[static_cast<std::size_t>(c)] += psum + ysum;
        }
    }
    double dice_sum = 0.0;
    for (std::int64_t c = 0; c < v.c; ++c)
        dice_sum += (2.0 * (*inter)[static_cast<std::size_t>(c)] + smooth) /
                    ((*union_sum)[static_cast<std::size_t>(c)] + smooth);
    float loss = static_cast<float>(1.0 - dice_sum / static_cast<double>(v.c));

    return autograd::make_op(
        {1}, {loss}, {logits},
        [probs, flat, inter, union_sum, v, smooth](std::span<const float> gout,
                                                   std::span<const std::span<float>> pg) {
            if (pg[0].empty())
                return;
            const double g = static_cast<double>(gout[0]);
            const double inv_c = 1.0 / static_cast<double>(v.c);
            // dL/dp_c(i) = -(1/C) * (2*y_c(i)*(U_c+s) - (2*I_c+s)) / (U_c+s)^2
            std::vector<double> denom(static_cast<std::size_t>(v.c));
            std::vector<double> num(static_cast<std::size_t>(v.c));
            for (std::int64_t c = 0; c < v.c; ++c) {
                double u = (*union_sum)[static_cast<std::size_t>(c)] + smooth;
                denom[static_cast<std::size_t>(c)] = u * u;
                num[static_cast<std::size_t>(c)] = 2.0 * (*inter)[static_cast<std::size_t>(c)] + smooth;
            }
            std::vector<double> dp(static_cast<std::size_t>(v.c));
            for (std::int64_t n = 0; n < v.n; ++n) {
                const float* pn = probs->data() + static_cast<std::size_t>(n) * v.c * v.plane;
                float* out = pg[0].data() + static_cast<std::size_t>(n) * v.c * v.plane;
                const std::int32_t* yn = flat->data() + static_cast<std::size_t>(n) * v.plane;
                for (std::size_t i = 0; i < v.plane; ++i) {
                    double dot = 0.0;
                    for (std::int64_t c = 0; c < v.c; ++c) {
                        std::size_t cc = static_cast<std::size_t>(c);
                        double u = (*union_sum)[cc] + smooth;
                        double y = yn[i] == c ? 1.0 : 0.0;
                        dp[cc] = -inv_c * (2.0 * y * u - num[cc]) / denom[cc];
                        dot += dp[cc] * pn[cc * v.plane + i];
                    }
                    for (std::int64_t c = 0; c < v.c; ++c) {
                        std::size_t cc = static_cast<std::size_t>(c);
                        double p = pn[cc * v.plane + i];
                        out[cc * v.plane + i] += static_cast<float>(g * p * (dp[cc] - dot));
                    }
                }
            }
        });
}

Tensor loss_seg(const Tensor& logits, const std::vector<LabelMap>& labels, const LossWeights& w) {
    w.validate();
    if (w.alpha_ce == 0.0 && w.alpha_dice == 0.0)
        throw ValidationError("loss_seg: alpha_ce and alpha_dice are both zero (degenerate objective)");
    Tensor total;
    if (w.alpha_ce != 0.0) {
        Tensor ce = loss_ce(logits, labels);
        total = w.alpha_ce == 1.0 ? ce : scale(ce, static_cast<float>(w.alpha_ce));
    }
    if (w.alpha_dice != 0.0) {
        Tensor dice = loss_dice(logits, labels);
        if (w.alpha_dice != 1.0)
            dice = scale(dice, static_cast<float>(w.alpha_dice));
        total = total.defined() ? add(total, dice) : dice;
    }
    return total;
}

void OptimizerConfig::validate() const {
    if (!(lr > 0.0))
        throw ValidationError("OptimizerConfig: lr must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ValidationError("OptimizerConfig: betas must be in [0,1)");
    if (!(eps > 0.0))
        throw ValidationError("OptimizerConfig: eps must be > 0");
    if (weight_decay < 0.0)
        throw ValidationError("OptimizerConfig: weight_decay must be >= 0");
}

OptimizerConfig::Kind optimizer_kind_from_string(const std::string& s) {
    if (s == "adam")
        return OptimizerConfig::Kind::adam;
    if (s == "adamw")
        return OptimizerConfig::Kind::adamw;
    throw ValidationError("unknown optimizer kind '" + s + "'");
}

std::string to_string(OptimizerConfig::Kind kind) {
    return kind == OptimizerConfig::Kind::adam ? "adam" : "adamw";
}

Optimizer::Optimizer(OptimizerConfig cfg) : cfg_(cfg) {
    cfg_.validate();
}

void Optimizer::step(ParameterSet& params) {
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, step_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, step_);
    const double decay_factor = 1.0 - cfg_.lr * cfg_.weight_decay;
    bool any = false;

    for (auto& [name, t] : params.tensors) {
        if (!t.requires_grad())
            continue;
        any = true;
        if (!t.has_grad())
            throw ValidationError("optimizer step: parameter '" + name + "' has no gradient");
        const std::size_t n = static_cast<std::size_t>(t.numel());
        Slot& slot = slots_[name];
        if (slot.m.empty()) {
            slot.m.assign(n, 0.0);
            slot.v.assign(n, 0.0);
        } else if (slot.m.size() != n) {
            throw ShapeError("optimizer step: parameter '" + name + "' changed size");
        }
        float* theta = t.data();
        const float* grad = t.grad_data();
        for (std::size_t i = 0; i < n; ++i) {
            double th = theta[i];
            double g = grad[i];
            if (cfg_.kind == OptimizerConfig::Kind::adamw)
                th *= decay_factor;
            double m = slot.m[i] = cfg_.beta1 * slot.m[i] + (1.0 - cfg_.beta1) * g;
            double v = slot.v[i] = cfg_.beta2 * slot.v[i] + (1.0 - cfg_.beta2) * g * g;
            double mhat = m / bc1;
            double vhat = v / bc2;
            th -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            theta[i] = static_cast<float>(th);
        }
    }
    if (!any)
        throw ValidationError("optimizer step: parameter set has no trainable tensors");
}

} // namespace lowbridge
