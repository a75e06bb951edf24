#include "lowbridge/ops.hpp"

#include "lowbridge/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

namespace lowbridge {

namespace {

void require_rank4(const Tensor& t, const char* op, const char* role) {
    if (t.dims().size() != 4)
        throw ShapeError(std::string(op) + ": " + role + " must have rank 4, got " +
                         shape_to_string(t.dims()));
}

// out[row, :] over a double accumulator: out_rows x N = sum_k A[row,k]*B[k,:].
// A is row-major [M,K], B row-major [K,N]. Accumulation order over k is fixed.
void gemm_rowmajor(const float* a, const float* b, float* out,
                   std::int64_t m, std::int64_t k, std::int64_t n,
                   std::vector<double>& acc) {
    acc.assign(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t i = 0; i < m; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const float* arow = a + i * k;
        for (std::int64_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) continue;
            const float* brow = b + kk * n;
            for (std::int64_t j = 0; j < n; ++j) acc[static_cast<std::size_t>(j)] += av * brow[j];
        }
        float* orow = out + i * n;
        for (std::int64_t j = 0; j < n; ++j) orow[j] = static_cast<float>(acc[static_cast<std::size_t>(j)]);
    }
}

// Same contraction but adds float results into out instead of overwriting.
void gemm_rowmajor_add(const float* a, const float* b, float* out,
                       std::int64_t m, std::int64_t k, std::int64_t n,
                       std::vector<double>& acc) {
    acc.assign(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t i = 0; i < m; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const float* arow = a + i * k;
        for (std::int64_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) continue;
            const float* brow = b + kk * n;
            for (std::int64_t j = 0; j < n; ++j) acc[static_cast<std::size_t>(j)] += av * brow[j];
        }
        float* orow = out + i * n;
        for (std::int64_t j = 0; j < n; ++j)
            orow[j] += static_cast<float>(acc[static_cast<std::size_t>(j)]);
    }
}

struct ConvDims {
    std::int64_t n, c, h, w;
    std::int64_t f, kh, kw;
    std::int64_t oh, ow;
    int stride, padding;
    std::int64_t patch() const { return c * kh * kw; }
    std::int64_t opix() const { return oh * ow; }
};

ConvDims conv_dims(const Shape& in, const Shape& wt, const Shape& bias,
                   int stride, int padding) {
    ConvDims d{};
    d.n = in[0]; d.c = in[1]; d.h = in[2]; d.w = in[3];
    d.f = wt[0]; d.kh = wt[2]; d.kw = wt[3];
    d.stride = stride; d.padding = padding;
    if (wt[1] != d.c)
        throw ShapeError("conv2d: input channels (" + std::to_string(d.c) +
                         ") != weight in-channels (" + std::to_string(wt[1]) + ")");
    if (d.kh % 2 == 0 || d.kw % 2 == 0)
        throw ShapeError("conv2d: kernel extents must be odd, got kh=" + std::to_string(d.kh) +
                         " kw=" + std::to_string(d.kw));
    if (bias.size() != 1 || bias[0] != d.f)
        throw ShapeError("conv2d: bias extent (" + shape_to_string(bias) +
                         ") != filter count (" + std::to_string(d.f) + ")");
    if (stride < 1) throw ShapeError("conv2d: stride must be >= 1");
    if (padding < 0) throw ShapeError("conv2d: padding must be >= 0");
    std::int64_t ph = d.h + 2 * padding - d.kh;
    std::int64_t pw = d.w + 2 * padding - d.kw;
    if (ph < 0 || pw < 0 || ph % stride != 0 || pw % stride != 0)
        throw ShapeError("conv2d: output height/width not integral for input " +
                         shape_to_string({d.h, d.w}) + ", kernel " +
                         shape_to_string({d.kh, d.kw}) + ", stride " + std::to_string(stride) +
                         ", padding " + std::to_string(padding));
    d.oh = ph / stride + 1;
    d.ow = pw / stride + 1;
    return d;
}

// col is [patch x opix], row-major. Zero padding.
void im2col(const float* x, const ConvDims& d, float* col) {
    for (std::int64_t c = 0; c < d.c; ++c) {
        const float* plane = x + c * d.h * d.w;
        for (std::int64_t ky = 0; ky < d.kh; ++ky) {
            for (std::int64_t kx = 0; kx < d.kw; ++kx) {
                float* crow = col + ((c * d.kh + ky) * d.kw + kx) * d.opix();
                for (std::int64_t oy = 0; oy < d.oh; ++oy) {
                    const std::int64_t iy = oy * d.stride + ky - d.padding;
                    float* dst = crow + oy * d.ow;
                    if (iy < 0 || iy >= d.h) {
                        std::fill(dst, dst + d.ow, 0.0f);
                        continue;
                    }
                    const float* srow = plane + iy * d.w;
                    for (std::int64_t ox = 0; ox < d.ow; ++ox) {
                        const std::int64_t ix = ox * d.stride + kx - d.padding;
                        dst[ox] = (ix < 0 || ix >= d.w) ? 0.0f : srow[ix];
                    }
                }
            }
        }
    }
}

// Adds col [patch x opix] back into the input plane (adjoint of im2col).
void col2im_add(const float* col, const ConvDims& d, float* x) {
    for (std::int64_t c = 0; c < d.c; ++c) {
        float* plane = x + c * d.h * d.w;
        for (std::int64_t ky = 0; ky < d.kh; ++ky) {
            for (std::int64_t kx = 0; kx < d.kw; ++kx) {
                const float* crow = col + ((c * d.kh + ky) * d.kw + kx) * d.opix();
                for (std::int64_t oy = 0; oy < d.oh; ++oy) {
                    const std::int64_t iy = oy * d.stride + ky - d.padding;
                    if (iy < 0 || iy >= d.h) continue;
                    float* srow = plane + iy * d.w;
                    const float* src = crow + oy * d.ow;
                    for (std::int64_t ox = 0; ox < d.ow; ++ox) {
                        const std::int64_t ix = ox * d.stride + kx - d.padding;
                        if (ix >= 0 && ix < d.w) srow[ix] += src[ox];
                    }
                }
            }
        }
    }
}

} // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int padding) {
    require_rank4(input, "conv2d", "input");
    require_rank4(weight, "conv2d", "weight");
    const ConvDims d = conv_dims(input.dims(), weight.dims(), bias.dims(), stride, padding);

    const std::int64_t patch = d.patch(), opix = d.opix();
    std::vector<float> out(static_cast<std::size_t>(d.n * d.f * opix));
    std::vector<float> col(static_cast<std::size_t>(patch * opix));
    std::vector<double> acc;

    const float* x = input.data();
    const float* w = weight.data();
    const float* b = bias.data();
    for (std::int64_t n = 0; n < d.n; ++n) {
        im2col(x + n * d.c * d.h * d.w, d, col.data());
        float* onf = out.data() + n * d.f * opix;
        gemm_rowmajor(w, col.data(), onf, d.f, patch, opix, acc);
        for (std::int64_t f = 0; f < d.f; ++f) {
            float* orow = onf + f * opix;
            const float bf = b[f];
            for (std::int64_t j = 0; j < opix; ++j) orow[j] += bf;
        }
    }

    return autograd::make_op(
        {d.n, d.f, d.oh, d.ow}, std::move(out), {input, weight, bias},
        [input, weight, d](std::span<const float> gout,
                           std::span<const std::span<float>> pg) {
            const std::int64_t patch = d.patch(), opix = d.opix();
            const float* x = input.data();
            const float* w = weight.data();
            std::vector<double> acc;
            std::vector<float> col, colT, dcol;

            if (!pg[2].empty()) { // bias
                for (std::int64_t f = 0; f < d.f; ++f) {
                    double s = 0.0;
                    for (std::int64_t n = 0; n < d.n; ++n) {
                        const float* g = gout.data() + (n * d.f + f) * opix;
                        for (std::int64_t j = 0; j < opix; ++j) s += g[j];
                    }
                    pg[2][static_cast<std::size_t>(f)] += static_cast<float>(s);
                }
            }
            const bool need_w = !pg[1].empty();
            const bool need_x = !pg[0].empty();
            if (!need_w && !need_x) return;

            if (need_w) colT.resize(static_cast<std::size_t>(opix * patch));
            col.resize(static_cast<std::size_t>(patch * opix));
            if (need_x) dcol.resize(static_cast<std::size_t>(patch * opix));

            for (std::int64_t n = 0; n < d.n; ++n) {
                const float* g = gout.data() + n * d.f * opix;
                im2col(x + n * d.c * d.h * d.w, d, col.data());
                if (need_w) {
                    // dW += gout_n [F x opix] * col_n^T [opix x patch]
                    for (std::int64_t j = 0; j < opix; ++j)
                        for (std::int64_t k = 0; k < patch; ++k)
                            colT[static_cast<std::size_t>(j * patch + k)] =
                                col[static_cast<std::size_t>(k * opix + j)];
                    gemm_rowmajor_add(g, colT.data(), pg[1].data(), d.f, opix, patch, acc);
                }
                if (need_x) {
                    // dcol = W^T [patch x F] * gout_n [F x opix]
                    acc.assign(static_cast<std::size_t>(opix), 0.0);
                    for (std::int64_t k = 0; k < patch; ++k) {
                        std::fill(acc.begin(), acc.end(), 0.0);
                        for (std::int64_t f = 0; f < d.f; ++f) {
                            const double wv = w[f * patch + k];
                            if (wv == 0.0) continue;
                            const float* grow = g + f * opix;
                            for (std::int64_t j = 0; j < opix; ++j)
                                acc[static_cast<std::size_t>(j)] += wv * grow[j];
                        }
                        float* drow = dcol.data() + k * opix;
                        for (std::int64_t j = 0; j < opix; ++j)
                            drow[j] = static_cast<float>(acc[static_cast<std::size_t>(j)]);
                    }
                    col2im_add(dcol.data(), d, pg[0].data() + n * d.c * d.h * d.w);
                }
            }
        });
}

Tensor pool_max2x2(const Tensor& input) {
    require_rank4(input, "pool_max2x2", "input");
    const std::int64_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    if (h % 2 != 0 || w % 2 != 0)
        throw ShapeError("pool_max2x2: H and W must be even, got H=" + std::to_string(h) +
                         " W=" + std::to_string(w));
    const std::int64_t oh = h / 2, ow = w / 2;
    std::vector<float> out(static_cast<std::size_t>(n * c * oh * ow));
    auto argmax = std::make_shared<std::vector<std::int64_t>>(out.size());

    const float* x = input.data();
    for (std::int64_t nc = 0; nc < n * c; ++nc) {
        const float* plane = x + nc * h * w;
        float* oplane = out.data() + nc * oh * ow;
        std::int64_t* aplane = argmax->data() + nc * oh * ow;
        for (std::int64_t oy = 0; oy < oh; ++oy) {
            for (std::int64_t ox = 0; ox < ow; ++ox) {
                const std::int64_t base = (2 * oy) * w + 2 * ox;
                // row-major window order; ties keep the first
                std::int64_t best = base;
                float bv = plane[base];
                const std::int64_t cand[3] = {base + 1, base + w, base + w + 1};
                for (std::int64_t idx : cand) {
                    if (plane[idx] > bv) {
                        bv = plane[idx];
                        best = idx;
                    }
                }
                oplane[oy * ow + ox] = bv;
                aplane[oy * ow + ox] = nc * h * w + best;
            }
        }
    }

    return autograd::make_op(
        {n, c, oh, ow}, std::move(out), {input},
        [argmax](std::span<const float> gout, std::span<const std::span<float>> pg) {
            if (pg[0].empty()) return;
            for (std::size_t i = 0; i < argmax->size(); ++i)
                pg[0][static_cast<std::size_t>((*argmax)[i])] += gout[i];
        });
}

Tensor upsample_nearest2x(const Tensor& input) {
    require_rank4(input, "upsample_nearest2x", "input");
    const std::int64_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    const std::int64_t oh = 2 * h, ow = 2 * w;
    std::vector<float> out(static_cast<std::size_t>(n * c * oh * ow));
    const float* x = input.data();
    for (std::int64_t nc = 0; nc < n * c; ++nc) {
        const float* plane = x + nc * h * w;
        float* oplane = out.data() + nc * oh * ow;
        for (std::int64_t y = 0; y < h; ++y) {
            for (std::int64_t xx = 0; xx < w; ++xx) {
                const float v = plane[y * w + xx];
                float* o = oplane + (2 * y) * ow + 2 * xx;
                o[0] = v;
                o[1] = v;
                o[ow] = v;
                o[ow + 1] = v;
            }
        }
    }
    return autograd::make_op(
        {n, c, oh, ow}, std::move(out), {input},
        [n, c, h, w, oh, ow](std::span<const float> gout, std::span<const std::span<float>> pg) {
            if (pg[0].empty()) return;
            for (std::int64_t nc = 0; nc < n * c; ++nc) {
                const float* gplane = gout.data() + nc * oh * ow;
                float* dplane = pg[0].data() + nc * h * w;
                for (std::int64_t y = 0; y < h; ++y) {
                    for (std::int64_t xx = 0; xx < w; ++xx) {
                        const float* g = gplane + (2 * y) * ow + 2 * xx;
                        dplane[y * w + xx] += g[0] + g[1] + g[ow] + g[ow + 1];
                    }
                }
            }
        });
}

Tensor instance_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta, float eps) {
    require_rank4(input, "instance_norm", "input");
    const std::int64_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    const std::int64_t m = h * w;
    if (m < 2) throw ShapeError("instance_norm: H*W must be >= 2");
    if (gamma.dims() != Shape{c} || beta.dims() != Shape{c})
        throw ShapeError("instance_norm: gamma/beta must have extent [" + std::to_string(c) + "]");

    std::vector<float> out(static_cast<std::size_t>(n * c * m));
    auto xhat = std::make_shared<std::vector<float>>(out.size());
    auto inv_std = std::make_shared<std::vector<float>>(static_cast<std::size_t>(n * c));

    const float* x = input.data();
    const float* gm = gamma.data();
    const float* bt = beta.data();
    for (std::int64_t nc = 0; nc < n * c; ++nc) {
        const float* plane = x + nc * m;
        double mean = 0.0;
        for (std::int64_t i = 0; i < m; ++i) mean += plane[i];
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (std::int64_t i = 0; i < m; ++i) {
            const double dv = plane[i] - mean;
            var += dv * dv;
        }
        var /= static_cast<double>(m);
        const double istd = 1.0 / std::sqrt(var + static_cast<double>(eps));
        (*inv_std)[static_cast<std::size_t>(nc)] = static_cast<float>(istd);
        const float g = gm[nc % c], b = bt[nc % c];
        float* xh = xhat->data() + nc * m;
        float* o = out.data() + nc * m;
        for (std::int64_t i = 0; i < m; ++i) {
            const float xv = static_cast<float>((plane[i] - mean) * istd);
            xh[i] = xv;
            o[i] = g * xv + b;
        }
    }

    return autograd::make_op(
        {n, c, h, w}, std::move(out), {input, gamma, beta},
        [xhat, inv_std, gamma, n, c, m](std::span<const float> gout,
                                        std::span<const std::span<float>> pg) {
            const float* gm = gamma.data();
            for (std::int64_t nc = 0; nc < n * c; ++nc) {
                const float* g = gout.data() + nc * m;
                const float* xh = xhat->data() + nc * m;
                double sum_g = 0.0, sum_gx = 0.0;
                for (std::int64_t i = 0; i < m; ++i) {
                    sum_g += g[i];
                    sum_gx += static_cast<double>(g[i]) * xh[i];
                }
                const std::int64_t ch = nc % c;
                if (!pg[1].empty()) pg[1][static_cast<std::size_t>(ch)] += static_cast<float>(sum_gx);
                if (!pg[2].empty()) pg[2][static_cast<std::size_t>(ch)] += static_cast<float>(sum_g);
                if (!pg[0].empty()) {
                    const double istd = (*inv_std)[static_cast<std::size_t>(nc)];
                    const double gsc = gm[ch] * istd;
                    const double mg = sum_g / static_cast<double>(m);
                    const double mgx = sum_gx / static_cast<double>(m);
                    float* dx = pg[0].data() + nc * m;
                    for (std::int64_t i = 0; i < m; ++i)
                        dx[i] += static_cast<float>(gsc * (g[i] - mg - xh[i] * mgx));
                }
            }
        });
}

namespace {

Tensor pointwise_unary(const Tensor& x, float (*fwd)(float),
                       std::function<float(float xv, float yv, float g)> bwd_term) {
    const float* in = x.data();
    std::vector<float> out(static_cast<std::size_t>(x.numel()));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(in[i]);
    auto saved = std::make_shared<std::pair<Tensor, std::vector<float>>>(x, out);
    return autograd::make_op(
        x.dims(), std::move(out), {x},
        [saved, bwd_term](std::span<const float> gout, std::span<const std::span<float>> pg) {
            if (pg[0].empty()) return;
            const float* xv = saved->first.data();
            const float* yv = saved->second.data();
            for (std::size_t i = 0; i < gout.size(); ++i)
                pg[0][i] += bwd_term(xv[i], yv[i], gout[i]);
        });
}

} // namespace

Tensor relu(const Tensor& x) {
    // subgradient 0 at exactly 0
    return pointwise_unary(
        x, [](float v) { return v > 0.0f ? v : 0.0f; },
        [](float xv, float, float g) { return xv > 0.0f ? g : 0.0f; });
}

Tensor leaky_relu(const Tensor& x, float slope) {
    const float* in = x.data();
    std::vector<float> out(static_cast<std::size_t>(x.numel()));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = in[i] > 0.0f ? in[i] : slope * in[i];
    return autograd::make_op(
        x.dims(), std::move(out), {x},
        [x, slope](std::span<const float> gout, std::span<const std::span<float>> pg) {
            if (pg[0].empty()) return;
            const float* xv = x.data();
            for (std::size_t i = 0; i < gout.size(); ++i)
                pg[0][i] += xv[i] > 0.0f ? gout[i] : slope * gout[i];
        });
}

Tensor sigmoid(const Tensor& x) {
    return pointwise_unary(
        x,
        [](float v) { return static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(v)))); },
        [](float, float yv, float g) { return g * yv * (1.0f - yv); });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    require_rank4(a, "concat_channels", "first input");
    require_rank4(b, "concat_channels", "second input");
    if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
        throw ShapeError("concat_channels: N/H/W mismatch between " + shape_to_string(a.dims()) +
                         " and " + shape_to_string(b.dims()));
    const std::int64_t n = a.dim(0), ca = a.dim(1), cb = b.dim(1);
    const std::int64_t hw = a.dim(2) * a.dim(3);
    std::vector<float> out(static_cast<std::size_t>(n * (ca + cb) * hw));
    for (std::int64_t i = 0; i < n; ++i) {
        std::memcpy(out.data() + i * (ca + cb) * hw, a.data() + i * ca * hw,
                    static_cast<std::size_t>(ca * hw) * sizeof(float));
        std::memcpy(out.data() + (i * (ca + cb) + ca) * hw, b.data() + i * cb * hw,
                    static_cast<std::size_t>(cb * hw) * sizeof(float));
    }
    return autograd::make_op(
        {n, ca + cb, a.dim(2), a.dim(3)}, std::move(out), {a, b},
        [n, ca, cb, hw](std::span<const float> gout, std::span<const std::span<float>> pg) {
            for (std::int64_t i = 0; i < n; ++i) {
                if (!pg[0].empty()) {
                    const float* g = gout.data() + i * (ca + cb) * hw;
                    float* d = pg[0].data() + i * ca * hw;
                    for (std::int64_t j = 0; j < ca * hw; ++j) d[j] += g[j];
                }
                if (!pg[1].empty()) {
                    const float* g = gout.data() + (i * (ca + cb) + ca) * hw;
                    float* d = pg[1].data() + i * cb * hw;
                    for (std::int64_t j = 0; j < cb * hw; ++j) d[j] += g[j];
                }
            }
        });
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.dims() != b.dims())
        throw ShapeError("add: dims mismatch between " + shape_to_string(a.dims()) + " and " +
                         shape_to_string(b.dims()));
    const float* av = a.data();
    const float* bv = b.data();
    std::vector<float> out(static_cast<std::size_t>(a.numel()));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
    return autograd::make_op(
        a.dims(), std::move(out), {a, b},
        [](std::span<const float> gout, std::span<const std::span<float>> pg) {
            for (int p = 0; p < 2; ++p) {
                if (pg[static_cast<std::size_t>(p)].empty()) continue;
                float* d = pg[static_cast<std::size_t>(p)].data();
                for (std::size_t i = 0; i < gout.size(); ++i) d[i] += gout[i];
            }
        });
}

Tensor scale(const Tensor& x, float factor) {
    const float* xv = x.data();
    std::vector<float> out(static_cast<std::size_t>(x.numel()));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * xv[i];
    return autograd::make_op(
        x.dims(), std::move(out), {x},
        [factor](std::span<const float> gout, std::span<const std::span<float>> pg) {
            if (pg[0].empty()) return;
            for (std::size_t i = 0; i < gout.size(); ++i) pg[0][i] += factor * gout[i];
        });
}

Tensor softmax_channels(const Tensor& input) {
    require_rank4(input, "softmax_channels", "input");
    const std::int64_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    const std::int64_t hw = h * w;
    std::vector<float> out(static_cast<std::size_t>(input.numel()));
    const float* x = input.data();
    std::vector<double> ex(static_cast<std::size_t>(c));
    for (std::int64_t i = 0; i < n; ++i) {
        const float* xb = x + i * c * hw;
        float* ob = out.data() + i * c * hw;
        for (std::int64_t p = 0; p < hw; ++p) {
            double mx = xb[p];
            for (std::int64_t ch = 1; ch < c; ++ch) mx = std::max(mx, static_cast<double>(xb[ch * hw + p]));
            double sum = 0.0;
            for (std::int64_t ch = 0; ch < c; ++ch) {
                ex[static_cast<std::size_t>(ch)] = std::exp(static_cast<double>(xb[ch * hw + p]) - mx);
                sum += ex[static_cast<std::size_t>(ch)];
            }
            for (std::int64_t ch = 0; ch < c; ++ch)
                ob[ch * hw + p] = static_cast<float>(ex[static_cast<std::size_t>(ch)] / sum);
        }
    }
    auto probs = std::make_shared<std::vector<float>>(out);
    return autograd::make_op(
        {n, c, h, w}, std::move(out), {input},
        [probs, n, c, hw](std::span<const float> gout, std::span<const std::span<float>> pg) {
            if (pg[0].empty()) return;
            for (std::int64_t i = 0; i < n; ++i) {
                const float* pb = probs->data() + i * c * hw;
                const float* gb = gout.data() + i * c * hw;
                float* db = pg[0].data() + i * c * hw;
                for (std::int64_t p = 0; p < hw; ++p) {
                    double dot = 0.0;
                    for (std::int64_t ch = 0; ch < c; ++ch)
                        dot += static_cast<double>(pb[ch * hw + p]) * gb[ch * hw + p];
                    for (std::int64_t ch = 0; ch < c; ++ch)
                        db[ch * hw + p] += static_cast<float>(
                            pb[ch * hw + p] * (gb[ch * hw + p] - dot));
                }
            }
        });
}

} // namespace lowbridge
