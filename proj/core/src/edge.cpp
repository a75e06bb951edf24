#include "lowbridge/edge.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lowbridge/error.hpp"

namespace lowbridge {

CannyParams CannyParams::with_sigma(double sigma, double low_ratio, double high_ratio) {
    CannyParams p;
    p.sigma = sigma;
    p.low_ratio = low_ratio;
    p.high_ratio = high_ratio;
    p.kernel_radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    return p;
}

void CannyParams::validate() const {
    if (!(sigma > 0.0))
        throw ValidationError("CannyParams: sigma must be > 0");
    if (!(low_ratio > 0.0 && low_ratio < 1.0))
        throw ValidationError("CannyParams: low_ratio must be in (0,1)");
    if (!(high_ratio > 0.0 && high_ratio <= 1.0))
        throw ValidationError("CannyParams: high_ratio must be in (0,1]");
    if (!(low_ratio < high_ratio))
        throw ValidationError("CannyParams: low_ratio must be < high_ratio");
    if (kernel_radius < 1)
        throw ValidationError("CannyParams: kernel_radius must be >= 1");
}

std::size_t EdgeMap::count() const {
    std::size_t n = 0;
    for (float x : v)
        if (x != 0.0f)
            ++n;
    return n;
}

namespace {

inline int reflect_index(int i, int n) {
    // Symmetric reflection: -1 -> 0, -2 -> 1, n -> n-1, n+1 -> n-2.
    while (i < 0 || i >= n) {
        if (i < 0)
            i = -i - 1;
        else
            i = 2 * n - 1 - i;
    }
    return i;
}

std::vector<double> gaussian_kernel(double sigma, int radius) {
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double x = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = x;
        sum += x;
    }
    for (double& x : k)
        x /= sum;
    return k;
}

} // namespace

Image gaussian_blur(const Image& image, double sigma, int radius) {
    if (!(sigma > 0.0))
        throw ValidationError("gaussian_blur: sigma must be > 0");
    if (radius < 1)
        throw ValidationError("gaussian_blur: radius must be >= 1");
    if (image.h <= 0 || image.w <= 0)
        throw ValidationError("gaussian_blur: empty image");

    const std::vector<double> k = gaussian_kernel(sigma, radius);
    const int h = image.h, w = image.w;

    Image tmp(h, w);
    tmp.spacing_mm = image.spacing_mm;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[static_cast<std::size_t>(i + radius)] * image.at(r, reflect_index(c + i, w));
            tmp.at(r, c) = static_cast<float>(acc);
        }
    }
    Image out(h, w);
    out.spacing_mm = image.spacing_mm;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[static_cast<std::size_t>(i + radius)] * tmp.at(reflect_index(r + i, h), c);
            out.at(r, c) = static_cast<float>(acc);
        }
    }
    return out;
}

SobelResult sobel_gradients(const Image& image) {
    if (image.h < 3 || image.w < 3)
        throw ValidationError("sobel_gradients: image must be at least 3x3");
    const int h = image.h, w = image.w;
    SobelResult res;
    res.gx = Image(h, w);
    res.gy = Image(h, w);
    res.magnitude = Image(h, w);
    res.direction_bin.assign(static_cast<std::size_t>(h) * w, 0);
    res.gx.spacing_mm = res.gy.spacing_mm = res.magnitude.spacing_mm = image.spacing_mm;

    for (int r = 1; r < h - 1; ++r) {
        for (int c = 1; c < w - 1; ++c) {
            double p00 = image.at(r - 1, c - 1), p01 = image.at(r - 1, c), p02 = image.at(r - 1, c + 1);
            double p10 = image.at(r, c - 1), p12 = image.at(r, c + 1);
            double p20 = image.at(r + 1, c - 1), p21 = image.at(r + 1, c), p22 = image.at(r + 1, c + 1);
            double gx = (p02 + 2.0 * p12 + p22) - (p00 + 2.0 * p10 + p20);
            double gy = (p20 + 2.0 * p21 + p22) - (p00 + 2.0 * p01 + p02);
            double mag = std::sqrt(gx * gx + gy * gy);
            res.gx.at(r, c) = static_cast<float>(gx);
            res.gy.at(r, c) = static_cast<float>(gy);
            res.magnitude.at(r, c) = static_cast<float>(mag);

            double deg = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
            if (deg < 0.0)
                deg += 180.0;
            int bin = static_cast<int>(std::lround(deg / 45.0)) & 3;
            res.direction_bin[static_cast<std::size_t>(r) * w + c] = static_cast<std::uint8_t>(bin);
        }
    }
    return res;
}

Image non_max_suppression(const Image& magnitude, const std::vector<std::uint8_t>& direction_bin) {
    const int h = magnitude.h, w = magnitude.w;
    if (direction_bin.size() != magnitude.size())
        throw ShapeError("non_max_suppression: direction grid size mismatch");
    if (h < 3 || w < 3)
        throw ValidationError("non_max_suppression: image must be at least 3x3");

    static constexpr int offs[4][2][2] = {
        {{0, -1}, {0, 1}},   // 0 deg: gradient along columns
        {{-1, -1}, {1, 1}},  // 45 deg
        {{-1, 0}, {1, 0}},   // 90 deg: gradient along rows
        {{-1, 1}, {1, -1}},  // 135 deg
    };

    Image out(h, w);
    out.spacing_mm = magnitude.spacing_mm;
    for (int r = 1; r < h - 1; ++r) {
        for (int c = 1; c < w - 1; ++c) {
            float m = magnitude.at(r, c);
            int bin = direction_bin[static_cast<std::size_t>(r) * w + c];
            const auto& o = offs[bin];
            float a = magnitude.at(r + o[0][0], c + o[0][1]);
            float b = magnitude.at(r + o[1][0], c + o[1][1]);
            out.at(r, c) = (m >= a && m >= b) ? m : 0.0f;
        }
    }
    return out;
}

EdgeMap hysteresis(const Image& suppressed, double low, double high) {
    if (!(low < high))
        throw ValidationError("hysteresis: low threshold must be < high");
    const int h = suppressed.h, w = suppressed.w;
    EdgeMap out;
    out.h = h;
    out.w = w;
    out.v.assign(static_cast<std::size_t>(h) * w, 0.0f);

    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < suppressed.size(); ++i) {
        float m = suppressed.v[i];
        if (m > 0.0f && m >= high) {
            out.v[i] = 1.0f;
            stack.push_back(i);
        }
    }
    while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        int r = static_cast<int>(i) / w;
        int c = static_cast<int>(i) % w;
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc == 0)
                    continue;
                int nr = r + dr, nc = c + dc;
                if (nr < 0 || nr >= h || nc < 0 || nc >= w)
                    continue;
                std::size_t j = static_cast<std::size_t>(nr) * w + nc;
                if (out.v[j] != 0.0f)
                    continue;
                float m = suppressed.v[j];
                if (m > 0.0f && m >= low) {
                    out.v[j] = 1.0f;
                    stack.push_back(j);
                }
            }
        }
    }
    return out;
}

EdgeMap extract_edges(const Image& image, const CannyParams& params, const std::string& source_id) {
    params.validate();
    if (image.h < 3 || image.w < 3)
        throw ValidationError("extract_edges: image must be at least 3x3");

    Image blurred = gaussian_blur(image, params.sigma, params.kernel_radius);
    SobelResult sob = sobel_gradients(blurred);
    Image nms = non_max_suppression(sob.magnitude, sob.direction_bin);

    float max_mag = 0.0f;
    for (float m : sob.magnitude.v)
        max_mag = std::max(max_mag, m);

    EdgeMap out;
    if (max_mag <= 0.0f) {
        out.h = image.h;
        out.w = image.w;
        out.v.assign(image.size(), 0.0f);
    } else {
        out = hysteresis(nms, params.low_ratio * max_mag, params.high_ratio * max_mag);
    }
    out.source_id = source_id;
    out.params = params;
    return out;
}

} // namespace lowbridge
