#include "lowbridge/image.hpp"

#include <algorithm>
#include <cmath>

#include "lowbridge/error.hpp"

namespace lowbridge {

std::vector<std::uint8_t> class_mask(const LabelMap& labels, std::int32_t class_id) {
    std::vector<std::uint8_t> mask(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        mask[i] = labels.v[i] == class_id ? 1 : 0;
    return mask;
}

Image resize_bilinear(const Image& src, int oh, int ow) {
    if (src.h <= 0 || src.w <= 0)
        throw ValidationError("resize_bilinear: empty source image");
    if (oh <= 0 || ow <= 0)
        throw ValidationError("resize_bilinear: output size must be positive");
    Image out(oh, ow);
    out.spacing_mm = {src.spacing_mm[0] * static_cast<float>(src.h) / static_cast<float>(oh),
                      src.spacing_mm[1] * static_cast<float>(src.w) / static_cast<float>(ow)};
    if (oh == src.h && ow == src.w) {
        out.v = src.v;
        return out;
    }
    const double sr = static_cast<double>(src.h) / oh;
    const double sc = static_cast<double>(src.w) / ow;
    for (int r = 0; r < oh; ++r) {
        double fy = (r + 0.5) * sr - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(src.h - 1));
        int y0 = static_cast<int>(std::floor(fy));
        int y1 = std::min(y0 + 1, src.h - 1);
        double wy = fy - y0;
        for (int c = 0; c < ow; ++c) {
            double fx = (c + 0.5) * sc - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(src.w - 1));
            int x0 = static_cast<int>(std::floor(fx));
            int x1 = std::min(x0 + 1, src.w - 1);
            double wx = fx - x0;
            double top = src.at(y0, x0) * (1.0 - wx) + src.at(y0, x1) * wx;
            double bot = src.at(y1, x0) * (1.0 - wx) + src.at(y1, x1) * wx;
            out.at(r, c) = static_cast<float>(top * (1.0 - wy) + bot * wy);
        }
    }
    return out;
}

LabelMap resize_nearest(const LabelMap& src, int oh, int ow) {
    if (src.h <= 0 || src.w <= 0)
        throw ValidationError("resize_nearest: empty source label map");
    if (oh <= 0 || ow <= 0)
        throw ValidationError("resize_nearest: output size must be positive");
    LabelMap out(oh, ow);
    if (oh == src.h && ow == src.w) {
        out.v = src.v;
        return out;
    }
    const double sr = static_cast<double>(src.h) / oh;
    const double sc = static_cast<double>(src.w) / ow;
    for (int r = 0; r < oh; ++r) {
        double fy = (r + 0.5) * sr - 0.5;
        int y = std::clamp(static_cast<int>(std::lround(fy)), 0, src.h - 1);
        for (int c = 0; c < ow; ++c) {
            double fx = (c + 0.5) * sc - 0.5;
            int x = std::clamp(static_cast<int>(std::lround(fx)), 0, src.w - 1);
            out.at(r, c) = src.at(y, x);
        }
    }
    return out;
}

} // namespace lowbridge
