#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace lowbridge {

// Single-channel intensity grid, values in [0,1], row-major, with physical
// pixel spacing in millimetres (row spacing, column spacing).
struct Image {
    int h = 0;
    int w = 0;
    std::vector<float> v;
    std::array<float, 2> spacing_mm{1.0f, 1.0f};

    Image() = default;
    Image(int height, int width, float fill = 0.0f)
        : h(height), w(width), v(static_cast<std::size_t>(height) * width, fill) {}

    float& at(int r, int c) { return v[static_cast<std::size_t>(r) * w + c]; }
    float at(int r, int c) const { return v[static_cast<std::size_t>(r) * w + c]; }
    std::size_t size() const { return v.size(); }
};

// Grid of class indices in [0, n).
struct LabelMap {
    int h = 0;
    int w = 0;
    std::vector<std::int32_t> v;

    LabelMap() = default;
    LabelMap(int height, int width, std::int32_t fill = 0)
        : h(height), w(width), v(static_cast<std::size_t>(height) * width, fill) {}

    std::int32_t& at(int r, int c) { return v[static_cast<std::size_t>(r) * w + c]; }
    std::int32_t at(int r, int c) const { return v[static_cast<std::size_t>(r) * w + c]; }
    std::size_t size() const { return v.size(); }

    bool operator==(const LabelMap& other) const = default;
};

// One-hot style binary mask of a single class.
std::vector<std::uint8_t> class_mask(const LabelMap& labels, std::int32_t class_id);

// Bilinear resize for images, nearest-neighbor for labels. Output coordinate
// (r,c) samples source ((r+0.5)*h/oh-0.5, (c+0.5)*w/ow-0.5), clamped; equal
// sizes reproduce the input exactly.
Image resize_bilinear(const Image& src, int oh, int ow);
LabelMap resize_nearest(const LabelMap& src, int oh, int ow);

} // namespace lowbridge
