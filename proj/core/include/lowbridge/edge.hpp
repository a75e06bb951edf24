#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lowbridge/image.hpp"

namespace lowbridge {

// Canny settings. Thresholds are ratios of the maximum gradient magnitude of
// the image being processed, so the detector auto-scales across modalities
// with different absolute contrast.
struct CannyParams {
    double sigma = 1.4;
    double low_ratio = 0.10;
    double high_ratio = 0.20;
    int kernel_radius = 5; // default = ceil(3*sigma)

    static CannyParams with_sigma(double sigma, double low_ratio = 0.10,
                                  double high_ratio = 0.20);
    void validate() const;
};

// Binary edge image plus provenance of how it was produced.
struct EdgeMap {
    int h = 0;
    int w = 0;
    std::vector<float> v; // strictly {0.0f, 1.0f}
    std::string source_id;
    CannyParams params;

    float at(int r, int c) const { return v[static_cast<std::size_t>(r) * w + c]; }
    std::size_t size() const { return v.size(); }
    std::size_t count() const; // number of edge pixels
};

struct SobelResult {
    Image gx;        // horizontal derivative (along columns)
    Image gy;        // vertical derivative (along rows)
    Image magnitude; // sqrt(gx^2 + gy^2)
    // Gradient direction quantized to the nearest of 0/45/90/135 degrees.
    std::vector<std::uint8_t> direction_bin;
};

// Separable Gaussian blur with symmetric reflect padding; the 1-D kernel is
// normalized to sum 1.
Image gaussian_blur(const Image& image, double sigma, int radius);

// 3x3 Sobel stencils on the interior; border gradients are zero.
SobelResult sobel_gradients(const Image& image);

// Keeps a pixel iff its magnitude is >= both neighbors along its quantized
// gradient direction (ties kept). Border pixels are suppressed.
Image non_max_suppression(const Image& magnitude, const std::vector<std::uint8_t>& direction_bin);

// Absolute-threshold hysteresis: pixels >= high seed a flood fill that keeps
// 8-connected pixels >= low. Zero-magnitude pixels are never edges.
EdgeMap hysteresis(const Image& suppressed, double low, double high);

// Full pipeline blur -> sobel -> nms -> hysteresis with ratio thresholds.
EdgeMap extract_edges(const Image& image, const CannyParams& params = {},
                      const std::string& source_id = {});

} // namespace lowbridge
