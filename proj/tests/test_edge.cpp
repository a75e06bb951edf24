#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lowbridge/edge.hpp"
#include "lowbridge/error.hpp"
#include "lowbridge/rng.hpp"

using namespace lowbridge;

namespace {

Image disk_image(int size, double cy, double cx, double radius, float inside = 1.0f,
                 float outside = 0.0f) {
    Image img(size, size, outside);
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c)
            if (std::hypot(r - cy, c - cx) <= radius)
                img.at(r, c) = inside;
    return img;
}

Image vstep_image(int h, int w, int col, float lo = 0.0f, float hi = 1.0f) {
    Image img(h, w, lo);
    for (int r = 0; r < h; ++r)
        for (int c = col; c < w; ++c)
            img.at(r, c) = hi;
    return img;
}

double total_variation(const Image& img) {
    double tv = 0.0;
    for (int r = 0; r < img.h; ++r)
        for (int c = 0; c < img.w; ++c) {
            if (c + 1 < img.w)
                tv += std::fabs(static_cast<double>(img.at(r, c + 1)) - img.at(r, c));
            if (r + 1 < img.h)
                tv += std::fabs(static_cast<double>(img.at(r + 1, c)) - img.at(r, c));
        }
    return tv;
}

Image random_image(int h, int w, Pcg32& rng) {
    Image img(h, w);
    for (auto& v : img.v)
        v = rng.next_float();
    return img;
}

} // namespace

TEST_CASE("CannyParams validation and defaults") {
    CannyParams p;
    CHECK(p.sigma == doctest::Approx(1.4));
    CHECK(p.low_ratio == doctest::Approx(0.10));
    CHECK(p.high_ratio == doctest::Approx(0.20));
    CHECK(p.kernel_radius == 5); // ceil(3 * 1.4)
    p.validate();

    CannyParams q = CannyParams::with_sigma(2.0);
    CHECK(q.kernel_radius == 6); // ceil(3 * 2)

    CannyParams bad;
    bad.low_ratio = 0.5;
    bad.high_ratio = 0.2;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CannyParams bad2;
    bad2.sigma = 0.0;
    CHECK_THROWS_AS(bad2.validate(), ValidationError);
}

TEST_CASE("gaussian_blur keeps constants exactly up to normalization") {
    Image c(9, 9, 0.42f);
    Image out = gaussian_blur(c, 1.0, 3);
    REQUIRE(out.h == 9);
    REQUIRE(out.w == 9);
    for (float v : out.v)
        CHECK(v == doctest::Approx(0.42).epsilon(1e-6));
}

TEST_CASE("gaussian_blur impulse response equals squared kernel peak") {
    const double sigma = 1.0;
    const int radius = 3;
    Image img(15, 15, 0.0f);
    img.at(7, 7) = 1.0f;
    Image out = gaussian_blur(img, sigma, radius);

    // independent kernel evaluation
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[static_cast<std::size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[static_cast<std::size_t>(i + radius)];
    }
    for (auto& v : k)
        v /= sum;

    CHECK(out.at(7, 7) == doctest::Approx(k[radius] * k[radius]).epsilon(1e-5));
    // separable response: out(7+dy, 7+dx) = k[dy]*k[dx]
    CHECK(out.at(7, 8) == doctest::Approx(k[radius] * k[radius + 1]).epsilon(1e-5));
    CHECK(out.at(8, 8) == doctest::Approx(k[radius + 1] * k[radius + 1]).epsilon(1e-5));
    // symmetry; the transposed pair only to float tolerance because the
    // separable passes run rows first, columns second
    for (int d = 1; d <= 3; ++d) {
        CHECK(out.at(7, 7 + d) == out.at(7, 7 - d));
        CHECK(out.at(7 + d, 7) == out.at(7 - d, 7));
        CHECK(out.at(7, 7 + d) == doctest::Approx(out.at(7 + d, 7)).epsilon(1e-6));
    }
}

TEST_CASE("gaussian_blur never increases total variation") {
    Pcg32 rng(99, 0xE1);
    for (int t = 0; t < 100; ++t) {
        Image img = random_image(16, 16, rng);
        Image out = gaussian_blur(img, 1.4, 5);
        CHECK(total_variation(out) <= total_variation(img) + 1e-6);
    }
}

TEST_CASE("sobel on constant image is zero") {
    Image c(8, 8, 0.5f);
    SobelResult s = sobel_gradients(c);
    for (float v : s.magnitude.v)
        CHECK(v == 0.0f);
}

TEST_CASE("sobel on one-pixel ramp step") {
    // columns < 6 are 0, column 6 is 0.5, columns > 6 are 1
    Image img(7, 13, 0.0f);
    for (int r = 0; r < img.h; ++r) {
        img.at(r, 6) = 0.5f;
        for (int c = 7; c < img.w; ++c)
            img.at(r, c) = 1.0f;
    }
    SobelResult s = sobel_gradients(img);
    for (int r = 1; r < img.h - 1; ++r) {
        CHECK(s.gy.at(r, 6) == doctest::Approx(0.0));
        // the stencil skips the center column: gx = (1+2+1)*(right - left)
        CHECK(s.gx.at(r, 6) == doctest::Approx(4.0));
        CHECK(s.magnitude.at(r, 6) == doctest::Approx(4.0));
        // the ramp's neighbors see half the step
        CHECK(s.gx.at(r, 5) == doctest::Approx(2.0));
        CHECK(s.gx.at(r, 7) == doctest::Approx(2.0));
        CHECK(s.direction_bin[static_cast<std::size_t>(r) * img.w + 6] == 0); // horizontal
    }
}

TEST_CASE("sobel hard step has magnitude 4*delta at both step columns") {
    Image img = vstep_image(7, 12, 6);
    SobelResult s = sobel_gradients(img);
    for (int r = 1; r < img.h - 1; ++r) {
        CHECK(s.magnitude.at(r, 5) == doctest::Approx(4.0));
        CHECK(s.magnitude.at(r, 6) == doctest::Approx(4.0));
        CHECK(s.magnitude.at(r, 3) == doctest::Approx(0.0));
    }
}

TEST_CASE("sobel rotation equivariance") {
    Pcg32 rng(5, 0xE2);
    Image img = random_image(9, 9, rng);
    // rotate 90 degrees counterclockwise: out(r,c) = in(c, w-1-r)
    Image rot(9, 9);
    for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 9; ++c)
            rot.at(r, c) = img.at(c, 9 - 1 - r);
    SobelResult a = sobel_gradients(img);
    SobelResult b = sobel_gradients(rot);
    // gradient components swap roles (up to sign) on the interior
    for (int r = 1; r < 8; ++r)
        for (int c = 1; c < 8; ++c) {
            const int sr = c, sc = 9 - 1 - r; // source pixel of rot(r,c)
            if (sr < 1 || sr > 7 || sc < 1 || sc > 7)
                continue;
            CHECK(b.gx.at(r, c) == doctest::Approx(a.gy.at(sr, sc)).epsilon(1e-5));
            CHECK(b.gy.at(r, c) == doctest::Approx(-a.gx.at(sr, sc)).epsilon(1e-5));
            CHECK(b.magnitude.at(r, c) == doctest::Approx(a.magnitude.at(sr, sc)).epsilon(1e-5));
        }
}

TEST_CASE("nms keeps impulses and plateaus") {
    Image mag(5, 5, 0.0f);
    mag.at(2, 2) = 1.0f;
    std::vector<std::uint8_t> dir(25, 0);
    Image kept = non_max_suppression(mag, dir);
    CHECK(kept.at(2, 2) == 1.0f);

    // plateau of equal magnitudes: interior all kept under >= ties
    Image plateau(5, 5, 0.7f);
    Image kp = non_max_suppression(plateau, dir);
    for (int r = 1; r < 4; ++r)
        for (int c = 1; c < 4; ++c)
            CHECK(kp.at(r, c) == 0.7f);
    // border suppressed
    for (int c = 0; c < 5; ++c) {
        CHECK(kp.at(0, c) == 0.0f);
        CHECK(kp.at(4, c) == 0.0f);
    }
}

TEST_CASE("nms thins a ramp edge to one pixel") {
    Image img(7, 13, 0.0f);
    for (int r = 0; r < img.h; ++r) {
        img.at(r, 6) = 0.5f;
        for (int c = 7; c < img.w; ++c)
            img.at(r, c) = 1.0f;
    }
    SobelResult s = sobel_gradients(img);
    Image kept = non_max_suppression(s.magnitude, s.direction_bin);
    for (int r = 1; r < img.h - 1; ++r) {
        int surviving = 0;
        for (int c = 1; c < img.w - 1; ++c)
            if (kept.at(r, c) > 0.0f)
                ++surviving;
        CHECK(surviving == 1);
        CHECK(kept.at(r, 6) > 0.0f);
    }
}

TEST_CASE("hysteresis chains and islands") {
    Image sup(5, 5, 0.0f);
    const double low = 0.2, high = 0.5;

    SUBCASE("all below low -> empty") {
        Image weak(5, 5, 0.1f);
        EdgeMap e = hysteresis(weak, low, high);
        CHECK(e.count() == 0);
    }

    SUBCASE("weak chain connected to a strong pixel is kept") {
        sup.at(2, 2) = 0.9f; // strong
        sup.at(2, 3) = 0.3f; // weak, 4-connected
        sup.at(1, 4) = 0.3f; // weak, 8-connected to (2,3)
        sup.at(4, 0) = 0.3f; // weak island
        EdgeMap e = hysteresis(sup, low, high);
        CHECK(e.at(2, 2) == 1.0f);
        CHECK(e.at(2, 3) == 1.0f);
        CHECK(e.at(1, 4) == 1.0f);
        CHECK(e.at(4, 0) == 0.0f); // island removed
        CHECK(e.count() == 3);
    }

    SUBCASE("low >= high rejected") {
        CHECK_THROWS_AS(hysteresis(sup, 0.5, 0.5), ValidationError);
    }
}

TEST_CASE("extract_edges constant image is empty") {
    Image c(32, 32, 0.6f);
    EdgeMap e = extract_edges(c);
    CHECK(e.h == 32);
    CHECK(e.w == 32);
    CHECK(e.count() == 0);
}

TEST_CASE("extract_edges rejects degenerate images") {
    Image tiny(2, 10, 0.0f);
    CHECK_THROWS_AS(extract_edges(tiny), ValidationError);
}

TEST_CASE("extract_edges localizes a disk boundary") {
    const double radius = 20.0, cy = 32.0, cx = 32.0;
    Image img = disk_image(64, cy, cx, radius);
    EdgeMap e = extract_edges(img, {}, "disk");
    CHECK(e.source_id == "disk");

    int count = 0;
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c)
            if (e.at(r, c) == 1.0f) {
                ++count;
                const double d = std::fabs(std::hypot(r - cy, c - cx) - radius);
                CHECK(d <= 1.5);
            }
    const double circumference = 2.0 * 3.14159265358979323846 * radius;
    CHECK(count >= static_cast<int>(0.8 * circumference));
    CHECK(count <= static_cast<int>(1.3 * circumference));
}

TEST_CASE("extract_edges localizes a vertical step") {
    Image img = vstep_image(48, 48, 24);
    EdgeMap e = extract_edges(img);
    int count = 0;
    for (int r = 0; r < 48; ++r)
        for (int c = 0; c < 48; ++c)
            if (e.at(r, c) == 1.0f) {
                ++count;
                CHECK(std::abs(c - 24) <= 1);
            }
    CHECK(count > 0);
}

TEST_CASE("edge maps are strictly binary and dimension-preserving") {
    Pcg32 rng(31, 0xE3);
    Image img = random_image(40, 28, rng);
    EdgeMap e = extract_edges(img);
    CHECK(e.h == 40);
    CHECK(e.w == 28);
    for (float v : e.v)
        CHECK((v == 0.0f || v == 1.0f));
}

TEST_CASE("translation covariance on the interior") {
    Image base(64, 64, 0.1f);
    // blob well inside the border
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c)
            if (std::hypot(r - 24.0, c - 24.0) <= 8.0)
                base.at(r, c) = 0.9f;
    const int dy = 3, dx = 2;
    Image shifted(64, 64, 0.1f);
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c)
            if (std::hypot(r - 24.0 - dy, c - 24.0 - dx) <= 8.0)
                shifted.at(r, c) = 0.9f;

    EdgeMap ea = extract_edges(base);
    EdgeMap eb = extract_edges(shifted);
    for (int r = 3; r < 64 - 3; ++r)
        for (int c = 3; c < 64 - 3; ++c) {
            const int sr = r - dy, sc = c - dx;
            if (sr < 3 || sr >= 61 || sc < 3 || sc >= 61)
                continue;
            CHECK(eb.at(r, c) == ea.at(sr, sc));
        }
}

TEST_CASE("intensity-scale robustness under ratio thresholds") {
    Pcg32 rng(77, 0xE4);
    Image img = random_image(32, 32, rng);
    Image smooth = gaussian_blur(img, 2.0, 6); // structured, non-trivial edges
    EdgeMap base = extract_edges(smooth);
    REQUIRE(base.count() > 0);

    for (float a : {0.5f, 2.0f}) {
        Image scaled = smooth;
        for (auto& v : scaled.v)
            v *= a; // exact in IEEE for powers of two
        EdgeMap e = extract_edges(scaled);
        CHECK(e.v == base.v);
    }
}

TEST_CASE("raising thresholds never adds edge pixels") {
    Image img = disk_image(48, 24, 24, 12, 0.8f, 0.2f);
    Image noisy = img;
    Pcg32 rng(13, 0xE5);
    for (auto& v : noisy.v)
        v = std::min(1.0f, std::max(0.0f, v + 0.05f * (rng.next_float() - 0.5f)));

    CannyParams loose;
    EdgeMap el = extract_edges(noisy, loose);

    CannyParams tight_high = loose;
    tight_high.high_ratio = 0.30;
    EdgeMap eh = extract_edges(noisy, tight_high);

    CannyParams tight_low = loose;
    tight_low.low_ratio = 0.18;
    EdgeMap elow = extract_edges(noisy, tight_low);

    for (std::size_t i = 0; i < el.v.size(); ++i) {
        if (eh.v[i] == 1.0f)
            CHECK(el.v[i] == 1.0f);
        if (elow.v[i] == 1.0f)
            CHECK(el.v[i] == 1.0f);
    }
    CHECK(eh.count() <= el.count());
    CHECK(elow.count() <= el.count());
}
