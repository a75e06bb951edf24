#include "lowbridge/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "lowbridge/error.hpp"
#include "lowbridge/pgm.hpp"

namespace fs = std::filesystem;

namespace lowbridge {

bool DatasetManifest::is_labeled() const {
    return !records.empty() && records.front().label_path.has_value();
}

void DatasetManifest::validate() const {
    if (records.empty())
        throw ValidationError("manifest: needs at least one record");
    if (num_classes < 1)
        throw ValidationError("manifest: num_classes must be >= 1");
    const bool labeled = records.front().label_path.has_value();
    for (const auto& rec : records) {
        if (rec.image_path.empty())
            throw ValidationError("manifest: record with empty image path");
        if (rec.label_path.has_value() != labeled)
            throw ValidationError("manifest: records must be labeled all-or-none");
        if (!(rec.spacing_mm[0] > 0.0f) || !(rec.spacing_mm[1] > 0.0f))
            throw ValidationError("manifest: spacing must be positive");
    }
}

namespace {

void require_keys(const nlohmann::json& j, std::initializer_list<const char*> keys,
                  const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find_if(keys.begin(), keys.end(),
                         [&](const char* k) { return it.key() == k; }) == keys.end())
            throw ValidationError("manifest: unknown key '" + it.key() + "' in " + where);
    }
    for (const char* k : keys)
        if (!j.contains(k))
            throw ValidationError("manifest: missing key '" + std::string(k) + "' in " + where);
}

} // namespace

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open manifest " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed manifest JSON in " + path + ": " + e.what());
    }

    DatasetManifest m;
    try {
        require_keys(j, {"modality", "num_classes", "records"}, path);
        m.modality = j.at("modality").get<std::string>();
        m.num_classes = j.at("num_classes").get<int>();
        const fs::path base = fs::path(path).parent_path();
        for (const auto& rj : j.at("records")) {
            require_keys(rj, {"image", "label", "spacing_mm"}, path);
            DatasetRecord rec;
            fs::path img = rj.at("image").get<std::string>();
            rec.image_path = (img.is_absolute() ? img : base / img).lexically_normal().string();
            if (!rj.at("label").is_null()) {
                fs::path lbl = rj.at("label").get<std::string>();
                rec.label_path = (lbl.is_absolute() ? lbl : base / lbl).lexically_normal().string();
            }
            const auto& sp = rj.at("spacing_mm");
            if (!sp.is_array() || sp.size() != 2)
                throw ValidationError("manifest: spacing_mm must be [row, col] in " + path);
            rec.spacing_mm = {sp[0].get<float>(), sp[1].get<float>()};
            m.records.push_back(std::move(rec));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed manifest " + path + ": " + e.what());
    }
    m.validate();
    return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
    manifest.validate();
    const fs::path base = fs::path(path).parent_path();
    auto relativize = [&](const std::string& p) {
        std::error_code ec;
        fs::path rel = fs::proximate(p, base, ec);
        return ec ? p : rel.generic_string();
    };

    nlohmann::json records = nlohmann::json::array();
    for (const auto& rec : manifest.records) {
        nlohmann::json rj = {
            {"image", relativize(rec.image_path)},
            {"label", nullptr},
            {"spacing_mm", {rec.spacing_mm[0], rec.spacing_mm[1]}},
        };
        if (rec.label_path)
            rj["label"] = relativize(*rec.label_path);
        records.push_back(std::move(rj));
    }
    nlohmann::json j = {
        {"modality", manifest.modality},
        {"num_classes", manifest.num_classes},
        {"records", std::move(records)},
    };
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
    if (!out)
        throw IoError("failed writing " + path);
}

Image load_image(const std::string& path, std::array<float, 2> spacing_mm) {
    PgmData pgm = read_pgm(path);
    if (pgm.maxval != 255 && pgm.maxval != 65535)
        throw IoError("image PGM " + path + " must use maxval 255 or 65535, got " +
                      std::to_string(pgm.maxval));
    Image img(pgm.height, pgm.width);
    img.spacing_mm = spacing_mm;
    const float inv = 1.0f / static_cast<float>(pgm.maxval);
    for (std::size_t i = 0; i < pgm.pixels.size(); ++i)
        img.v[i] = static_cast<float>(pgm.pixels[i]) * inv;
    return img;
}

LabelMap load_label(const std::string& path, int num_classes) {
    if (num_classes < 1)
        throw ValidationError("load_label: num_classes must be >= 1");
    PgmData pgm = read_pgm(path);
    if (pgm.maxval != num_classes - 1)
        throw IoError("label PGM " + path + " must use maxval = num_classes-1 = " +
                      std::to_string(num_classes - 1) + ", got " + std::to_string(pgm.maxval));
    LabelMap lbl(pgm.height, pgm.width);
    for (std::size_t i = 0; i < pgm.pixels.size(); ++i) {
        if (pgm.pixels[i] >= static_cast<std::uint16_t>(num_classes))
            throw IoError("label PGM " + path + " has class " +
                          std::to_string(pgm.pixels[i]) + " outside [0," +
                          std::to_string(num_classes) + ")");
        lbl.v[i] = static_cast<std::int32_t>(pgm.pixels[i]);
    }
    return lbl;
}

void save_image(const std::string& path, const Image& image, int maxval) {
    if (maxval != 255 && maxval != 65535)
        throw ValidationError("save_image: maxval must be 255 or 65535");
    PgmData pgm;
    pgm.width = image.w;
    pgm.height = image.h;
    pgm.maxval = maxval;
    pgm.pixels.resize(image.size());
    for (std::size_t i = 0; i < image.size(); ++i) {
        double v = std::clamp(static_cast<double>(image.v[i]), 0.0, 1.0);
        pgm.pixels[i] = static_cast<std::uint16_t>(std::lround(v * maxval));
    }
    write_pgm(path, pgm);
}

void save_label(const std::string& path, const LabelMap& label, int num_classes) {
    if (num_classes < 1 || num_classes > 65536)
        throw ValidationError("save_label: num_classes out of range");
    PgmData pgm;
    pgm.width = label.w;
    pgm.height = label.h;
    pgm.maxval = std::max(1, num_classes - 1);
    pgm.pixels.resize(label.size());
    for (std::size_t i = 0; i < label.size(); ++i) {
        if (label.v[i] < 0 || label.v[i] >= num_classes)
            throw ValidationError("save_label: class " + std::to_string(label.v[i]) +
                                  " outside [0," + std::to_string(num_classes) + ")");
        pgm.pixels[i] = static_cast<std::uint16_t>(label.v[i]);
    }
    write_pgm(path, pgm);
}

void AugmentationConfig::validate() const {
    if (!(crop_scale_min > 0.0) || crop_scale_min > crop_scale_max || crop_scale_max > 1.0)
        throw ValidationError("AugmentationConfig: need 0 < crop_scale_min <= crop_scale_max <= 1");
    if (rotation_max_deg < 0.0)
        throw ValidationError("AugmentationConfig: rotation_max_deg must be >= 0");
    if (!(gamma_min > 0.0) || gamma_min > gamma_max)
        throw ValidationError("AugmentationConfig: need 0 < gamma_min <= gamma_max");
    if (!(contrast_min > 0.0) || contrast_min > contrast_max)
        throw ValidationError("AugmentationConfig: need 0 < contrast_min <= contrast_max");
    if (output_size < 0)
        throw ValidationError("AugmentationConfig: output_size must be >= 0");
}

std::pair<Image, LabelMap> augment(const Image& image, const LabelMap& label,
                                   const AugmentationConfig& cfg, Pcg32& rng) {
    cfg.validate();
    if (image.h != label.h || image.w != label.w)
        throw ShapeError("augment: image/label dims differ");
    if (image.h <= 0 || image.w <= 0)
        throw ValidationError("augment: empty image");

    const int h = image.h, w = image.w;
    const int oh = cfg.output_size > 0 ? cfg.output_size : h;
    const int ow = cfg.output_size > 0 ? cfg.output_size : w;

    // Fixed draw order keeps sample streams stable across configurations.
    double theta_deg = rng.uniform(-cfg.rotation_max_deg, cfg.rotation_max_deg);
    double area = rng.uniform(cfg.crop_scale_min, cfg.crop_scale_max);
    double crop_u = rng.next_double();
    double crop_v = rng.next_double();
    double gamma = rng.uniform(cfg.gamma_min, cfg.gamma_max);
    double gain = rng.uniform(cfg.contrast_min, cfg.contrast_max);
    if (!cfg.enable_rotation)
        theta_deg = 0.0;
    if (!cfg.enable_crop) {
        area = 1.0;
        crop_u = crop_v = 0.0;
    }
    if (!cfg.enable_gamma)
        gamma = 1.0;
    if (!cfg.enable_contrast)
        gain = 1.0;

    const double frac = std::sqrt(area);
    const double ch = h * frac, cw = w * frac;
    const double y0 = (h - ch) * crop_u;
    const double x0 = (w - cw) * crop_v;
    const double theta = theta_deg * std::numbers::pi / 180.0;

    Image img_out(oh, ow);
    img_out.spacing_mm = {static_cast<float>(image.spacing_mm[0] * ch / oh),
                          static_cast<float>(image.spacing_mm[1] * cw / ow)};
    LabelMap lbl_out(oh, ow);

    const bool identity_geom = theta == 0.0 && frac == 1.0 && oh == h && ow == w;
    if (identity_geom) {
        img_out.v = image.v;
        lbl_out.v = label.v;
    } else {
        const double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;
        const double cos_t = std::cos(theta), sin_t = std::sin(theta);
        const double sy = ch / oh, sx = cw / ow;
        for (int r = 0; r < oh; ++r) {
            for (int c = 0; c < ow; ++c) {
                double yc = y0 + (r + 0.5) * sy - 0.5;
                double xc = x0 + (c + 0.5) * sx - 0.5;
                double dy = yc - cy, dx = xc - cx;
                double ys = std::clamp(cy - sin_t * dx + cos_t * dy, 0.0, h - 1.0);
                double xs = std::clamp(cx + cos_t * dx + sin_t * dy, 0.0, w - 1.0);

                int iy0 = static_cast<int>(std::floor(ys));
                int ix0 = static_cast<int>(std::floor(xs));
                int iy1 = std::min(iy0 + 1, h - 1);
                int ix1 = std::min(ix0 + 1, w - 1);
                double wy = ys - iy0, wx = xs - ix0;
                double top = image.at(iy0, ix0) * (1.0 - wx) + image.at(iy0, ix1) * wx;
                double bot = image.at(iy1, ix0) * (1.0 - wx) + image.at(iy1, ix1) * wx;
                img_out.at(r, c) = static_cast<float>(top * (1.0 - wy) + bot * wy);

                int ny = std::clamp(static_cast<int>(std::lround(ys)), 0, h - 1);
                int nx = std::clamp(static_cast<int>(std::lround(xs)), 0, w - 1);
                lbl_out.at(r, c) = label.at(ny, nx);
            }
        }
    }

    if (gamma != 1.0 || gain != 1.0) {
        for (float& v : img_out.v) {
            double x = std::clamp(static_cast<double>(v), 0.0, 1.0);
            if (gamma != 1.0)
                x = std::pow(x, gamma);
            if (gain != 1.0)
                x = 0.5 + gain * (x - 0.5);
            v = static_cast<float>(std::clamp(x, 0.0, 1.0));
        }
    } else {
        for (float& v : img_out.v)
            v = std::clamp(v, 0.0f, 1.0f);
    }
    return {std::move(img_out), std::move(lbl_out)};
}

} // namespace lowbridge
