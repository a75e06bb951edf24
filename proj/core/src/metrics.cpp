#include "lowbridge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lowbridge/error.hpp"
#include "lowbridge/parallel.hpp"

namespace lowbridge {

namespace {

void check_pair(const LabelMap& pred, const LabelMap& truth, const char* who) {
    if (pred.h != truth.h || pred.w != truth.w)
        throw ShapeError(std::string(who) + ": dimension mismatch " + std::to_string(pred.h) +
                         "x" + std::to_string(pred.w) + " vs " + std::to_string(truth.h) + "x" +
                         std::to_string(truth.w));
    if (pred.h <= 0 || pred.w <= 0)
        throw ValidationError(std::string(who) + ": empty label maps");
}

inline double pair_sq_dist(int pr, int pc, int qr, int qc, double sr, double sc) {
    double dr = (pr - qr) * sr;
    double dc = (pc - qc) * sc;
    return dr * dr + dc * dc;
}

double sentinel_mm(int h, int w, double sr, double sc) {
    double dy = h * sr, dx = w * sc;
    return std::sqrt(dy * dy + dx * dx);
}

// Directed mean distance from each point of `from` to the nearest point of
// `to`, brute force over all pairs.
double directed_mean_brute(const std::vector<std::pair<int, int>>& from,
                           const std::vector<std::pair<int, int>>& to,
                           double sr, double sc) {
    double total = 0.0;
    for (const auto& [pr, pc] : from) {
        double best = pair_sq_dist(pr, pc, to[0].first, to[0].second, sr, sc);
        for (std::size_t i = 1; i < to.size(); ++i) {
            double d = pair_sq_dist(pr, pc, to[i].first, to[i].second, sr, sc);
            if (d < best)
                best = d;
        }
        total += std::sqrt(best);
    }
    return total / static_cast<double>(from.size());
}

// Same result as directed_mean_brute: candidates are pruned only when a row
// or column offset alone already exceeds the best squared distance, which
// can never exclude the minimum (x^2 + y^2 >= x^2 holds under IEEE rounding).
double directed_mean_pruned(const std::vector<std::pair<int, int>>& from,
                            const std::vector<std::pair<int, int>>& to,
                            double sr, double sc) {
    // Boundary points arrive row-major: group by row.
    std::vector<int> rows;               // distinct rows in increasing order
    std::vector<std::size_t> row_begin;  // index into `to` where each row starts
    rows.reserve(64);
    row_begin.reserve(65);
    for (std::size_t i = 0; i < to.size(); ++i) {
        if (rows.empty() || to[i].first != rows.back()) {
            rows.push_back(to[i].first);
            row_begin.push_back(i);
        }
    }
    row_begin.push_back(to.size());
    const int n_rows = static_cast<int>(rows.size());

    double total = 0.0;
    for (const auto& [pr, pc] : from) {
        // Start at the row nearest to pr.
        int lo = static_cast<int>(std::lower_bound(rows.begin(), rows.end(), pr) - rows.begin());
        int up = lo - 1; // rows[up] < pr <= rows[lo]
        double best = std::numeric_limits<double>::infinity();
        while (lo < n_rows || up >= 0) {
            // Pick whichever remaining row is vertically closer.
            int pick;
            if (lo >= n_rows)
                pick = up--;
            else if (up < 0)
                pick = lo++;
            else if (rows[lo] - pr <= pr - rows[up])
                pick = lo++;
            else
                pick = up--;
            double dr = (pr - rows[pick]) * sr;
            if (dr * dr > best)
                continue; // no row further out can win either, but loop cost is tiny
            // Scan this row outward from the nearest column.
            std::size_t b = row_begin[static_cast<std::size_t>(pick)];
            std::size_t e = row_begin[static_cast<std::size_t>(pick) + 1];
            auto col_at = [&](std::size_t i) { return to[i].second; };
            std::size_t right = b;
            while (right < e && col_at(right) < pc)
                ++right;
            std::size_t left = right;
            while (left > b || right < e) {
                bool take_right;
                if (left == b)
                    take_right = true;
                else if (right == e)
                    take_right = false;
                else
                    take_right = col_at(right) - pc <= pc - col_at(left - 1);
                std::size_t idx;
                if (take_right)
                    idx = right++;
                else
                    idx = --left;
                double dc = (pc - col_at(idx)) * sc;
                if (dc * dc > best)
                    break; // columns only get further in this direction order
                double d = pair_sq_dist(pr, pc, to[idx].first, to[idx].second, sr, sc);
                if (d < best)
                    best = d;
            }
        }
        total += std::sqrt(best);
    }
    return total / static_cast<double>(from.size());
}

AsdResult asd_impl(const LabelMap& pred, const LabelMap& truth, int class_id,
                   std::array<float, 2> spacing_mm, bool brute) {
    check_pair(pred, truth, "asd");
    if (!(spacing_mm[0] > 0.0f) || !(spacing_mm[1] > 0.0f))
        throw ValidationError("asd: spacing must be positive");
    const double sr = spacing_mm[0], sc = spacing_mm[1];

    auto bp = extract_boundary(class_mask(pred, class_id), pred.h, pred.w);
    auto bt = extract_boundary(class_mask(truth, class_id), truth.h, truth.w);
    if (bp.empty() && bt.empty())
        return {0.0, false};
    if (bp.empty() || bt.empty())
        return {sentinel_mm(pred.h, pred.w, sr, sc), true};

    double fwd, bwd;
    if (brute) {
        fwd = directed_mean_brute(bp, bt, sr, sc);
        bwd = directed_mean_brute(bt, bp, sr, sc);
    } else {
        fwd = directed_mean_pruned(bp, bt, sr, sc);
        bwd = directed_mean_pruned(bt, bp, sr, sc);
    }
    return {0.5 * (fwd + bwd), false};
}

} // namespace

double dice_score(const LabelMap& pred, const LabelMap& truth, int class_id) {
    check_pair(pred, truth, "dice_score");
    std::size_t p = 0, t = 0, both = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        bool in_p = pred.v[i] == class_id;
        bool in_t = truth.v[i] == class_id;
        p += in_p;
        t += in_t;
        both += in_p && in_t;
    }
    if (p + t == 0)
        return 1.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(p + t);
}

std::vector<std::pair<int, int>> extract_boundary(const std::vector<std::uint8_t>& mask,
                                                  int h, int w) {
    if (static_cast<std::size_t>(h) * w != mask.size())
        throw ShapeError("extract_boundary: mask size does not match dims");
    std::vector<std::pair<int, int>> out;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!mask[static_cast<std::size_t>(r) * w + c])
                continue;
            bool boundary = r == 0 || r == h - 1 || c == 0 || c == w - 1 ||
                            !mask[static_cast<std::size_t>(r - 1) * w + c] ||
                            !mask[static_cast<std::size_t>(r + 1) * w + c] ||
                            !mask[static_cast<std::size_t>(r) * w + c - 1] ||
                            !mask[static_cast<std::size_t>(r) * w + c + 1];
            if (boundary)
                out.emplace_back(r, c);
        }
    }
    return out;
}

AsdResult asd(const LabelMap& pred, const LabelMap& truth, int class_id,
              std::array<float, 2> spacing_mm) {
    return asd_impl(pred, truth, class_id, spacing_mm, false);
}

AsdResult asd_brute(const LabelMap& pred, const LabelMap& truth, int class_id,
                    std::array<float, 2> spacing_mm) {
    return asd_impl(pred, truth, class_id, spacing_mm, true);
}

MetricsReport evaluate_dataset(const std::vector<LabelMap>& preds,
                               const std::vector<LabelMap>& truths,
                               const std::vector<std::array<float, 2>>& spacings_mm,
                               int num_classes) {
    if (preds.empty())
        throw ValidationError("evaluate_dataset: empty prediction list");
    if (preds.size() != truths.size() || preds.size() != spacings_mm.size())
        throw ShapeError("evaluate_dataset: preds/truths/spacings lengths differ");

    int n = num_classes;
    if (n <= 0) {
        std::int32_t mx = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            for (std::int32_t v : preds[i].v)
                mx = std::max(mx, v);
            for (std::int32_t v : truths[i].v)
                mx = std::max(mx, v);
        }
        n = mx + 1;
    }
    if (n < 1)
        throw ValidationError("evaluate_dataset: need at least 1 class");

    const std::size_t ns = preds.size();
    std::vector<double> dice_acc(static_cast<std::size_t>(n) * ns);
    std::vector<double> asd_acc(static_cast<std::size_t>(n) * ns);
    std::vector<std::uint8_t> sentinel(static_cast<std::size_t>(n) * ns, 0);

    parallel_for(ns, [&](std::size_t i) {
        check_pair(preds[i], truths[i], "evaluate_dataset");
        for (int c = 0; c < n; ++c) {
            std::size_t k = static_cast<std::size_t>(c) * ns + i;
            dice_acc[k] = dice_score(preds[i], truths[i], c);
            AsdResult r = asd(preds[i], truths[i], c, spacings_mm[i]);
            asd_acc[k] = r.value_mm;
            sentinel[k] = r.is_sentinel ? 1 : 0;
        }
    });

    MetricsReport rep;
    rep.n_samples = static_cast<int>(ns);
    for (int c = 0; c < n; ++c) {
        double ds = 0.0, as = 0.0;
        for (std::size_t i = 0; i < ns; ++i) {
            std::size_t k = static_cast<std::size_t>(c) * ns + i;
            ds += dice_acc[k];
            as += asd_acc[k];
            rep.sentinel_count += sentinel[k];
        }
        rep.classes.push_back(c == 0 ? "background" : "class" + std::to_string(c));
        rep.dice.push_back(ds / static_cast<double>(ns));
        rep.asd_mm.push_back(as / static_cast<double>(ns));
    }
    if (n > 1) {
        double ds = 0.0, as = 0.0;
        for (int c = 1; c < n; ++c) {
            ds += rep.dice[static_cast<std::size_t>(c)];
            as += rep.asd_mm[static_cast<std::size_t>(c)];
        }
        rep.average_dice = ds / (n - 1);
        rep.average_asd_mm = as / (n - 1);
    } else {
        rep.average_dice = rep.dice[0];
        rep.average_asd_mm = rep.asd_mm[0];
    }
    return rep;
}

std::string MetricsReport::to_json() const {
    nlohmann::json j = {
        {"classes", classes},
        {"per_class", {{"dice", dice}, {"asd_mm", asd_mm}}},
        {"average", {{"dice", average_dice}, {"asd_mm", average_asd_mm}}},
        {"n_samples", n_samples},
        {"sentinel_count", sentinel_count},
    };
    return j.dump(2);
}

std::string MetricsReport::to_csv() const {
    std::ostringstream out;
    out << "class,dice,asd_mm\n";
    char buf[64];
    for (std::size_t c = 0; c < classes.size(); ++c) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f", dice[c], asd_mm[c]);
        out << classes[c] << "," << buf << "\n";
    }
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", average_dice, average_asd_mm);
    out << "average," << buf << "\n";
    return out.str();
}

std::string format_report(const MetricsReport& report) {
    std::ostringstream out;
    out << "class            dice%   asd_mm\n";
    char buf[64];
    for (std::size_t c = 0; c < report.classes.size(); ++c) {
        std::snprintf(buf, sizeof(buf), "%-15s %6.1f %8.1f\n", report.classes[c].c_str(),
                      report.dice[c] * 100.0, report.asd_mm[c]);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%-15s %6.1f %8.1f\n", "average",
                  report.average_dice * 100.0, report.average_asd_mm);
    out << buf;
    if (report.sentinel_count > 0)
        out << "warning: " << report.sentinel_count
            << " empty-vs-nonempty boundary pair(s) scored at the sentinel distance\n";
    return out.str();
}

} // namespace lowbridge
