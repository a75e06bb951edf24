#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lowbridge/image.hpp"

namespace lowbridge {

// 2|P∩T| / (|P|+|T|) for the given class; both masks empty -> 1.0.
double dice_score(const LabelMap& pred, const LabelMap& truth, int class_id);

// Foreground pixels with at least one background 4-neighbor; the image border
// counts as background. Row-major order.
std::vector<std::pair<int, int>> extract_boundary(const std::vector<std::uint8_t>& mask,
                                                  int h, int w);

struct AsdResult {
    double value_mm = 0.0;
    bool is_sentinel = false; // exactly one boundary empty
};

// Symmetric average surface distance between class boundaries, in mm.
// Both boundaries empty -> 0. Exactly one empty -> sentinel (image diagonal).
AsdResult asd(const LabelMap& pred, const LabelMap& truth, int class_id,
              std::array<float, 2> spacing_mm);

// O(|A|*|B|) definition of the same quantity; the pruned scan used by asd()
// must agree bit-for-bit.
AsdResult asd_brute(const LabelMap& pred, const LabelMap& truth, int class_id,
                    std::array<float, 2> spacing_mm);

struct MetricsReport {
    std::vector<std::string> classes;
    std::vector<double> dice;   // per class, mean over samples
    std::vector<double> asd_mm; // per class, mean over samples
    double average_dice = 0.0;  // over foreground classes
    double average_asd_mm = 0.0;
    int n_samples = 0;
    int sentinel_count = 0;

    std::string to_json() const;
    std::string to_csv() const;
};

// Reporting conventions: higher Dice better, lower ASD better.
inline bool dice_better(double a, double b) { return a > b; }
inline bool asd_better(double a, double b) { return a < b; }

MetricsReport evaluate_dataset(const std::vector<LabelMap>& preds,
                               const std::vector<LabelMap>& truths,
                               const std::vector<std::array<float, 2>>& spacings_mm,
                               int num_classes = 0); // 0 = infer from labels

// Human-readable table with Dice in percent, one decimal.
std::string format_report(const MetricsReport& report);

} // namespace lowbridge
