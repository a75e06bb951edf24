#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lowbridge {

// Raw binary PGM (P5) payload. maxval up to 255 means one byte per pixel,
// above that two bytes big-endian. Comment lines in the header are accepted
// on read and never emitted on write. Intensity images use maxval 255 or
// 65535; label maps use maxval = class count - 1 (enforced by the loaders in
// data.hpp, not here).
struct PgmData {
    int width = 0;
    int height = 0;
    int maxval = 255;
    std::vector<std::uint16_t> pixels; // row-major

    std::uint16_t at(int r, int c) const {
        return pixels[static_cast<std::size_t>(r) * width + c];
    }
};

PgmData read_pgm(const std::string& path);
void write_pgm(const std::string& path, const PgmData& data);

} // namespace lowbridge
