#include "lowbridge/pgm.hpp"

#include <cctype>
#include <fstream>

#include "lowbridge/error.hpp"

namespace lowbridge {

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in, const std::string& path) {
    std::string tok;
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n')
                ch = in.get();
        } else if (std::isspace(ch)) {
            ch = in.get();
        } else {
            break;
        }
    }
    while (ch != EOF && !std::isspace(ch) && ch != '#') {
        tok.push_back(static_cast<char>(ch));
        ch = in.get();
    }
    // Leave the terminating byte in the stream: after the maxval token the
    // caller checks for the single separator byte itself.
    if (ch != EOF)
        in.unget();
    if (tok.empty())
        throw IoError("truncated PGM header in " + path);
    return tok;
}

int parse_header_int(std::istream& in, const std::string& path, const char* what) {
    std::string tok = next_token(in, path);
    int value = 0;
    for (char c : tok) {
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw IoError(std::string("malformed PGM ") + what + " '" + tok + "' in " + path);
        value = value * 10 + (c - '0');
        if (value > 1 << 20)
            throw IoError(std::string("PGM ") + what + " out of range in " + path);
    }
    return value;
}

} // namespace

PgmData read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);

    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (!in || m0 != 'P' || m1 != '5')
        throw IoError("bad PGM magic in " + path + " (expected P5)");

    PgmData data;
    data.width = parse_header_int(in, path, "width");
    data.height = parse_header_int(in, path, "height");
    data.maxval = parse_header_int(in, path, "maxval");
    if (data.width <= 0 || data.height <= 0)
        throw IoError("non-positive PGM dimensions in " + path);
    if (data.maxval < 1 || data.maxval > 65535)
        throw IoError("PGM maxval " + std::to_string(data.maxval) + " out of range in " + path);

    // Exactly one whitespace byte separates the header from the raster.
    int sep = in.get();
    if (sep == EOF || !std::isspace(sep))
        throw IoError("truncated PGM header in " + path);

    const std::size_t count = static_cast<std::size_t>(data.width) * data.height;
    const std::size_t bytes_per = data.maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(count * bytes_per);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw IoError("truncated PGM pixel data in " + path);

    data.pixels.resize(count);
    if (bytes_per == 1) {
        for (std::size_t i = 0; i < count; ++i)
            data.pixels[i] = raw[i];
    } else {
        for (std::size_t i = 0; i < count; ++i)
            data.pixels[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    }
    return data;
}

void write_pgm(const std::string& path, const PgmData& data) {
    if (data.width <= 0 || data.height <= 0)
        throw ValidationError("write_pgm: non-positive dimensions");
    if (data.maxval < 1 || data.maxval > 65535)
        throw ValidationError("write_pgm: maxval out of range");
    const std::size_t count = static_cast<std::size_t>(data.width) * data.height;
    if (data.pixels.size() != count)
        throw ValidationError("write_pgm: pixel count does not match dimensions");
    for (std::uint16_t p : data.pixels)
        if (p > data.maxval)
            throw ValidationError("write_pgm: pixel value exceeds maxval");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out << "P5\n" << data.width << " " << data.height << "\n" << data.maxval << "\n";
    if (data.maxval > 255) {
        std::vector<unsigned char> raw(count * 2);
        for (std::size_t i = 0; i < count; ++i) {
            raw[2 * i] = static_cast<unsigned char>(data.pixels[i] >> 8);
            raw[2 * i + 1] = static_cast<unsigned char>(data.pixels[i] & 0xff);
        }
        out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    } else {
        std::vector<unsigned char> raw(count);
        for (std::size_t i = 0; i < count; ++i)
            raw[i] = static_cast<unsigned char>(data.pixels[i]);
        out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    }
    if (!out)
        throw IoError("failed writing " + path);
}

} // namespace lowbridge
