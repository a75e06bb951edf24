#include "lowbridge/checkpoint.hpp"

#include <array>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lowbridge/error.hpp"

namespace lowbridge {

namespace {

constexpr char kMagic[4] = {'L', 'B', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

const std::array<std::uint64_t, 256>& crc_table() {
    static const std::array<std::uint64_t, 256> table = [] {
        // Reflected form of the XZ polynomial 0x42F0E1EBA9EA3693.
        constexpr std::uint64_t poly = 0xC96C5795D7870F42ull;
        std::array<std::uint64_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint64_t crc = i;
            for (int b = 0; b < 8; ++b)
                crc = (crc >> 1) ^ (poly & (~(crc & 1) + 1));
            t[i] = crc;
        }
        return t;
    }();
    return table;
}

void append_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_u64(std::vector<std::uint8_t>& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
public:
    Reader(const std::vector<std::uint8_t>& buf, const std::string& path)
        : buf_(buf), path_(path) {}

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return buf_.size() - pos_; }

    const std::uint8_t* take(std::size_t n) {
        if (remaining() < n)
            throw CheckpointError(CheckpointError::Kind::truncated,
                                  "truncated checkpoint " + path_);
        const std::uint8_t* p = buf_.data() + pos_;
        pos_ += n;
        return p;
    }

    std::uint8_t u8() { return *take(1); }

    std::uint32_t u32() {
        const std::uint8_t* p = take(4);
        return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
               static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
    }

    std::uint64_t u64() {
        std::uint64_t v = 0;
        const std::uint8_t* p = take(8);
        for (int i = 7; i >= 0; --i)
            v = v << 8 | p[i];
        return v;
    }

private:
    const std::vector<std::uint8_t>& buf_;
    std::string path_;
    std::size_t pos_ = 0;
};

nlohmann::json spec_to_json(const ModelSpec& spec) {
    return {
        {"kind", to_string(spec.kind)},
        {"in_channels", spec.in_channels},
        {"out_channels", spec.out_channels},
        {"base_channels", spec.base_channels},
        {"depth", spec.depth},
        {"final_activation", to_string(spec.final_activation)},
    };
}

ModelSpec spec_from_json(const nlohmann::json& j) {
    ModelSpec spec;
    spec.kind = model_kind_from_string(j.at("kind").get<std::string>());
    spec.in_channels = j.at("in_channels").get<int>();
    spec.out_channels = j.at("out_channels").get<int>();
    spec.base_channels = j.at("base_channels").get<int>();
    spec.depth = j.at("depth").get<int>();
    spec.final_activation = final_activation_from_string(j.at("final_activation").get<std::string>());
    return spec;
}

} // namespace

std::uint64_t crc64_xz(const std::uint8_t* data, std::size_t size) {
    const auto& table = crc_table();
    std::uint64_t crc = ~0ull;
    for (std::size_t i = 0; i < size; ++i)
        crc = table[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
    return ~crc;
}

void save_checkpoint(const ParameterSet& params, const std::string& path) {
    std::vector<std::uint8_t> buf;
    buf.insert(buf.end(), kMagic, kMagic + 4);
    append_u32(buf, kVersion);
    if (params.tensors.size() > 0xffffffffull)
        throw ValidationError("save_checkpoint: too many tensors");
    append_u32(buf, static_cast<std::uint32_t>(params.tensors.size()));

    for (const auto& [name, tensor] : params.tensors) {
        append_u32(buf, static_cast<std::uint32_t>(name.size()));
        buf.insert(buf.end(), name.begin(), name.end());
        buf.push_back(0); // dtype f32
        const auto& dims = tensor.dims();
        if (dims.size() > 255)
            throw ValidationError("save_checkpoint: tensor rank too large");
        buf.push_back(static_cast<std::uint8_t>(dims.size()));
        for (std::int64_t d : dims)
            append_u64(buf, static_cast<std::uint64_t>(d));
        const auto& vals = tensor.values();
        const std::size_t off = buf.size();
        buf.resize(off + vals.size() * 4);
        static_assert(sizeof(float) == 4);
        std::memcpy(buf.data() + off, vals.data(), vals.size() * 4);
    }
    append_u64(buf, crc64_xz(buf.data(), buf.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out)
        throw IoError("failed writing " + path);
    out.close();

    nlohmann::json meta = {
        {"model_spec", spec_to_json(params.spec)},
        {"seed", params.seed},
        {"epoch", params.epoch},
    };
    std::ofstream meta_out(path + ".meta.json", std::ios::trunc);
    if (!meta_out)
        throw IoError("cannot open " + path + ".meta.json for writing");
    meta_out << meta.dump(2) << "\n";
    if (!meta_out)
        throw IoError("failed writing " + path + ".meta.json");
}

LoadResult load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open checkpoint " + path);
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
    in.close();

    Reader r(buf, path);
    const std::uint8_t* magic = r.take(4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw CheckpointError(CheckpointError::Kind::bad_magic,
                              "bad checkpoint magic in " + path);
    std::uint32_t version = r.u32();
    if (version != kVersion)
        throw CheckpointError(CheckpointError::Kind::unsupported_version,
                              "unsupported checkpoint version " + std::to_string(version) +
                                  " in " + path);
    std::uint32_t count = r.u32();

    LoadResult result;
    for (std::uint32_t t = 0; t < count; ++t) {
        std::uint32_t name_len = r.u32();
        if (name_len > (1u << 20))
            throw CheckpointError(CheckpointError::Kind::malformed,
                                  "unreasonable tensor name length in " + path);
        const std::uint8_t* name_bytes = r.take(name_len);
        std::string name(reinterpret_cast<const char*>(name_bytes), name_len);
        std::uint8_t dtype = r.u8();
        if (dtype != 0)
            throw CheckpointError(CheckpointError::Kind::malformed,
                                  "unknown dtype " + std::to_string(dtype) + " in " + path);
        std::uint8_t rank = r.u8();
        Shape dims(rank);
        std::size_t numel = 1;
        for (int i = 0; i < rank; ++i) {
            std::uint64_t d = r.u64();
            if (d == 0 || d > (1ull << 32))
                throw CheckpointError(CheckpointError::Kind::malformed,
                                      "bad tensor dimension in " + path);
            dims[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(d);
            numel *= d;
            if (numel > (1ull << 32))
                throw CheckpointError(CheckpointError::Kind::malformed,
                                      "tensor too large in " + path);
        }
        const std::uint8_t* payload = r.take(numel * 4);
        std::vector<float> vals(numel);
        std::memcpy(vals.data(), payload, numel * 4);
        if (result.params.tensors.count(name))
            throw CheckpointError(CheckpointError::Kind::malformed,
                                  "duplicate tensor name '" + name + "' in " + path);
        result.params.tensors.emplace(name, Tensor::from_data(dims, std::move(vals)));
    }

    std::uint64_t stored_crc = r.u64();
    if (r.remaining() != 0)
        throw CheckpointError(CheckpointError::Kind::malformed,
                              "trailing bytes after checksum in " + path);
    std::uint64_t actual_crc = crc64_xz(buf.data(), buf.size() - 8);
    result.checksum_ok = stored_crc == actual_crc;

    const std::string meta_path = path + ".meta.json";
    if (std::filesystem::exists(meta_path)) {
        std::ifstream meta_in(meta_path);
        if (!meta_in)
            throw IoError("cannot open " + meta_path);
        nlohmann::json meta;
        try {
            meta_in >> meta;
            result.params.spec = spec_from_json(meta.at("model_spec"));
            result.params.seed = meta.at("seed").get<std::uint64_t>();
            result.params.epoch = meta.at("epoch").get<int>();
        } catch (const nlohmann::json::exception& e) {
            throw CheckpointError(CheckpointError::Kind::malformed,
                                  "bad checkpoint metadata in " + meta_path + ": " + e.what());
        }
    }
    return result;
}

} // namespace lowbridge
