#include "crowdseg/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace crowdseg {

namespace {

constexpr char kMagic[4] = {'F', 'M', 'A', 'P'};
constexpr std::uint32_t kVersion = 1;
// Header: magic(4) + version(4) + h(4) + w(4) + d(4).
constexpr std::size_t kHeaderSize = 20;
constexpr std::uint64_t kMaxElements = 1u << 30;  // 4 GiB of f32 payload

void put_u32_le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t offset, const std::string& what) {
    std::ostringstream os;
    os << path.string() << ": " << what << " (at byte " << offset << ")";
    throw IoError(os.str());
}

std::string read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof()) throw IoError(path.string() + ": read failure");
    return std::move(buf).str();
}

void write_all(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(path.string() + ": write failure");
}

std::string encode_tensor(int h, int w, int d, const std::vector<float>& data) {
    std::string out;
    out.reserve(kHeaderSize + data.size() * 4);
    out.append(kMagic, 4);
    put_u32_le(out, kVersion);
    put_u32_le(out, static_cast<std::uint32_t>(h));
    put_u32_le(out, static_cast<std::uint32_t>(w));
    put_u32_le(out, static_cast<std::uint32_t>(d));
    for (float f : data) {
        auto bits = std::bit_cast<std::uint32_t>(f);
        put_u32_le(out, bits);
    }
    return out;
}

}  // namespace

std::variant<ScalarMap, FeatureMap> read_tensor(const std::filesystem::path& path) {
    std::string bytes = read_all(path);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());

    if (bytes.size() < kHeaderSize) fail(path, bytes.size(), "truncated header");
    if (std::memcmp(p, kMagic, 4) != 0) fail(path, 0, "bad magic, expected FMAP");
    std::uint32_t version = get_u32_le(p + 4);
    if (version != kVersion) {
        std::ostringstream os;
        os << "unsupported version " << version;
        fail(path, 4, os.str());
    }
    std::uint32_t h = get_u32_le(p + 8);
    std::uint32_t w = get_u32_le(p + 12);
    std::uint32_t d = get_u32_le(p + 16);
    if (h == 0) fail(path, 8, "empty dimension: height is 0");
    if (w == 0) fail(path, 12, "empty dimension: width is 0");
    if (d == 0) fail(path, 16, "empty dimension: depth is 0");
    std::uint64_t count = static_cast<std::uint64_t>(h) * w * d;
    if (count > kMaxElements) fail(path, 8, "dimension overflow");

    std::size_t need = kHeaderSize + static_cast<std::size_t>(count) * 4;
    if (bytes.size() < need) {
        std::ostringstream os;
        os << "truncated payload: header declares " << count << " floats ("
           << count * 4 << " bytes), file holds " << bytes.size() - kHeaderSize;
        fail(path, bytes.size(), os.str());
    }

    std::vector<float> data(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint32_t bits = get_u32_le(p + kHeaderSize + i * 4);
        data[i] = std::bit_cast<float>(bits);
    }

    if (d == 1) {
        ScalarMap m(static_cast<int>(h), static_cast<int>(w));
        m.data = std::move(data);
        return m;
    }
    FeatureMap m(static_cast<int>(h), static_cast<int>(w), static_cast<int>(d));
    m.data = std::move(data);
    return m;
}

ScalarMap read_scalar_map(const std::filesystem::path& path) {
    auto t = read_tensor(path);
    if (auto* s = std::get_if<ScalarMap>(&t)) return std::move(*s);
    throw DataError(path.string() + ": expected a depth-1 tensor");
}

FeatureMap read_feature_map(const std::filesystem::path& path) {
    auto t = read_tensor(path);
    if (auto* f = std::get_if<FeatureMap>(&t)) return std::move(*f);
    // A depth-1 feature map is legal; widen the scalar decoding.
    auto& s = std::get<ScalarMap>(t);
    FeatureMap m(s.height, s.width, 1);
    m.data = std::move(s.data);
    return m;
}

void write_tensor(const ScalarMap& m, const std::filesystem::path& path) {
    if (m.data.size() != static_cast<std::size_t>(m.height) * m.width)
        throw DataError("write_tensor: data length does not match height*width");
    write_all(path, encode_tensor(m.height, m.width, 1, m.data));
}

void write_tensor(const FeatureMap& m, const std::filesystem::path& path) {
    if (m.data.size() != static_cast<std::size_t>(m.height) * m.width * m.depth)
        throw DataError("write_tensor: data length does not match height*width*depth");
    write_all(path, encode_tensor(m.height, m.width, m.depth, m.data));
}

namespace {

// Minimal binary PNM parsing: P5/P6, maxval 255, '#' comments in header.
struct PnmHeader {
    int type = 0;  // 5 or 6
    int width = 0;
    int height = 0;
    std::size_t payload_offset = 0;
};

int next_header_int(const std::string& bytes, std::size_t& pos, const std::filesystem::path& path) {
    while (pos < bytes.size()) {
        char c = bytes[pos];
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
        } else {
            break;
        }
    }
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos])))
        fail(path, pos, "malformed PNM header");
    long v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
        v = v * 10 + (bytes[pos] - '0');
        if (v > 1 << 20) fail(path, pos, "PNM dimension overflow");
        ++pos;
    }
    return static_cast<int>(v);
}

PnmHeader parse_pnm(const std::string& bytes, const std::filesystem::path& path) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        fail(path, 0, "not a binary PGM/PPM (expected P5 or P6)");
    PnmHeader h;
    h.type = bytes[1] - '0';
    std::size_t pos = 2;
    h.width = next_header_int(bytes, pos, path);
    h.height = next_header_int(bytes, pos, path);
    int maxval = next_header_int(bytes, pos, path);
    if (maxval != 255) fail(path, pos, "only maxval 255 is supported");
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
        fail(path, pos, "malformed PNM header");
    ++pos;  // single whitespace before payload
    h.payload_offset = pos;
    if (h.width <= 0 || h.height <= 0) fail(path, 2, "empty dimension");
    std::size_t channels = h.type == 6 ? 3 : 1;
    std::size_t need = h.payload_offset + channels * static_cast<std::size_t>(h.width) * h.height;
    if (bytes.size() < need) fail(path, bytes.size(), "truncated PNM payload");
    return h;
}

}  // namespace

RgbImage read_image(const std::filesystem::path& path) {
    std::string bytes = read_all(path);
    PnmHeader h = parse_pnm(bytes, path);
    RgbImage img(h.height, h.width);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + h.payload_offset;
    std::size_t n = static_cast<std::size_t>(h.height) * h.width;
    if (h.type == 6) {
        for (std::size_t i = 0; i < n; ++i) {
            img.r.data[i] = static_cast<float>(p[3 * i + 0]) / 255.0f;
            img.g.data[i] = static_cast<float>(p[3 * i + 1]) / 255.0f;
            img.b.data[i] = static_cast<float>(p[3 * i + 2]) / 255.0f;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            float v = static_cast<float>(p[i]) / 255.0f;
            img.r.data[i] = img.g.data[i] = img.b.data[i] = v;
        }
    }
    return img;
}

namespace {

unsigned char to_byte(float v) {
    float x = std::clamp(v, 0.0f, 1.0f) * 255.0f;
    return static_cast<unsigned char>(std::lround(x));
}

}  // namespace

void write_ppm(const RgbImage& img, const std::filesystem::path& path) {
    std::ostringstream os;
    os << "P6\n" << img.width() << " " << img.height() << "\n255\n";
    std::string out = os.str();
    std::size_t n = static_cast<std::size_t>(img.height()) * img.width();
    out.reserve(out.size() + 3 * n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(static_cast<char>(to_byte(img.r.data[i])));
        out.push_back(static_cast<char>(to_byte(img.g.data[i])));
        out.push_back(static_cast<char>(to_byte(img.b.data[i])));
    }
    write_all(path, out);
}

Mask read_mask(const std::filesystem::path& path) {
    std::string bytes = read_all(path);
    PnmHeader h = parse_pnm(bytes, path);
    if (h.type != 5) fail(path, 0, "masks must be PGM (P5)");
    Mask mask(h.height, h.width);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + h.payload_offset;
    std::size_t n = static_cast<std::size_t>(h.height) * h.width;
    for (std::size_t i = 0; i < n; ++i) {
        switch (p[i]) {
            case 0: mask.data[i] = PixelClass::Static; break;
            case 255: mask.data[i] = PixelClass::Dynamic; break;
            case 128: mask.data[i] = PixelClass::DontCare; break;
            default: {
                std::ostringstream os;
                os << "mask value " << static_cast<int>(p[i])
                   << " is not one of {0, 128, 255}";
                fail(path, h.payload_offset + i, os.str());
            }
        }
    }
    return mask;
}

void write_mask(const Mask& mask, const std::filesystem::path& path) {
    std::ostringstream os;
    os << "P5\n" << mask.width << " " << mask.height << "\n255\n";
    std::string out = os.str();
    for (PixelClass c : mask.data) {
        unsigned char v = c == PixelClass::Dynamic ? 255 : (c == PixelClass::DontCare ? 128 : 0);
        out.push_back(static_cast<char>(v));
    }
    write_all(path, out);
}

void write_pgm8(const ScalarMap& m, const std::filesystem::path& path) {
    std::ostringstream os;
    os << "P5\n" << m.width << " " << m.height << "\n255\n";
    std::string out = os.str();
    for (float v : m.data) out.push_back(static_cast<char>(to_byte(v)));
    write_all(path, out);
}

}  // namespace crowdseg
