#pragma once

// Native binary containers:
//   MSV1  u32 nx ny nz ne | f32 sx sy sz | ne x f32 keV centers | f32 payload
//   MSL1  u32 nx ny nz | u32 payload
//   MSS1  u32 n_angles n_detectors ne | ne x f32 keV centers | f32 payload
// All little-endian, payload order x-fastest (detector-fastest for MSS).

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "msct/error.hpp"
#include "msct/sinogram.hpp"
#include "msct/volume.hpp"

namespace msct {

namespace detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

inline std::uint32_t byteswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

class Writer {
public:
    void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }
    void u32(std::uint32_t v) {
        if constexpr (std::endian::native == std::endian::big)
            v = byteswap32(v);
        append(&v, 4);
    }
    void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
    void f32s(std::span<const float> fs) {
        if constexpr (std::endian::native == std::endian::little)
            append(fs.data(), fs.size() * 4);
        else
            for (float f : fs)
                f32(f);
    }
    void u32s(std::span<const std::uint32_t> vs) {
        if constexpr (std::endian::native == std::endian::little)
            append(vs.data(), vs.size() * 4);
        else
            for (auto v : vs)
                u32(v);
    }
    const std::vector<char>& bytes() const { return bytes_; }

private:
    void append(const void* p, std::size_t n) {
        auto c = static_cast<const char*>(p);
        bytes_.insert(bytes_.end(), c, c + n);
    }
    std::vector<char> bytes_;
};

class Reader {
public:
    Reader(std::vector<char> bytes, std::string origin) : bytes_(std::move(bytes)), origin_(std::move(origin)) {}

    void expect_magic(std::string_view m) {
        if (bytes_.size() < m.size() || std::string_view(bytes_.data(), m.size()) != m)
            throw FormatError(origin_ + ": missing " + std::string(m) + " magic");
        pos_ = m.size();
    }
    std::uint32_t header_u32() {
        need_header(4);
        std::uint32_t v;
        std::memcpy(&v, bytes_.data() + pos_, 4);
        pos_ += 4;
        if constexpr (std::endian::native == std::endian::big)
            v = byteswap32(v);
        return v;
    }
    float header_f32() { return std::bit_cast<float>(header_u32()); }

    // Payload reads raise TruncationError rather than FormatError.
    template <class T>
    std::vector<T> payload(std::uint64_t count) {
        const std::uint64_t want = count * sizeof(T);
        const std::uint64_t have = bytes_.size() - pos_;
        if (want > have)
            throw TruncationError(origin_ + ": payload declares " + std::to_string(want) + " bytes, file holds " +
                                  std::to_string(have));
        if (want < have)
            throw FormatError(origin_ + ": " + std::to_string(have - want) + " trailing bytes after payload");
        std::vector<T> out(count);
        std::memcpy(out.data(), bytes_.data() + pos_, want);
        if constexpr (std::endian::native == std::endian::big)
            for (auto& v : out)
                v = std::bit_cast<T>(byteswap32(std::bit_cast<std::uint32_t>(v)));
        pos_ += want;
        return out;
    }

private:
    void need_header(std::size_t n) {
        if (bytes_.size() - pos_ < n)
            throw FormatError(origin_ + ": header truncated");
    }
    std::vector<char> bytes_;
    std::string origin_;
    std::size_t pos_ = 0;
};

inline std::vector<char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string() + " for reading");
    return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::filesystem::path& path, const std::vector<char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out)
        throw IoError("write failed for " + path.string());
}

inline std::vector<char> encode(const SpectralVolume& v) {
    Writer w;
    w.magic("MSV1");
    w.u32(v.dims().nx);
    w.u32(v.dims().ny);
    w.u32(v.dims().nz);
    w.u32(std::uint32_t(v.channels()));
    for (float s : v.voxel_size())
        w.f32(s);
    w.f32s(v.energy().centers());
    w.f32s(v.data());
    return w.bytes();
}

} // namespace detail

inline SpectralVolume decode_volume(std::vector<char> bytes, const std::string& origin = "<memory>") {
    detail::Reader r(std::move(bytes), origin);
    r.expect_magic("MSV1");
    Dims d{r.header_u32(), r.header_u32(), r.header_u32()};
    const std::uint32_t ne = r.header_u32();
    if (!d.positive() || ne == 0)
        throw FormatError(origin + ": zero extent in header (" + to_string(d) + ", ne=" + std::to_string(ne) + ")");
    std::array<float, 3> voxel{r.header_f32(), r.header_f32(), r.header_f32()};
    std::vector<float> centers(ne);
    for (auto& c : centers)
        c = r.header_f32();
    EnergyAxis axis(std::move(centers));
    auto payload = r.payload<float>(std::uint64_t(d.voxels()) * ne);
    return SpectralVolume(d, std::move(axis), std::move(payload), voxel);
}

inline SpectralVolume load_volume(const std::filesystem::path& path) {
    return decode_volume(detail::read_file(path), path.string());
}

inline void save_volume(const SpectralVolume& v, const std::filesystem::path& path) {
    detail::write_file(path, detail::encode(v));
}

inline LabelVolume load_labels(const std::filesystem::path& path) {
    detail::Reader r(detail::read_file(path), path.string());
    r.expect_magic("MSL1");
    Dims d{r.header_u32(), r.header_u32(), r.header_u32()};
    if (!d.positive())
        throw FormatError(path.string() + ": zero extent in header");
    return LabelVolume(d, r.payload<std::uint32_t>(d.voxels()));
}

inline void save_labels(const LabelVolume& l, const std::filesystem::path& path) {
    detail::Writer w;
    w.magic("MSL1");
    w.u32(l.dims().nx);
    w.u32(l.dims().ny);
    w.u32(l.dims().nz);
    w.u32s(l.labels());
    detail::write_file(path, w.bytes());
}

inline Sinogram load_sinogram(const std::filesystem::path& path) {
    detail::Reader r(detail::read_file(path), path.string());
    r.expect_magic("MSS1");
    const std::uint32_t na = r.header_u32(), nd = r.header_u32(), ne = r.header_u32();
    if (na == 0 || nd == 0 || ne == 0)
        throw FormatError(path.string() + ": zero extent in header");
    std::vector<float> centers(ne);
    for (auto& c : centers)
        c = r.header_f32();
    Sinogram s;
    s.n_angles = na;
    s.n_detectors = nd;
    s.energy = EnergyAxis(std::move(centers));
    s.data = r.payload<float>(std::uint64_t(na) * nd * ne);
    for (std::size_t i = 0; i < s.data.size(); ++i)
        if (!std::isfinite(s.data[i]))
            throw ValidationError(path.string() + ": non-finite value at payload index " + std::to_string(i));
    return s;
}

inline void save_sinogram(const Sinogram& s, const std::filesystem::path& path) {
    s.validate();
    detail::Writer w;
    w.magic("MSS1");
    w.u32(s.n_angles);
    w.u32(s.n_detectors);
    w.u32(std::uint32_t(s.channels()));
    w.f32s(s.energy.centers());
    w.f32s(s.data);
    detail::write_file(path, w.bytes());
}

// Binary PPM (P6).
inline void save_ppm(const RgbImage& img, const std::filesystem::path& path) {
    std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<char> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), img.pixels.begin(), img.pixels.end());
    detail::write_file(path, bytes);
}

// 64-bit FNV-1a over the serialized MSV container, as 16 hex digits.
inline std::string volume_digest(const SpectralVolume& v) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : detail::encode(v)) {
        h ^= std::uint8_t(c);
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

} // namespace msct
