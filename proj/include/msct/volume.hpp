#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "msct/error.hpp"

namespace msct {

// Spatial grid extent. nz == 1 is the 2-D case; every algorithm treats it as
// a degenerate 3-D grid.
struct Dims {
    std::uint32_t nx = 0;
    std::uint32_t ny = 0;
    std::uint32_t nz = 0;

    std::size_t voxels() const { return std::size_t(nx) * ny * nz; }
    std::size_t index(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
        return x + std::size_t(nx) * (y + std::size_t(ny) * z);
    }
    bool positive() const { return nx > 0 && ny > 0 && nz > 0; }

    friend bool operator==(const Dims&, const Dims&) = default;
};

inline std::string to_string(const Dims& d) {
    return std::to_string(d.nx) + "x" + std::to_string(d.ny) + "x" + std::to_string(d.nz);
}

// Ordered energy-bin centers in keV.
class EnergyAxis {
public:
    EnergyAxis() = default;
    explicit EnergyAxis(std::vector<float> centers) : centers_(std::move(centers)) {
        if (centers_.empty())
            throw ValidationError("energy axis must contain at least one bin");
        for (std::size_t i = 0; i < centers_.size(); ++i) {
            if (!std::isfinite(centers_[i]) || centers_[i] <= 0.0f)
                throw ValidationError("energy bin " + std::to_string(i) + " is not a positive finite keV value");
            if (i > 0 && !(centers_[i] > centers_[i - 1]))
                throw ValidationError("energy bin centers must be strictly increasing (bin " + std::to_string(i) + ")");
        }
    }

    // count bins with centers evenly spaced over [lo, hi] (inclusive).
    static EnergyAxis linear(float lo, float hi, std::size_t count) {
        if (count == 0)
            throw DomainError("energy axis needs at least one bin");
        std::vector<float> c(count);
        for (std::size_t i = 0; i < count; ++i)
            c[i] = count == 1 ? lo : float(lo + (double(hi) - lo) * double(i) / double(count - 1));
        return EnergyAxis(std::move(c));
    }

    std::size_t count() const { return centers_.size(); }
    float operator[](std::size_t e) const { return centers_[e]; }
    std::span<const float> centers() const { return centers_; }

    friend bool operator==(const EnergyAxis&, const EnergyAxis&) = default;

private:
    std::vector<float> centers_;
};

// X x Y x Z x E field of linear attenuation coefficients (1/cm).
// Storage is x-fastest, then y, z, energy slowest, so each channel is one
// contiguous block. Immutable after construction.
class SpectralVolume {
public:
    SpectralVolume() = default;
    SpectralVolume(Dims dims, EnergyAxis energy, std::vector<float> data,
                   std::array<float, 3> voxel_size = {1.0f, 1.0f, 1.0f})
        : dims_(dims), energy_(std::move(energy)), data_(std::move(data)), voxel_size_(voxel_size) {
        if (!dims_.positive())
            throw ValidationError("volume dims must be positive, got " + to_string(dims_));
        if (data_.size() != dims_.voxels() * energy_.count())
            throw ValidationError("payload holds " + std::to_string(data_.size()) + " values, expected " +
                                  std::to_string(dims_.voxels() * energy_.count()));
        for (std::size_t i = 0; i < data_.size(); ++i)
            if (!std::isfinite(data_[i]))
                throw ValidationError("non-finite value at payload index " + std::to_string(i));
    }

    const Dims& dims() const { return dims_; }
    const EnergyAxis& energy() const { return energy_; }
    std::size_t channels() const { return energy_.count(); }
    std::size_t voxels() const { return dims_.voxels(); }
    const std::array<float, 3>& voxel_size() const { return voxel_size_; }

    std::span<const float> data() const { return data_; }
    std::span<const float> channel(std::size_t e) const {
        return std::span<const float>(data_).subspan(e * voxels(), voxels());
    }
    float at(std::size_t voxel, std::size_t e) const { return data_[e * voxels() + voxel]; }

    friend bool operator==(const SpectralVolume&, const SpectralVolume&) = default;

private:
    Dims dims_{};
    EnergyAxis energy_;
    std::vector<float> data_;
    std::array<float, 3> voxel_size_{1.0f, 1.0f, 1.0f};
};

// Integer segment-ID field; 0 is background.
class LabelVolume {
public:
    LabelVolume() = default;
    LabelVolume(Dims dims, std::vector<std::uint32_t> labels) : dims_(dims), labels_(std::move(labels)) {
        if (labels_.size() != dims_.voxels())
            throw ValidationError("label payload holds " + std::to_string(labels_.size()) + " values, expected " +
                                  std::to_string(dims_.voxels()));
    }
    explicit LabelVolume(Dims dims) : dims_(dims), labels_(dims.voxels(), 0u) {}

    const Dims& dims() const { return dims_; }
    std::size_t voxels() const { return labels_.size(); }
    std::span<const std::uint32_t> labels() const { return labels_; }
    std::uint32_t operator[](std::size_t i) const { return labels_[i]; }

    std::uint32_t max_label() const {
        return labels_.empty() ? 0u : *std::max_element(labels_.begin(), labels_.end());
    }

    friend bool operator==(const LabelVolume&, const LabelVolume&) = default;

private:
    Dims dims_{};
    std::vector<std::uint32_t> labels_;
};

// Renumbers nonzero labels to 1..n by first occurrence in storage order.
inline LabelVolume canonicalize_labels(const LabelVolume& in) {
    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    std::vector<std::uint32_t> out(in.voxels());
    std::uint32_t next = 1;
    for (std::size_t i = 0; i < in.voxels(); ++i) {
        const std::uint32_t l = in[i];
        if (l == 0) {
            out[i] = 0;
            continue;
        }
        auto [it, inserted] = remap.try_emplace(l, next);
        if (inserted)
            ++next;
        out[i] = it->second;
    }
    return LabelVolume(in.dims(), std::move(out));
}

inline std::size_t count_segments(const LabelVolume& l) {
    std::vector<std::uint32_t> ids;
    for (auto v : l.labels())
        if (v != 0)
            ids.push_back(v);
    std::sort(ids.begin(), ids.end());
    return std::size_t(std::unique(ids.begin(), ids.end()) - ids.begin());
}

struct RgbImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> pixels; // interleaved RGB, row-major
};

// Three energy channels of one slice, each min-max stretched to 0..255.
// A flat channel (min == max) maps to 0.
inline RgbImage rgb_composite(const SpectralVolume& v, std::array<std::size_t, 3> channels, std::uint32_t z) {
    const Dims& d = v.dims();
    if (z >= d.nz)
        throw BoundsError("slice " + std::to_string(z) + " out of range (nz=" + std::to_string(d.nz) + ")");
    for (auto c : channels)
        if (c >= v.channels())
            throw BoundsError("channel " + std::to_string(c) + " out of range (" + std::to_string(v.channels()) +
                              " channels)");

    RgbImage img{d.nx, d.ny, std::vector<std::uint8_t>(std::size_t(d.nx) * d.ny * 3)};
    const std::size_t slice = std::size_t(d.nx) * d.ny;
    for (std::size_t k = 0; k < 3; ++k) {
        auto plane = v.channel(channels[k]).subspan(z * slice, slice);
        auto [lo, hi] = std::minmax_element(plane.begin(), plane.end());
        const double range = double(*hi) - double(*lo);
        for (std::size_t i = 0; i < slice; ++i) {
            double t = range > 0.0 ? (double(plane[i]) - *lo) / range : 0.0;
            img.pixels[i * 3 + k] = static_cast<std::uint8_t>(std::lround(t * 255.0));
        }
    }
    return img;
}

} // namespace msct
