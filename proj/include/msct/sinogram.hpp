#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msct/error.hpp"
#include "msct/volume.hpp"

namespace msct {

// Per-energy stack of parallel-beam projections. Storage is detector-fastest,
// then angle, energy slowest.
struct Sinogram {
    std::uint32_t n_angles = 0;
    std::uint32_t n_detectors = 0;
    EnergyAxis energy;
    std::vector<float> data;

    Sinogram() = default;
    Sinogram(std::uint32_t angles, std::uint32_t detectors, EnergyAxis axis)
        : n_angles(angles), n_detectors(detectors), energy(std::move(axis)),
          data(std::size_t(angles) * detectors * energy.count(), 0.0f) {}

    std::size_t rays() const { return std::size_t(n_angles) * n_detectors; }
    std::size_t channels() const { return energy.count(); }

    std::span<float> channel(std::size_t e) { return std::span<float>(data).subspan(e * rays(), rays()); }
    std::span<const float> channel(std::size_t e) const {
        return std::span<const float>(data).subspan(e * rays(), rays());
    }

    void validate() const {
        if (n_angles == 0 || n_detectors == 0)
            throw ValidationError("sinogram needs at least one angle and one detector");
        if (data.size() != rays() * channels())
            throw ValidationError("sinogram payload size mismatch");
    }

    friend bool operator==(const Sinogram&, const Sinogram&) = default;
};

} // namespace msct
