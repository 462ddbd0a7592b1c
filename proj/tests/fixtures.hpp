#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "msct/volume.hpp"

namespace fixtures {

// Uniform integer values in [0, max_value] on a linear 20..160 keV axis.
inline msct::SpectralVolume random_int_volume(std::mt19937_64& rng, msct::Dims dims, std::size_t channels,
                                              int max_value) {
    std::uniform_int_distribution<int> value(0, max_value);
    std::vector<float> data(dims.voxels() * channels);
    for (auto& x : data)
        x = float(value(rng));
    return msct::SpectralVolume(dims, msct::EnergyAxis::linear(20.0f, 160.0f, channels), std::move(data));
}

inline msct::SpectralVolume random_volume(std::mt19937_64& rng, msct::Dims dims, std::size_t channels) {
    std::normal_distribution<float> value(0.5f, 0.2f);
    std::vector<float> data(dims.voxels() * channels);
    for (auto& x : data)
        x = value(rng);
    return msct::SpectralVolume(dims, msct::EnergyAxis::linear(20.0f, 160.0f, channels), std::move(data));
}

// Every voxel holds the same per-channel value.
inline msct::SpectralVolume constant_volume(msct::Dims dims, std::vector<float> per_channel) {
    std::vector<float> data;
    for (float v : per_channel)
        data.insert(data.end(), dims.voxels(), v);
    return msct::SpectralVolume(dims, msct::EnergyAxis::linear(40.0f, 100.0f, per_channel.size()), std::move(data));
}

// One channel with explicit voxel values.
inline msct::SpectralVolume single_channel(msct::Dims dims, std::vector<float> values) {
    return msct::SpectralVolume(dims, msct::EnergyAxis({60.0f}), std::move(values));
}

inline std::filesystem::path temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "msct_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace fixtures
