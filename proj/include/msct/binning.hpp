#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "msct/error.hpp"
#include "msct/volume.hpp"

namespace msct {

// Contiguous partition of input channels into output bins.
struct BinningPlan {
    std::vector<std::pair<std::size_t, std::size_t>> groups; // inclusive [first, last]
    double budget = 0.0;
    std::vector<double> per_group_variance;
    std::vector<double> channel_variance;

    nlohmann::json to_json() const {
        nlohmann::json groups_json = nlohmann::json::array();
        for (auto [lo, hi] : groups)
            groups_json.push_back({lo, hi});
        return {{"budget", budget},
                {"groups", groups_json},
                {"variances", per_group_variance},
                {"channel_variances", channel_variance}};
    }
};

// Keeps the channels whose centers lie in [lo_kev, hi_kev].
inline SpectralVolume clip_spectrum(const SpectralVolume& v, float lo_kev, float hi_kev) {
    if (!(lo_kev < hi_kev))
        throw DomainError("clip range must satisfy lo < hi");
    std::vector<float> centers;
    std::vector<float> data;
    for (std::size_t e = 0; e < v.channels(); ++e) {
        const float c = v.energy()[e];
        if (c < lo_kev || c > hi_kev)
            continue;
        centers.push_back(c);
        auto ch = v.channel(e);
        data.insert(data.end(), ch.begin(), ch.end());
    }
    if (centers.empty())
        throw DomainError("no energy bin lies within [" + std::to_string(lo_kev) + ", " + std::to_string(hi_kev) +
                          "] keV");
    return SpectralVolume(v.dims(), EnergyAxis(std::move(centers)), std::move(data), v.voxel_size());
}

// Population variance of every channel over all voxels (background included).
inline std::vector<double> channel_variance(const SpectralVolume& v) {
    std::vector<double> out(v.channels());
    for (std::size_t e = 0; e < v.channels(); ++e) {
        // Welford
        double mean = 0.0, m2 = 0.0;
        std::size_t n = 0;
        for (float x : v.channel(e)) {
            ++n;
            const double delta = x - mean;
            mean += delta / double(n);
            m2 += delta * (x - mean);
        }
        out[e] = n > 0 ? std::max(0.0, m2 / double(n)) : 0.0;
    }
    return out;
}

// Averages each group of channels into one output channel; the output bin
// center is the mean of the member centers.
inline SpectralVolume apply_groups(const SpectralVolume& v,
                                   std::span<const std::pair<std::size_t, std::size_t>> groups) {
    const std::size_t nv = v.voxels();
    std::vector<float> data(nv * groups.size());
    std::vector<float> centers(groups.size());
    std::vector<double> acc(nv);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        auto [lo, hi] = groups[g];
        const double n = double(hi - lo + 1);
        std::fill(acc.begin(), acc.end(), 0.0);
        double center = 0.0;
        for (std::size_t e = lo; e <= hi; ++e) {
            auto ch = v.channel(e);
            for (std::size_t i = 0; i < nv; ++i)
                acc[i] += ch[i];
            center += v.energy()[e];
        }
        for (std::size_t i = 0; i < nv; ++i)
            data[g * nv + i] = float(acc[i] / n);
        centers[g] = float(center / n);
    }
    return SpectralVolume(v.dims(), EnergyAxis(std::move(centers)), std::move(data), v.voxel_size());
}

// n_out nearly equal contiguous groups; the first (count % n_out) groups get
// one extra channel.
inline std::vector<std::pair<std::size_t, std::size_t>> uniform_groups(std::size_t count, std::size_t n_out) {
    if (n_out == 0)
        throw DomainError("number of output bins must be positive");
    if (n_out > count)
        throw DomainError("cannot rebin " + std::to_string(count) + " channels into " + std::to_string(n_out) +
                          " bins");
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    const std::size_t base = count / n_out, extra = count % n_out;
    std::size_t lo = 0;
    for (std::size_t g = 0; g < n_out; ++g) {
        const std::size_t size = base + (g < extra ? 1 : 0);
        groups.emplace_back(lo, lo + size - 1);
        lo += size;
    }
    return groups;
}

inline SpectralVolume uniform_rebin(const SpectralVolume& v, std::size_t n_out) {
    return apply_groups(v, uniform_groups(v.channels(), n_out));
}

// Relative slack on the budget comparison so that sums of equal variances
// that equal the budget analytically are not split by rounding.
inline constexpr double kBudgetSlack = 1e-9;

// Greedy low-to-high accumulation under a per-bin variance budget of
// (sum of channel variances) / n_out. A channel that would overflow the open
// group starts a new one; a lone channel above budget is kept as a singleton.
// The number of groups produced may differ from n_out.
inline BinningPlan plan_adaptive(std::span<const double> variances, std::size_t n_out) {
    if (n_out == 0)
        throw DomainError("number of output bins must be positive");
    if (n_out > variances.size())
        throw DomainError("cannot rebin " + std::to_string(variances.size()) + " channels into " +
                          std::to_string(n_out) + " bins");
    BinningPlan plan;
    plan.channel_variance.assign(variances.begin(), variances.end());
    double total = 0.0;
    for (double s : variances)
        total += s;
    plan.budget = total / double(n_out);
    const double limit = plan.budget * (1.0 + kBudgetSlack);

    std::size_t first = 0;
    double sum = 0.0;
    for (std::size_t e = 0; e < variances.size(); ++e) {
        if (e > first && sum + variances[e] > limit) {
            plan.groups.emplace_back(first, e - 1);
            plan.per_group_variance.push_back(sum);
            first = e;
            sum = 0.0;
        }
        sum += variances[e];
    }
    plan.groups.emplace_back(first, variances.size() - 1);
    plan.per_group_variance.push_back(sum);
    return plan;
}

inline std::pair<SpectralVolume, BinningPlan> adaptive_rebin(const SpectralVolume& v, std::size_t n_out) {
    const auto variances = channel_variance(v);
    BinningPlan plan = plan_adaptive(variances, n_out);
    return {apply_groups(v, plan.groups), std::move(plan)};
}

// Finite difference along energy, per keV, at the bin midpoints.
inline SpectralVolume spectral_gradient(const SpectralVolume& v) {
    if (v.channels() < 2)
        throw DomainError("spectral gradient needs at least two channels");
    const std::size_t nv = v.voxels();
    const std::size_t ne = v.channels() - 1;
    std::vector<float> data(nv * ne);
    std::vector<float> centers(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const double de = double(v.energy()[e + 1]) - double(v.energy()[e]);
        auto a = v.channel(e), b = v.channel(e + 1);
        for (std::size_t i = 0; i < nv; ++i)
            data[e * nv + i] = float((double(b[i]) - double(a[i])) / de);
        centers[e] = float(0.5 * (double(v.energy()[e]) + double(v.energy()[e + 1])));
    }
    return SpectralVolume(v.dims(), EnergyAxis(std::move(centers)), std::move(data), v.voxel_size());
}

} // namespace msct
