#pragma once

// Naive graph-segmentation reference: explicit label arrays instead of
// union-find, and Int(C) recomputed from scratch as the largest edge of a
// Kruskal MST over the component's induced subgraph every time it is needed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "msct/volume.hpp"

namespace oracle {

struct RefEdge {
    std::size_t a, b;
    double w;
};

// All neighbor pairs by brute force over the full 3x3x3 stencil.
inline std::vector<RefEdge> all_edges(const msct::SpectralVolume& v, bool faces_only) {
    const auto& d = v.dims();
    std::vector<RefEdge> out;
    for (long z = 0; z < d.nz; ++z)
        for (long y = 0; y < d.ny; ++y)
            for (long x = 0; x < d.nx; ++x)
                for (long dz = -1; dz <= 1; ++dz)
                    for (long dy = -1; dy <= 1; ++dy)
                        for (long dx = -1; dx <= 1; ++dx) {
                            const long s = dx * dx + dy * dy + dz * dz;
                            if (s == 0 || (faces_only && s != 1))
                                continue;
                            const long X = x + dx, Y = y + dy, Z = z + dz;
                            if (X < 0 || Y < 0 || Z < 0 || X >= long(d.nx) || Y >= long(d.ny) || Z >= long(d.nz))
                                continue;
                            const std::size_t i = d.index(x, y, z), j = d.index(X, Y, Z);
                            if (i >= j)
                                continue;
                            double sum = 0.0;
                            for (std::size_t e = 0; e < v.channels(); ++e)
                                sum += std::abs(double(v.at(j, e)) - double(v.at(i, e)));
                            out.push_back({i, j, sum / double(v.channels())});
                        }
    std::sort(out.begin(), out.end(),
              [](const RefEdge& l, const RefEdge& r) { return std::tie(l.w, l.a, l.b) < std::tie(r.w, r.a, r.b); });
    return out;
}

inline double internal_difference(const std::vector<std::size_t>& comp, std::size_t c,
                                  const std::vector<RefEdge>& sorted) {
    // Kruskal restricted to the component, tracked with a plain label array.
    std::vector<std::size_t> tree(comp.size());
    for (std::size_t i = 0; i < tree.size(); ++i)
        tree[i] = i;
    double largest = 0.0;
    for (const auto& e : sorted) {
        if (comp[e.a] != c || comp[e.b] != c || tree[e.a] == tree[e.b])
            continue;
        largest = std::max(largest, e.w);
        const std::size_t from = tree[e.b], to = tree[e.a];
        for (auto& t : tree)
            if (t == from)
                t = to;
    }
    return largest;
}

inline std::vector<std::uint32_t> canonical(const std::vector<std::size_t>& comp) {
    std::map<std::size_t, std::uint32_t> ids;
    std::vector<std::uint32_t> out(comp.size());
    for (std::size_t i = 0; i < comp.size(); ++i) {
        auto it = ids.find(comp[i]);
        if (it == ids.end())
            it = ids.emplace(comp[i], std::uint32_t(ids.size() + 1)).first;
        out[i] = it->second;
    }
    return out;
}

inline std::vector<std::uint32_t> segment(const msct::SpectralVolume& v, double k, std::size_t min_size,
                                          bool faces_only) {
    const auto edges = all_edges(v, faces_only);
    const std::size_t n = v.voxels();
    std::vector<std::size_t> comp(n);
    for (std::size_t i = 0; i < n; ++i)
        comp[i] = i;
    auto size_of = [&](std::size_t c) { return std::size_t(std::count(comp.begin(), comp.end(), c)); };

    for (const auto& e : edges) {
        const std::size_t ci = comp[e.a], cj = comp[e.b];
        if (ci == cj)
            continue;
        const double ti = internal_difference(comp, ci, edges) + k / double(size_of(ci));
        const double tj = internal_difference(comp, cj, edges) + k / double(size_of(cj));
        if (e.w > std::min(ti, tj))
            continue;
        for (auto& c : comp)
            if (c == cj)
                c = ci;
    }

    // Small-component absorption: repeatedly take the globally smallest
    // (weight, label pair, voxel pair) crossing edge with an undersized side.
    const auto labels = canonical(comp);
    for (;;) {
        const RefEdge* best = nullptr;
        std::tuple<double, std::uint32_t, std::uint32_t, std::size_t, std::size_t> best_key;
        for (const auto& e : edges) {
            if (comp[e.a] == comp[e.b])
                continue;
            if (size_of(comp[e.a]) >= min_size && size_of(comp[e.b]) >= min_size)
                continue;
            auto key = std::make_tuple(e.w, std::min(labels[e.a], labels[e.b]), std::max(labels[e.a], labels[e.b]),
                                       e.a, e.b);
            if (!best || key < best_key) {
                best = &e;
                best_key = key;
            }
        }
        if (!best)
            break;
        const std::size_t from = comp[best->b], to = comp[best->a];
        for (auto& c : comp)
            if (c == from)
                c = to;
    }
    return canonical(comp);
}

} // namespace oracle
