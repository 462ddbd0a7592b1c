#pragma once

// Unseeded graph segmentation of multi-channel voxel grids, after
// Felzenszwalb & Huttenlocher: Kruskal-order merging under the adaptive
// threshold MInt = min(Int(Ci) + k/|Ci|, Int(Cj) + k/|Cj|), followed by
// absorption of components smaller than min_size.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "msct/disjoint_set.hpp"
#include "msct/error.hpp"
#include "msct/io.hpp"
#include "msct/segmentation.hpp"
#include "msct/volume.hpp"

namespace msct {

enum class NeighborhoodKind { N7, N27, N27Weighted };

struct Neighborhood {
    NeighborhoodKind kind = NeighborhoodKind::N27;
    double sigma = 1.0; // N27Weighted only

    static Neighborhood parse(const std::string& name, double sigma = 1.0) {
        if (name == "n7")
            return {NeighborhoodKind::N7, sigma};
        if (name == "n27")
            return {NeighborhoodKind::N27, sigma};
        if (name == "n27w")
            return {NeighborhoodKind::N27Weighted, sigma};
        throw ValidationError("unknown neighborhood '" + name + "' (expected n7, n27 or n27w)");
    }
    std::string name() const {
        switch (kind) {
        case NeighborhoodKind::N7:
            return "n7";
        case NeighborhoodKind::N27:
            return "n27";
        default:
            return "n27w";
        }
    }
};

struct GraphCutParams {
    double k = 3.0;
    std::uint32_t min_size = 625;
    Neighborhood neighborhood{};

    void validate() const {
        if (!(k > 0.0) || !std::isfinite(k))
            throw ValidationError("graph cut k must be a positive finite value");
        if (min_size < 1)
            throw ValidationError("graph cut min_size must be >= 1");
        if (neighborhood.kind == NeighborhoodKind::N27Weighted && !(neighborhood.sigma > 0.0))
            throw ValidationError("weighted neighborhood sigma must be positive");
    }

    nlohmann::json to_json() const {
        return {{"k", k}, {"min_size", min_size}, {"neighborhood", neighborhood.name()}, {"sigma", neighborhood.sigma}};
    }
};

// Undirected edge between voxel indices a < b.
struct Edge {
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    double w = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

using EdgeList = std::vector<Edge>;

// Ascending by (weight, smaller index, larger index).
inline void sort_edges(EdgeList& edges) {
    std::sort(edges.begin(), edges.end(),
              [](const Edge& l, const Edge& r) { return std::tie(l.w, l.a, l.b) < std::tie(r.w, r.a, r.b); });
}

namespace detail {

struct Offset {
    int dx, dy, dz;
    int squared_length() const { return dx * dx + dy * dy + dz * dz; }
};

// Half of the neighborhood: offsets whose first nonzero of (dz, dy, dx) is
// positive, so each unordered pair is produced once.
inline std::vector<Offset> forward_offsets(NeighborhoodKind kind) {
    std::vector<Offset> out;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const bool forward = dz > 0 || (dz == 0 && dy > 0) || (dz == 0 && dy == 0 && dx > 0);
                if (!forward)
                    continue;
                Offset o{dx, dy, dz};
                if (kind == NeighborhoodKind::N7 && o.squared_length() != 1)
                    continue;
                out.push_back(o);
            }
    return out;
}

} // namespace detail

// Divisor applied to diagonal dissimilarities in the weighted neighborhood;
// 1 for face neighbors, falling off with the squared offset length.
inline double neighbor_falloff(int squared_length, double sigma) {
    return std::exp(-(double(squared_length) - 1.0) / (2.0 * sigma * sigma));
}

// One edge per adjacent voxel pair, weighted by the mean absolute per-channel
// difference (divided by the falloff for the weighted neighborhood).
inline EdgeList build_edges(const SpectralVolume& v, const Neighborhood& n) {
    const Dims& d = v.dims();
    const std::size_t ne = v.channels();
    const auto offsets = detail::forward_offsets(n.kind);
    std::array<double, 4> divisor{1.0, 1.0, 1.0, 1.0};
    if (n.kind == NeighborhoodKind::N27Weighted)
        for (int s = 1; s <= 3; ++s)
            divisor[s] = neighbor_falloff(s, n.sigma);

    EdgeList edges;
    edges.reserve(d.voxels() * offsets.size());
    for (std::uint32_t z = 0; z < d.nz; ++z)
        for (std::uint32_t y = 0; y < d.ny; ++y)
            for (std::uint32_t x = 0; x < d.nx; ++x) {
                const std::size_t i = d.index(x, y, z);
                for (const auto& o : offsets) {
                    const long nx = long(x) + o.dx, ny = long(y) + o.dy, nz = long(z) + o.dz;
                    if (nx < 0 || ny < 0 || nz < 0 || nx >= long(d.nx) || ny >= long(d.ny) || nz >= long(d.nz))
                        continue;
                    const std::size_t j = d.index(std::uint32_t(nx), std::uint32_t(ny), std::uint32_t(nz));
                    double sum = 0.0;
                    for (std::size_t e = 0; e < ne; ++e)
                        sum += std::abs(double(v.at(j, e)) - double(v.at(i, e)));
                    const double w = (sum / double(ne)) / divisor[o.squared_length()];
                    edges.push_back({std::uint32_t(std::min(i, j)), std::uint32_t(std::max(i, j)), w});
                }
            }
    return edges;
}

// Absorbs every segment smaller than min_size into a neighbor. Edges between
// distinct segments are visited by ascending (weight, smaller label, larger
// label, voxel pair); an edge merges when either side is still undersized.
// Label 0 takes no part.
inline LabelVolume merge_small(const LabelVolume& labels, const EdgeList& edges, std::uint32_t min_size) {
    if (min_size <= 1)
        return labels;
    const std::uint32_t n_labels = labels.max_label() + 1;

    struct Candidate {
        double w;
        std::uint32_t la, lb, a, b;
    };
    std::vector<Candidate> cand;
    for (const Edge& e : edges) {
        std::uint32_t la = labels[e.a], lb = labels[e.b];
        if (la == lb || la == 0 || lb == 0)
            continue;
        cand.push_back({e.w, std::min(la, lb), std::max(la, lb), e.a, e.b});
    }
    std::sort(cand.begin(), cand.end(), [](const Candidate& l, const Candidate& r) {
        return std::tie(l.w, l.la, l.lb, l.a, l.b) < std::tie(r.w, r.la, r.lb, r.a, r.b);
    });

    std::vector<std::size_t> size(n_labels, 0);
    for (auto l : labels.labels())
        ++size[l];
    DisjointSet<std::uint32_t> sets(n_labels);
    std::vector<std::size_t> set_size = size;
    for (const auto& c : cand) {
        const auto ra = sets.find(c.la), rb = sets.find(c.lb);
        if (ra == rb || (set_size[ra] >= min_size && set_size[rb] >= min_size))
            continue;
        const auto root = sets.join(ra, rb);
        set_size[root] = set_size[ra] + set_size[rb];
    }

    std::vector<std::uint32_t> out(labels.voxels());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = labels[i] == 0 ? 0u : sets.find(labels[i]) + 1;
    return canonicalize_labels(LabelVolume(labels.dims(), std::move(out)));
}

struct FhTrace {
    LabelVolume before_merge; // canonical labels after the threshold pass
    std::vector<double> internal; // Int(C) per canonical label (index 0 unused)
};

// Threshold pass only, on pre-sorted edges; also reports Int of each final
// component so callers can audit the boundary predicate.
inline FhTrace fh_threshold_pass(const Dims& dims, const EdgeList& sorted, double k) {
    const std::size_t n = dims.voxels();
    DisjointSet<std::uint32_t> sets(n);
    std::vector<double> internal(n, 0.0);
    std::vector<double> threshold(n, k);
    for (const Edge& e : sorted) {
        auto a = sets.find(e.a), b = sets.find(e.b);
        if (a == b || e.w > threshold[a] || e.w > threshold[b])
            continue;
        const auto root = sets.join(a, b);
        internal[root] = e.w;
        threshold[root] = e.w + k / double(sets.size(root));
    }
    std::vector<std::uint32_t> roots(n);
    for (std::size_t i = 0; i < n; ++i)
        roots[i] = sets.find(std::uint32_t(i)) + 1;
    LabelVolume canon = canonicalize_labels(LabelVolume(dims, std::move(roots)));
    std::vector<double> int_by_label(canon.max_label() + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        int_by_label[canon[i]] = internal[sets.find(std::uint32_t(i))];
    return {std::move(canon), std::move(int_by_label)};
}

inline Segmentation segment_fh(const SpectralVolume& v, const GraphCutParams& p) {
    p.validate();
    if (v.voxels() == 0)
        throw DomainError("cannot segment an empty volume");
    EdgeList edges = build_edges(v, p.neighborhood);
    sort_edges(edges);
    FhTrace trace = fh_threshold_pass(v.dims(), edges, p.k);
    Segmentation seg;
    seg.labels = merge_small(trace.before_merge, edges, p.min_size);
    seg.algorithm = Algorithm::GraphCut;
    seg.params = p.to_json();
    seg.source_digest = volume_digest(v);
    return seg;
}

} // namespace msct
