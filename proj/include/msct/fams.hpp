#pragma once

// Fast adaptive mean shift over voxel spectral signatures.
//
// Points are quantized onto an integer lattice, every point gets a pilot
// bandwidth h_i (L1 distance to its k-th nearest neighbor), and each point is
// moved by the variable-bandwidth mean shift
//
//   y <- sum_i w_i x_i / sum_i w_i,   w_i = 1 / h_i^(d+2)  over ||y - x_i|| < h_i
//
// (flat g, i.e. the shadow of the Epanechnikov profile) until the step is
// below epsilon. Neighbor queries are exact or go through an LSH index built
// from L tables of K random axis-parallel cuts. Identical points share one
// trajectory.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "msct/binning.hpp"
#include "msct/disjoint_set.hpp"
#include "msct/error.hpp"
#include "msct/io.hpp"
#include "msct/parallel.hpp"
#include "msct/segmentation.hpp"
#include "msct/volume.hpp"

namespace msct {

enum class NeighborSearch { Auto, Exact, Lsh };

struct FamsParams {
    std::uint32_t k_neigh = 100;
    std::uint32_t hash_cuts = 24;   // K
    std::uint32_t hash_tables = 35; // L
    std::uint32_t quant_bits = 16;
    std::uint32_t max_iters = 100;
    double epsilon = 1.0;                    // quantized units, L1
    std::optional<double> mode_merge_radius; // quantized units, L1; default 1% of range per dimension
    std::uint64_t seed = 0;
    NeighborSearch search = NeighborSearch::Auto;
    std::size_t exact_limit = 10000; // Auto switches to LSH above this many distinct points
    unsigned threads = 1;

    void validate() const {
        if (k_neigh < 1 || hash_cuts < 1 || hash_tables < 1 || max_iters < 1)
            throw ValidationError("FAMS counts (k, K, L, max_iters) must be >= 1");
        if (hash_cuts > 64)
            throw ValidationError("FAMS K is limited to 64 cuts per table");
        if (quant_bits < 8 || quant_bits > 24)
            throw ValidationError("FAMS quantization must use 8..24 bits");
        if (!(epsilon > 0.0))
            throw ValidationError("FAMS epsilon must be positive");
        if (mode_merge_radius && !(*mode_merge_radius > 0.0))
            throw ValidationError("FAMS mode merge radius must be positive");
    }

    double merge_radius(std::size_t dims) const {
        if (mode_merge_radius)
            return *mode_merge_radius;
        return 0.01 * double((1u << quant_bits) - 1u) * double(dims);
    }

    nlohmann::json to_json() const {
        nlohmann::json j{{"k", k_neigh},          {"K", hash_cuts},   {"L", hash_tables},
                         {"quant_bits", quant_bits}, {"max_iters", max_iters}, {"epsilon", epsilon},
                         {"seed", seed}};
        j["mode_merge_radius"] = mode_merge_radius ? nlohmann::json(*mode_merge_radius) : nlohmann::json();
        j["search"] = search == NeighborSearch::Exact ? "exact" : search == NeighborSearch::Lsh ? "lsh" : "auto";
        return j;
    }
};

// n x d lattice points with the per-dimension affine map back to values.
struct QuantizedPoints {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<std::uint32_t> values; // row-major
    std::vector<double> offset;        // value = offset + q * step
    std::vector<double> step;
    std::uint32_t bits = 16;

    std::span<const std::uint32_t> point(std::size_t i) const { return {values.data() + i * d, d}; }
    double dequantize(std::size_t dim, double q) const { return offset[dim] + q * step[dim]; }
};

// Maps each dimension's [min, max] onto [0, 2^bits - 1]; constant dimensions
// map to 0.
inline QuantizedPoints quantize(std::span<const double> points, std::size_t d, std::uint32_t bits) {
    if (d == 0 || points.empty() || points.size() % d != 0)
        throw DomainError("quantize needs a non-empty n x d point array");
    if (bits < 1 || bits > 31)
        throw DomainError("quantization bit width out of range");
    QuantizedPoints q;
    q.n = points.size() / d;
    q.d = d;
    q.bits = bits;
    q.values.resize(points.size());
    q.offset.assign(d, 0.0);
    q.step.assign(d, 0.0);
    const double top = double((std::uint64_t(1) << bits) - 1);
    for (std::size_t k = 0; k < d; ++k) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < q.n; ++i) {
            const double x = points[i * d + k];
            if (!std::isfinite(x))
                throw DomainError("quantize: non-finite value at point " + std::to_string(i));
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        q.offset[k] = lo;
        q.step[k] = hi > lo ? (hi - lo) / top : 0.0;
        for (std::size_t i = 0; i < q.n; ++i) {
            const double t = hi > lo ? (points[i * d + k] - lo) / q.step[k] : 0.0;
            q.values[i * d + k] = std::uint32_t(std::clamp(std::llround(t), 0ll, (long long)top));
        }
    }
    return q;
}

namespace detail {

// Distinct lattice points in lexicographic order with multiplicities.
struct UniquePoints {
    std::size_t d = 0;
    std::vector<double> coords; // row-major
    std::vector<std::uint32_t> count;
    std::vector<std::uint32_t> of_point; // original index -> unique index

    std::size_t size() const { return count.size(); }
    const double* at(std::size_t u) const { return coords.data() + u * d; }
};

inline UniquePoints make_unique_points(const QuantizedPoints& q) {
    std::vector<std::uint32_t> order(q.n);
    for (std::uint32_t i = 0; i < q.n; ++i)
        order[i] = i;
    auto less = [&](std::uint32_t a, std::uint32_t b) {
        auto pa = q.point(a), pb = q.point(b);
        return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
    };
    std::stable_sort(order.begin(), order.end(), less);
    UniquePoints u;
    u.d = q.d;
    u.of_point.resize(q.n);
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto i = order[r];
        if (r == 0 || less(order[r - 1], i)) {
            for (auto v : q.point(i))
                u.coords.push_back(double(v));
            u.count.push_back(0);
        }
        ++u.count.back();
        u.of_point[i] = std::uint32_t(u.count.size() - 1);
    }
    return u;
}

inline double l1(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k)
        s += std::abs(a[k] - b[k]);
    return s;
}

inline double sq_l2(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return s;
}

} // namespace detail

// L tables, each hashing a point to the K-bit pattern of which side of K
// random axis-parallel cuts it falls on. Cuts come from a seeded generator
// and the per-dimension data range only, so the index does not depend on
// point order.
class LshIndex {
public:
    LshIndex(const detail::UniquePoints& pts, std::uint32_t cuts, std::uint32_t tables, std::uint64_t seed)
        : d_(pts.d), cuts_(cuts), n_points_(pts.size()) {
        std::vector<double> lo(d_, std::numeric_limits<double>::infinity()), hi(d_, -std::numeric_limits<double>::infinity());
        for (std::size_t u = 0; u < pts.size(); ++u)
            for (std::size_t k = 0; k < d_; ++k) {
                lo[k] = std::min(lo[k], pts.at(u)[k]);
                hi[k] = std::max(hi[k], pts.at(u)[k]);
            }
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pick_dim(0, d_ - 1);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        tables_.resize(tables);
        for (auto& t : tables_) {
            t.dim.resize(cuts);
            t.threshold.resize(cuts);
            for (std::uint32_t c = 0; c < cuts; ++c) {
                t.dim[c] = pick_dim(rng);
                t.threshold[c] = lo[t.dim[c]] + unit(rng) * (hi[t.dim[c]] - lo[t.dim[c]]);
            }
            for (std::size_t u = 0; u < pts.size(); ++u)
                t.buckets[key(t, pts.at(u))].push_back(std::uint32_t(u));
        }
    }

    // Distinct points sharing a bucket with y in any table, ascending.
    std::vector<std::uint32_t> candidates(const double* y) const {
        // Buckets overlap heavily across tables; dedupe with per-thread marks
        // before sorting rather than sorting the concatenation.
        thread_local std::vector<std::uint64_t> mark;
        thread_local std::uint64_t generation = 0;
        if (mark.size() < n_points_)
            mark.resize(n_points_, 0);
        ++generation;
        std::vector<std::uint32_t> out;
        for (const auto& t : tables_) {
            auto it = t.buckets.find(key(t, y));
            if (it == t.buckets.end())
                continue;
            for (auto u : it->second)
                if (mark[u] != generation) {
                    mark[u] = generation;
                    out.push_back(u);
                }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    struct Table {
        std::vector<std::size_t> dim;
        std::vector<double> threshold;
        std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
    };

    std::uint64_t key(const Table& t, const double* y) const {
        std::uint64_t k = 0;
        for (std::uint32_t c = 0; c < cuts_; ++c)
            if (y[t.dim[c]] >= t.threshold[c])
                k |= std::uint64_t(1) << c;
        return k;
    }

    std::size_t d_;
    std::uint32_t cuts_;
    std::size_t n_points_;
    std::vector<Table> tables_;
};

namespace detail {

// L1 distance to the k-th nearest other point among the given candidates
// (multiplicities included, self excluded). nullopt when the candidates hold
// fewer than k other points.
inline std::optional<double> kth_neighbor_distance(const UniquePoints& pts, std::size_t self,
                                                   std::span<const std::uint32_t> cand, std::size_t k) {
    struct Entry {
        double dist;
        std::uint32_t count;
    };
    std::vector<Entry> entries;
    entries.reserve(cand.size());
    std::size_t total = 0;
    for (auto c : cand) {
        const std::uint32_t cnt = c == self ? pts.count[c] - 1 : pts.count[c];
        if (cnt == 0)
            continue;
        entries.push_back({c == self ? 0.0 : l1(pts.at(self), pts.at(c), pts.d), cnt});
        total += cnt;
    }
    if (total < k)
        return std::nullopt;
    // Every entry holds at least one point, so the k-th point lies within the
    // k smallest entries.
    const std::size_t keep = std::min(k, entries.size());
    auto by_dist = [](const Entry& a, const Entry& b) { return a.dist < b.dist; };
    std::nth_element(entries.begin(), entries.begin() + (keep - 1), entries.end(), by_dist);
    std::sort(entries.begin(), entries.begin() + keep, by_dist);
    std::size_t seen = 0;
    for (std::size_t r = 0; r < keep; ++r) {
        seen += entries[r].count;
        if (seen >= k)
            return entries[r].dist;
    }
    return entries[keep - 1].dist;
}

inline bool use_lsh(NeighborSearch s, std::size_t unique_points, std::size_t limit) {
    return s == NeighborSearch::Lsh || (s == NeighborSearch::Auto && unique_points > limit);
}

inline std::vector<double> pilot_unique(const UniquePoints& pts, std::size_t n_points, std::uint32_t k_neigh,
                                        const LshIndex* lsh, unsigned threads) {
    if (k_neigh >= n_points)
        throw DomainError("pilot neighbor count k=" + std::to_string(k_neigh) + " must be below the point count " +
                          std::to_string(n_points));
    std::vector<std::uint32_t> all(pts.size());
    for (std::uint32_t u = 0; u < all.size(); ++u)
        all[u] = u;
    std::vector<double> h(pts.size());
    parallel_for(pts.size(), threads, [&](std::size_t u) {
        std::optional<double> dist;
        if (lsh)
            dist = kth_neighbor_distance(pts, u, lsh->candidates(pts.at(u)), k_neigh);
        if (!dist)
            dist = kth_neighbor_distance(pts, u, all, k_neigh);
        h[u] = std::max(1.0, *dist);
    });
    return h;
}

} // namespace detail

struct PilotOptions {
    NeighborSearch search = NeighborSearch::Auto;
    std::uint32_t hash_cuts = 24;
    std::uint32_t hash_tables = 35;
    std::uint64_t seed = 0;
    std::size_t exact_limit = 10000;
    unsigned threads = 1;
};

// Per-point pilot bandwidth: L1 distance to the k_neigh-th nearest neighbor,
// never below one lattice unit.
inline std::vector<double> pilot_bandwidths(const QuantizedPoints& q, std::uint32_t k_neigh,
                                            const PilotOptions& opt = {}) {
    const auto pts = detail::make_unique_points(q);
    std::optional<LshIndex> lsh;
    if (detail::use_lsh(opt.search, pts.size(), opt.exact_limit))
        lsh.emplace(pts, opt.hash_cuts, opt.hash_tables, opt.seed);
    const auto hu = detail::pilot_unique(pts, q.n, k_neigh, lsh ? &*lsh : nullptr, opt.threads);
    std::vector<double> h(q.n);
    for (std::size_t i = 0; i < q.n; ++i)
        h[i] = hu[pts.of_point[i]];
    return h;
}

// The density model behind the iteration: distinct points, their bandwidths
// and the optional LSH index. Exposed so tests can step and evaluate it.
class MeanShiftKernel {
public:
    MeanShiftKernel(detail::UniquePoints pts, std::vector<double> h, std::optional<LshIndex> lsh)
        : pts_(std::move(pts)), h_(std::move(h)), lsh_(std::move(lsh)) {
        const std::size_t d = pts_.d;
        const double h_min = *std::min_element(h_.begin(), h_.end());
        weight_.resize(h_.size());
        density_weight_.resize(h_.size());
        inv_h2_.resize(h_.size());
        // Weights are relative to the smallest bandwidth to stay in range for
        // many dimensions; both the step and density comparisons are scale-free.
        for (std::size_t u = 0; u < h_.size(); ++u) {
            const double lr = std::log(h_[u]) - std::log(h_min);
            weight_[u] = double(pts_.count[u]) * std::exp(-double(d + 2) * lr);
            density_weight_[u] = double(pts_.count[u]) * std::exp(-double(d) * lr);
            inv_h2_[u] = 1.0 / (h_[u] * h_[u]);
        }
    }

    std::size_t dims() const { return pts_.d; }
    const detail::UniquePoints& points() const { return pts_; }
    std::span<const double> bandwidths() const { return h_; }
    bool approximate() const { return lsh_.has_value(); }

    // One mean-shift step. Returns false when no point's window covers y.
    bool step(std::span<const double> y, std::span<double> next) const {
        const std::size_t d = pts_.d;
        std::vector<double> acc(d, 0.0);
        double wsum = 0.0;
        visit(y.data(), [&](std::uint32_t u) {
            const double r = detail::sq_l2(y.data(), pts_.at(u), d) * inv_h2_[u];
            if (r >= 1.0)
                return;
            wsum += weight_[u];
            for (std::size_t k = 0; k < d; ++k)
                acc[k] += weight_[u] * pts_.at(u)[k];
        });
        if (wsum <= 0.0)
            return false;
        for (std::size_t k = 0; k < d; ++k)
            next[k] = acc[k] / wsum;
        return true;
    }

    // Adaptive Epanechnikov density (unnormalized, same relative scale as the
    // step weights).
    double density(std::span<const double> y) const {
        double f = 0.0;
        visit(y.data(), [&](std::uint32_t u) {
            const double r = detail::sq_l2(y.data(), pts_.at(u), pts_.d) * inv_h2_[u];
            if (r < 1.0)
                f += density_weight_[u] * (1.0 - r);
        });
        return f;
    }

    struct Trajectory {
        std::vector<std::vector<double>> iterates; // start first, mode last
        bool converged = false;
    };

    // Iterates from start until the L1 step is below epsilon. The returned
    // mode is the last iterate, whose next step is known to be < epsilon.
    Trajectory trajectory(std::span<const double> start, double epsilon, std::uint32_t max_iters) const {
        Trajectory t;
        std::vector<double> y(start.begin(), start.end()), next(y.size());
        t.iterates.push_back(y);
        for (std::uint32_t it = 0; it < max_iters; ++it) {
            if (!step(y, next))
                break;
            if (detail::l1(y.data(), next.data(), y.size()) < epsilon) {
                t.converged = true;
                break;
            }
            y = next;
            t.iterates.push_back(y);
        }
        return t;
    }

private:
    template <class Fn>
    void visit(const double* y, Fn&& fn) const {
        if (lsh_) {
            for (auto u : lsh_->candidates(y))
                fn(u);
        } else {
            for (std::uint32_t u = 0; u < pts_.size(); ++u)
                fn(u);
        }
    }

    detail::UniquePoints pts_;
    std::vector<double> h_;
    std::optional<LshIndex> lsh_;
    std::vector<double> weight_;
    std::vector<double> density_weight_;
    std::vector<double> inv_h2_;
};

struct ModeSet {
    std::vector<std::vector<double>> modes;           // original value space
    std::vector<std::vector<double>> modes_quantized; // lattice space
    std::vector<std::uint32_t> assignment;            // per input point
    std::size_t unconverged = 0;                      // trajectories stopped by max_iters
};

inline MeanShiftKernel make_kernel(const QuantizedPoints& q, std::span<const double> h, const FamsParams& p) {
    auto pts = detail::make_unique_points(q);
    if (h.size() != q.n)
        throw DomainError("bandwidth count does not match point count");
    std::vector<double> hu(pts.size());
    for (std::size_t i = 0; i < q.n; ++i)
        hu[pts.of_point[i]] = h[i];
    std::optional<LshIndex> lsh;
    if (detail::use_lsh(p.search, pts.size(), p.exact_limit))
        lsh.emplace(pts, p.hash_cuts, p.hash_tables, p.seed);
    return MeanShiftKernel(std::move(pts), std::move(hu), std::move(lsh));
}

// Runs every distinct point to its mode, then prunes: endpoints are visited
// by decreasing density and join the first kept mode within the L1 merge
// radius, otherwise they become a new mode.
inline ModeSet mean_shift(const MeanShiftKernel& kernel, const QuantizedPoints& q, const FamsParams& p) {
    const auto& pts = kernel.points();
    const std::size_t nu = pts.size(), d = pts.d;
    std::vector<std::vector<double>> endpoint(nu);
    std::vector<double> density(nu);
    std::vector<char> converged(nu);
    parallel_for(nu, p.threads, [&](std::size_t u) {
        auto t = kernel.trajectory({pts.at(u), d}, p.epsilon, p.max_iters);
        endpoint[u] = std::move(t.iterates.back());
        converged[u] = t.converged;
        density[u] = kernel.density(endpoint[u]);
    });

    std::vector<std::uint32_t> order(nu);
    for (std::uint32_t u = 0; u < nu; ++u)
        order[u] = u;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (density[a] != density[b])
            return density[a] > density[b];
        if (endpoint[a] != endpoint[b])
            return endpoint[a] < endpoint[b];
        return a < b;
    });

    const double radius = p.merge_radius(d);
    ModeSet out;
    std::vector<std::uint32_t> mode_of(nu);
    for (auto u : order) {
        std::size_t m = 0;
        for (; m < out.modes_quantized.size(); ++m)
            if (detail::l1(endpoint[u].data(), out.modes_quantized[m].data(), d) < radius)
                break;
        if (m == out.modes_quantized.size())
            out.modes_quantized.push_back(endpoint[u]);
        mode_of[u] = std::uint32_t(m);
    }
    for (const auto& mq : out.modes_quantized) {
        std::vector<double> v(d);
        for (std::size_t k = 0; k < d; ++k)
            v[k] = q.dequantize(k, mq[k]);
        out.modes.push_back(std::move(v));
    }
    out.assignment.resize(q.n);
    for (std::size_t i = 0; i < q.n; ++i)
        out.assignment[i] = mode_of[pts.of_point[i]];
    for (auto c : converged)
        out.unconverged += c ? 0 : 1;
    return out;
}

inline ModeSet mean_shift(const QuantizedPoints& q, std::span<const double> h, const FamsParams& p) {
    p.validate();
    return mean_shift(make_kernel(q, h, p), q, p);
}

// Labels face-connected (6/4-neighbor) runs of equal class; canonical order.
inline LabelVolume connected_components(const Dims& dims, std::span<const std::uint32_t> classes) {
    DisjointSet<std::uint32_t> sets(dims.voxels());
    for (std::uint32_t z = 0; z < dims.nz; ++z)
        for (std::uint32_t y = 0; y < dims.ny; ++y)
            for (std::uint32_t x = 0; x < dims.nx; ++x) {
                const auto i = dims.index(x, y, z);
                if (x + 1 < dims.nx && classes[i] == classes[i + 1])
                    sets.join(std::uint32_t(i), std::uint32_t(i + 1));
                if (y + 1 < dims.ny && classes[i] == classes[dims.index(x, y + 1, z)])
                    sets.join(std::uint32_t(i), std::uint32_t(dims.index(x, y + 1, z)));
                if (z + 1 < dims.nz && classes[i] == classes[dims.index(x, y, z + 1)])
                    sets.join(std::uint32_t(i), std::uint32_t(dims.index(x, y, z + 1)));
            }
    std::vector<std::uint32_t> out(dims.voxels());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = sets.find(std::uint32_t(i)) + 1;
    return canonicalize_labels(LabelVolume(dims, std::move(out)));
}

// Voxel signatures (or their spectral gradients) -> modes -> connected
// components of equal mode.
inline Segmentation segment_fams(const SpectralVolume& v, const FamsParams& p, bool use_gradient = true) {
    p.validate();
    const SpectralVolume features = use_gradient ? spectral_gradient(v) : v;
    const std::size_t n = features.voxels(), d = features.channels();
    std::vector<double> pts(n * d);
    for (std::size_t e = 0; e < d; ++e) {
        auto ch = features.channel(e);
        for (std::size_t i = 0; i < n; ++i)
            pts[i * d + e] = ch[i];
    }
    const auto q = quantize(pts, d, p.quant_bits);
    const auto uniq = detail::make_unique_points(q);
    std::optional<LshIndex> lsh;
    if (detail::use_lsh(p.search, uniq.size(), p.exact_limit))
        lsh.emplace(uniq, p.hash_cuts, p.hash_tables, p.seed);
    auto hu = detail::pilot_unique(uniq, q.n, p.k_neigh, lsh ? &*lsh : nullptr, p.threads);
    MeanShiftKernel kernel(uniq, std::move(hu), std::move(lsh));
    const ModeSet modes = mean_shift(kernel, q, p);

    Segmentation seg;
    seg.labels = connected_components(v.dims(), modes.assignment);
    seg.algorithm = Algorithm::Fams;
    seg.params = p.to_json();
    seg.params["use_gradient"] = use_gradient;
    seg.params["modes"] = modes.modes.size();
    seg.source_digest = volume_digest(v);
    return seg;
}

} // namespace msct
