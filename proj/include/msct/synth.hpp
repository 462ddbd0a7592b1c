#pragma once

// Desk-scale stand-in for an acquisition: analytic spectral phantoms, an
// exact-intersection parallel-beam projector and an ART-TV reconstructor.
//
// Geometry (pixel units): pixel (x, y) covers [x, x+1] x [y, y+1], the
// rotation center is the grid center, angles span [0, pi) uniformly and the
// detector row spans the grid diagonal, hypot(nx, ny) / n_detectors per bin.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "msct/error.hpp"
#include "msct/parallel.hpp"
#include "msct/sinogram.hpp"
#include "msct/volume.hpp"

namespace msct {

// mu(E) = a * E^-3 + b  (E in keV, mu in 1/cm): photoelectric falloff plus a
// flat Compton floor.
struct MaterialModel {
    std::string name;
    double a = 0.0;
    double b = 0.0;

    double mu(double kev) const { return a / (kev * kev * kev) + b; }
};

inline constexpr int kAir = -1;

struct Shape {
    std::array<double, 3> center{};
    std::array<double, 3> radii{};
    int material = 0; // index into PhantomSpec::materials, or kAir
    int priority = 0;
};

struct PhantomSpec {
    Dims dims{64, 64, 1};
    std::array<float, 3> voxel_size{1.0f, 1.0f, 1.0f}; // mm
    std::vector<MaterialModel> materials;
    std::vector<Shape> shapes;

    static PhantomSpec from_json(const nlohmann::json& j) {
        PhantomSpec s;
        auto dims = j.at("dims").get<std::vector<std::uint32_t>>();
        if (dims.size() == 2)
            dims.push_back(1);
        if (dims.size() != 3)
            throw ValidationError("phantom dims must have 2 or 3 entries");
        s.dims = {dims[0], dims[1], dims[2]};
        if (j.contains("voxel_size")) {
            auto vs = j.at("voxel_size").get<std::vector<float>>();
            if (vs.size() != 3)
                throw ValidationError("phantom voxel_size must have 3 entries");
            s.voxel_size = {vs[0], vs[1], vs[2]};
        }
        for (const auto& m : j.at("materials"))
            s.materials.push_back({m.value("name", std::string{}), m.at("a").get<double>(), m.at("b").get<double>()});
        for (const auto& sh : j.at("shapes")) {
            Shape shape;
            auto c = sh.at("center").get<std::vector<double>>();
            auto r = sh.at("radii").get<std::vector<double>>();
            if (c.size() == 2)
                c.push_back(0.5);
            if (r.size() == 2)
                r.push_back(1.0);
            if (c.size() != 3 || r.size() != 3)
                throw ValidationError("shape center and radii need 2 or 3 entries");
            std::copy(c.begin(), c.end(), shape.center.begin());
            std::copy(r.begin(), r.end(), shape.radii.begin());
            const auto& mat = sh.at("material");
            shape.material = mat.is_string() && mat.get<std::string>() == "air" ? kAir : mat.get<int>();
            shape.priority = sh.value("priority", 0);
            s.shapes.push_back(shape);
        }
        return s;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["dims"] = {dims.nx, dims.ny, dims.nz};
        j["voxel_size"] = voxel_size;
        j["materials"] = nlohmann::json::array();
        for (const auto& m : materials)
            j["materials"].push_back({{"name", m.name}, {"a", m.a}, {"b", m.b}});
        j["shapes"] = nlohmann::json::array();
        for (const auto& s : shapes)
            j["shapes"].push_back({{"center", s.center},
                                   {"radii", s.radii},
                                   {"material", s.material == kAir ? nlohmann::json("air") : nlohmann::json(s.material)},
                                   {"priority", s.priority}});
        return j;
    }
};

// Rasterizes the shapes at voxel centers. Label of a voxel is the index + 1
// of the winning shape (highest priority, later shapes win ties), 0 for air.
// With nz == 1 shapes are treated as 2-D discs/ellipses.
inline std::pair<SpectralVolume, LabelVolume> generate_phantom(const PhantomSpec& spec, const EnergyAxis& energy) {
    if (!spec.dims.positive())
        throw DomainError("phantom dims must be positive");
    for (std::size_t m = 0; m < spec.materials.size(); ++m) {
        const auto& mat = spec.materials[m];
        if (mat.a < 0.0 || mat.b < 0.0)
            throw DomainError("material '" + mat.name + "' has a negative coefficient");
        for (float e : energy.centers())
            if (!(mat.mu(e) > 0.0))
                throw DomainError("material '" + mat.name + "' has non-positive attenuation at " + std::to_string(e) +
                                  " keV");
    }
    for (std::size_t s = 0; s < spec.shapes.size(); ++s) {
        const auto& sh = spec.shapes[s];
        const int used_axes = spec.dims.nz == 1 ? 2 : 3;
        for (int k = 0; k < used_axes; ++k)
            if (!(sh.radii[k] > 0.0))
                throw DomainError("shape " + std::to_string(s) + " has a degenerate radius");
        if (sh.material != kAir && (sh.material < 0 || std::size_t(sh.material) >= spec.materials.size()))
            throw DomainError("shape " + std::to_string(s) + " references unknown material");
    }

    const Dims& d = spec.dims;
    std::vector<std::uint32_t> labels(d.voxels(), 0);
    std::vector<int> owner(d.voxels(), -1);
    for (std::uint32_t z = 0; z < d.nz; ++z)
        for (std::uint32_t y = 0; y < d.ny; ++y)
            for (std::uint32_t x = 0; x < d.nx; ++x) {
                const std::array<double, 3> p{x + 0.5, y + 0.5, z + 0.5};
                int best = -1;
                for (std::size_t s = 0; s < spec.shapes.size(); ++s) {
                    const auto& sh = spec.shapes[s];
                    double r = 0.0;
                    for (int k = 0; k < (d.nz == 1 ? 2 : 3); ++k) {
                        const double t = (p[k] - sh.center[k]) / sh.radii[k];
                        r += t * t;
                    }
                    if (r <= 1.0 && (best < 0 || sh.priority >= spec.shapes[best].priority))
                        best = int(s);
                }
                const auto i = d.index(x, y, z);
                owner[i] = best;
                if (best >= 0 && spec.shapes[best].material != kAir)
                    labels[i] = std::uint32_t(best + 1);
            }

    std::vector<float> data(d.voxels() * energy.count(), 0.0f);
    for (std::size_t e = 0; e < energy.count(); ++e)
        for (std::size_t i = 0; i < d.voxels(); ++i)
            if (labels[i] != 0)
                data[e * d.voxels() + i] = float(spec.materials[spec.shapes[owner[i]].material].mu(energy[e]));
    return {SpectralVolume(d, energy, std::move(data), spec.voxel_size), LabelVolume(d, std::move(labels))};
}

// Sparse ray x pixel intersection lengths (pixel units), one row per
// (angle, detector) in angle-major order.
class ProjectionMatrix {
public:
    ProjectionMatrix(std::uint32_t nx, std::uint32_t ny, std::uint32_t n_angles, std::uint32_t n_detectors)
        : nx_(nx), ny_(ny), n_angles_(n_angles), n_detectors_(n_detectors) {
        if (nx == 0 || ny == 0)
            throw DomainError("projection grid must be non-empty");
        if (n_angles == 0 || n_detectors == 0)
            throw DomainError("projection needs at least one angle and one detector");
        row_ptr_.reserve(std::size_t(n_angles) * n_detectors + 1);
        row_ptr_.push_back(0);
        const double spacing = std::hypot(double(nx), double(ny)) / double(n_detectors);
        const double cx = nx / 2.0, cy = ny / 2.0;
        std::vector<double> ts;
        for (std::uint32_t a = 0; a < n_angles; ++a) {
            const double theta = std::numbers::pi * double(a) / double(n_angles);
            const double dx = std::cos(theta), dy = std::sin(theta);
            for (std::uint32_t t = 0; t < n_detectors; ++t) {
                const double s = (double(t) + 0.5 - n_detectors / 2.0) * spacing;
                trace(cx - s * dy, cy + s * dx, dx, dy, ts);
                row_ptr_.push_back(col_.size());
            }
        }
        norm2_.resize(rows());
        for (std::size_t r = 0; r < rows(); ++r) {
            double s = 0.0;
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                s += double(len_[k]) * len_[k];
            norm2_[r] = s;
        }
    }

    std::size_t rows() const { return row_ptr_.size() - 1; }
    std::size_t cols() const { return std::size_t(nx_) * ny_; }
    std::uint32_t angles() const { return n_angles_; }
    std::uint32_t detectors() const { return n_detectors_; }

    double row_dot(std::size_t r, std::span<const double> x) const {
        double s = 0.0;
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            s += len_[k] * x[col_[k]];
        return s;
    }
    void row_axpy(std::size_t r, double alpha, std::span<double> x) const {
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            x[col_[k]] += alpha * len_[k];
    }
    double row_norm2(std::size_t r) const { return norm2_[r]; }

    std::vector<double> forward(std::span<const double> x) const {
        std::vector<double> y(rows());
        for (std::size_t r = 0; r < rows(); ++r)
            y[r] = row_dot(r, x);
        return y;
    }
    std::vector<double> adjoint(std::span<const double> y) const {
        std::vector<double> x(cols(), 0.0);
        for (std::size_t r = 0; r < rows(); ++r)
            row_axpy(r, y[r], x);
        return x;
    }

private:
    // Siddon: clip the ray to the grid box, split it at every pixel-boundary
    // crossing and credit each piece to the pixel holding its midpoint.
    void trace(double px, double py, double dx, double dy, std::vector<double>& ts) {
        constexpr double tiny = 1e-12;
        double t0 = -1e300, t1 = 1e300;
        auto clip = [&](double p, double d, double hi) {
            if (std::abs(d) < tiny) {
                if (p < 0.0 || p > hi)
                    t0 = 1e300;
                return;
            }
            double a = (0.0 - p) / d, b = (hi - p) / d;
            if (a > b)
                std::swap(a, b);
            t0 = std::max(t0, a);
            t1 = std::min(t1, b);
        };
        clip(px, dx, nx_);
        clip(py, dy, ny_);
        if (!(t1 > t0))
            return;
        ts.clear();
        ts.push_back(t0);
        ts.push_back(t1);
        auto crossings = [&](double p, double d, std::uint32_t n) {
            if (std::abs(d) < tiny)
                return;
            for (std::uint32_t k = 0; k <= n; ++k) {
                const double t = (double(k) - p) / d;
                if (t > t0 && t < t1)
                    ts.push_back(t);
            }
        };
        crossings(px, dx, nx_);
        crossings(py, dy, ny_);
        std::sort(ts.begin(), ts.end());
        for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
            const double len = ts[k + 1] - ts[k];
            if (len <= 1e-12)
                continue;
            const double tm = 0.5 * (ts[k] + ts[k + 1]);
            const long ix = long(std::floor(px + tm * dx)), iy = long(std::floor(py + tm * dy));
            if (ix < 0 || iy < 0 || ix >= long(nx_) || iy >= long(ny_))
                continue;
            col_.push_back(std::uint32_t(iy * long(nx_) + ix));
            len_.push_back(float(len));
        }
    }

    std::uint32_t nx_, ny_, n_angles_, n_detectors_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> col_;
    std::vector<float> len_;
    std::vector<double> norm2_;
};

namespace detail {

inline double pixel_cm(const std::array<float, 3>& voxel_size) {
    if (std::abs(voxel_size[0] - voxel_size[1]) > 1e-6f * std::max(voxel_size[0], voxel_size[1]))
        throw DomainError("projection needs square pixels");
    if (!(voxel_size[0] > 0.0f))
        throw DomainError("pixel size must be positive");
    return double(voxel_size[0]) / 10.0;
}

} // namespace detail

// Line integrals (dimensionless: mu in 1/cm times path in cm) of a single
// slice, one sinogram per energy channel.
inline Sinogram forward_project(const SpectralVolume& v, const ProjectionMatrix& P) {
    if (v.dims().nz != 1)
        throw DomainError("forward projection works on single slices (nz == 1)");
    if (P.cols() != v.voxels())
        throw DomainError("projection matrix does not match the slice size");
    const double scale = detail::pixel_cm(v.voxel_size());
    Sinogram s(P.angles(), P.detectors(), v.energy());
    std::vector<double> x(v.voxels());
    for (std::size_t e = 0; e < v.channels(); ++e) {
        auto ch = v.channel(e);
        std::copy(ch.begin(), ch.end(), x.begin());
        auto out = s.channel(e);
        for (std::size_t r = 0; r < P.rows(); ++r)
            out[r] = float(P.row_dot(r, x) * scale);
    }
    return s;
}

inline Sinogram forward_project(const SpectralVolume& v, std::uint32_t n_angles, std::uint32_t n_detectors) {
    return forward_project(v, ProjectionMatrix(v.dims().nx, v.dims().ny, n_angles, n_detectors));
}

// Photon-count noise: N ~ Poisson(n0 * exp(-p)), p' = -ln(max(N, 1) / n0).
// Rays are drawn in storage order from one seeded generator.
inline Sinogram add_poisson_noise(const Sinogram& s, double n0, std::uint64_t seed) {
    if (!(n0 > 0.0))
        throw DomainError("incident photon count must be positive");
    Sinogram out = s;
    std::mt19937_64 rng(seed);
    for (auto& p : out.data) {
        std::poisson_distribution<long long> draw(n0 * std::exp(-double(p)));
        const long long n = draw(rng);
        p = float(-std::log(double(std::max<long long>(n, 1)) / n0));
    }
    return out;
}

// Smoothed isotropic total variation with forward differences (zero past the
// border).
inline constexpr double kTvSmoothing = 1e-6;

inline double total_variation(std::span<const double> x, std::uint32_t nx, std::uint32_t ny,
                              double smoothing = 0.0) {
    double tv = 0.0;
    for (std::uint32_t y = 0; y < ny; ++y)
        for (std::uint32_t xi = 0; xi < nx; ++xi) {
            const std::size_t i = std::size_t(y) * nx + xi;
            const double gx = xi + 1 < nx ? x[i + 1] - x[i] : 0.0;
            const double gy = y + 1 < ny ? x[i + nx] - x[i] : 0.0;
            tv += std::sqrt(gx * gx + gy * gy + smoothing * smoothing);
        }
    return tv;
}

inline std::vector<double> tv_gradient(std::span<const double> x, std::uint32_t nx, std::uint32_t ny) {
    std::vector<double> g(x.size(), 0.0);
    for (std::uint32_t y = 0; y < ny; ++y)
        for (std::uint32_t xi = 0; xi < nx; ++xi) {
            const std::size_t i = std::size_t(y) * nx + xi;
            const double gx = xi + 1 < nx ? x[i + 1] - x[i] : 0.0;
            const double gy = y + 1 < ny ? x[i + nx] - x[i] : 0.0;
            const double n = std::sqrt(gx * gx + gy * gy + kTvSmoothing * kTvSmoothing);
            g[i] -= (gx + gy) / n;
            if (xi + 1 < nx)
                g[i + 1] += gx / n;
            if (y + 1 < ny)
                g[i + nx] += gy / n;
        }
    return g;
}

// x <- x - step * grad TV(x), repeated.
inline void tv_descent(std::span<double> x, std::uint32_t nx, std::uint32_t ny, double step, std::uint32_t steps) {
    for (std::uint32_t s = 0; s < steps; ++s) {
        const auto g = tv_gradient(x, nx, ny);
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] -= step * g[i];
    }
}

struct ReconSettings {
    std::uint32_t iters = 20;
    double tv_weight = 2e-4; // TV gradient step, 1/cm
    std::uint32_t tv_steps = 5;
    double relaxation = 0.25;
    std::array<float, 3> voxel_size{1.0f, 1.0f, 1.0f}; // mm; must match the projection
    unsigned threads = 1;
};

// One channel: alternate a full Kaczmarz sweep (rows in angle-major order,
// non-negativity clamp afterwards) with tv_steps of TV descent.
inline std::vector<double> art_tv_channel(const ProjectionMatrix& P, std::span<const float> sino,
                                          const ReconSettings& cfg, std::uint32_t nx, std::uint32_t ny) {
    const double scale = detail::pixel_cm(cfg.voxel_size);
    std::vector<double> b(sino.size());
    for (std::size_t r = 0; r < b.size(); ++r)
        b[r] = double(sino[r]) / scale;
    std::vector<double> x(P.cols(), 0.0);
    for (std::uint32_t it = 0; it < cfg.iters; ++it) {
        for (std::size_t r = 0; r < P.rows(); ++r) {
            const double n2 = P.row_norm2(r);
            if (n2 <= 0.0)
                continue;
            P.row_axpy(r, cfg.relaxation * (b[r] - P.row_dot(r, x)) / n2, x);
        }
        for (auto& v : x)
            v = std::max(v, 0.0);
        if (cfg.tv_weight > 0.0)
            tv_descent(x, nx, ny, cfg.tv_weight, cfg.tv_steps);
    }
    return x;
}

inline SpectralVolume art_tv_reconstruct(const Sinogram& s, std::uint32_t nx, std::uint32_t ny,
                                         const ReconSettings& cfg = {}) {
    s.validate();
    if (nx == 0 || ny == 0)
        throw DomainError("reconstruction grid must be non-empty");
    if (s.n_detectors < std::max(nx, ny))
        throw DomainError("detector row (" + std::to_string(s.n_detectors) + " bins) is coarser than the " +
                          std::to_string(nx) + "x" + std::to_string(ny) + " grid");
    if (cfg.iters == 0 || cfg.tv_steps == 0)
        throw DomainError("reconstruction needs at least one iteration and one TV step");
    if (cfg.tv_weight < 0.0)
        throw DomainError("TV weight must be non-negative");
    const ProjectionMatrix P(nx, ny, s.n_angles, s.n_detectors);
    const std::size_t nv = std::size_t(nx) * ny;
    std::vector<float> data(nv * s.channels());
    parallel_for(s.channels(), cfg.threads, [&](std::size_t e) {
        const auto x = art_tv_channel(P, s.channel(e), cfg, nx, ny);
        for (std::size_t i = 0; i < nv; ++i)
            data[e * nv + i] = float(x[i]);
    });
    return SpectralVolume({nx, ny, 1}, s.energy, std::move(data), cfg.voxel_size);
}

namespace phantoms {

// Coefficients chosen for plausible magnitudes around 60 keV, not fitted to
// tabulated data.
inline MaterialModel water() { return {"water", 6480.0, 0.17}; }       // mu(60 keV) = 0.2 /cm
inline MaterialModel pmma() { return {"pmma", 4000.0, 0.19}; }
inline MaterialModel ethanol() { return {"ethanol", 3000.0, 0.13}; }
inline MaterialModel aluminium() { return {"aluminium", 40000.0, 0.30}; }
inline MaterialModel polyethylene() { return {"polyethylene", 2500.0, 0.17}; }

// Four separated discs of different materials on an n x n slice.
inline PhantomSpec four_materials(std::uint32_t n = 100) {
    PhantomSpec s;
    s.dims = {n, n, 1};
    s.materials = {water(), pmma(), ethanol(), aluminium()};
    const double lo = 0.3 * n, hi = 0.7 * n, r = 0.16 * n;
    s.shapes = {{{lo, lo, 0.5}, {r, r, 1.0}, 0, 1},
                {{hi, lo, 0.5}, {r, r, 1.0}, 1, 1},
                {{lo, hi, 0.5}, {r, r, 1.0}, 2, 1},
                {{hi, hi, 0.5}, {r, r, 1.0}, 3, 1}};
    return s;
}

// Container wall (ring) holding a liquid of similar attenuation, separated
// from the wall by a one-voxel air gap. The gap is a digital circle, so the
// liquid and wall never share a face but touch across voxel corners.
inline PhantomSpec container(std::uint32_t n = 48) {
    PhantomSpec s;
    s.dims = {n, n, 1};
    s.materials = {polyethylene(), {"liquid", 2450.0, 0.17}};
    const double c = n / 2.0, inner = 0.30 * n;
    s.shapes = {{{c, c, 0.5}, {inner + 5.0, inner + 5.0, 1.0}, 0, 1},
                {{c, c, 0.5}, {inner + 1.0, inner + 1.0, 1.0}, kAir, 2},
                {{c, c, 0.5}, {inner, inner, 1.0}, 1, 3}};
    return s;
}

} // namespace phantoms

} // namespace msct
