#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "msct/error.hpp"
#include "msct/volume.hpp"

namespace msct {

// mean / std style ratio. A zero denominator yields +inf with the flag set
// instead of an error.
struct Ratio {
    double value = 0.0;
    bool infinite = false;

    static Ratio of(double num, double den) {
        if (den == 0.0)
            return {std::numeric_limits<double>::infinity(), true};
        return {num / den, false};
    }
};

inline nlohmann::json to_json(const Ratio& r) {
    return r.infinite ? nlohmann::json("inf") : nlohmann::json(r.value);
}

struct MetricsReport {
    std::map<std::uint32_t, double> per_label_dice; // truth label -> dice
    double overall_dice = 0.0;                      // pooled over voxels
    double mean_label_dice = 0.0;                   // unweighted mean over truth labels
    std::vector<std::pair<std::uint32_t, std::uint32_t>> matching; // (pred, truth)
    std::optional<Ratio> snr;
    std::map<std::uint32_t, Ratio> cnr; // truth label -> CNR against background
    std::optional<double> homogeneity_score;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["overall_dice"] = overall_dice;
        j["mean_label_dice"] = mean_label_dice;
        nlohmann::json per = nlohmann::json::object();
        for (auto [l, d] : per_label_dice)
            per[std::to_string(l)] = d;
        j["per_label_dice"] = per;
        nlohmann::json m = nlohmann::json::array();
        for (auto [p, t] : matching)
            m.push_back({{"pred", p}, {"truth", t}});
        j["matching"] = m;
        j["snr"] = snr ? msct::to_json(*snr) : nlohmann::json();
        nlohmann::json c = nlohmann::json::object();
        for (const auto& [l, r] : cnr)
            c[std::to_string(l)] = msct::to_json(r);
        j["cnr"] = c;
        j["homogeneity_score"] = homogeneity_score ? nlohmann::json(*homogeneity_score) : nlohmann::json();
        return j;
    }

    // Header line and one data row.
    std::string to_csv() const {
        std::ostringstream head, row;
        row.precision(10);
        head << "overall_dice,mean_label_dice";
        row << overall_dice << ',' << mean_label_dice;
        for (auto [l, d] : per_label_dice) {
            head << ",dice_" << l;
            row << ',' << d;
        }
        auto ratio = [&](const Ratio& r) {
            if (r.infinite)
                row << ",inf";
            else
                row << ',' << r.value;
        };
        if (snr) {
            head << ",snr";
            ratio(*snr);
        }
        for (const auto& [l, r] : cnr) {
            head << ",cnr_" << l;
            ratio(r);
        }
        if (homogeneity_score) {
            head << ",homogeneity";
            row << ',' << *homogeneity_score;
        }
        return head.str() + "\n" + row.str() + "\n";
    }
};

namespace detail {

inline void require_same_dims(const Dims& a, const Dims& b) {
    if (!(a == b))
        throw DomainError("label volumes differ in size: " + to_string(a) + " vs " + to_string(b));
}

inline std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> overlap_counts(const LabelVolume& pred,
                                                                                    const LabelVolume& truth) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> counts;
    for (std::size_t i = 0; i < pred.voxels(); ++i)
        ++counts[{pred[i], truth[i]}];
    return counts;
}

} // namespace detail

// Sets to 0 every predicted segment whose largest overlap is with the truth
// background (ties go to background). Segmentation has no background notion,
// so this is how the air region is identified at evaluation time.
inline LabelVolume suppress_background(const LabelVolume& pred, const LabelVolume& truth) {
    detail::require_same_dims(pred.dims(), truth.dims());
    std::map<std::uint32_t, std::pair<std::size_t, std::size_t>> tally; // pred -> (background, best foreground)
    std::map<std::uint32_t, std::map<std::uint32_t, std::size_t>> per;
    for (auto [key, n] : detail::overlap_counts(pred, truth))
        per[key.first][key.second] = n;
    std::vector<std::uint32_t> out(pred.labels().begin(), pred.labels().end());
    std::map<std::uint32_t, bool> drop;
    for (const auto& [p, row] : per) {
        std::size_t bg = 0, fg = 0;
        for (auto [t, n] : row) {
            if (t == 0)
                bg = n;
            else
                fg = std::max(fg, n);
        }
        drop[p] = bg >= fg;
    }
    for (auto& l : out)
        if (drop[l])
            l = 0;
    return LabelVolume(pred.dims(), std::move(out));
}

// Multi-label dice with greedy one-to-one matching by descending overlap
// (ties: smaller predicted label, then smaller truth label). Background (0)
// is ignored on both sides; unmatched truth labels score 0 and unmatched
// predicted voxels still count in the pooled denominator.
inline MetricsReport dice_multilabel(const LabelVolume& pred, const LabelVolume& truth) {
    detail::require_same_dims(pred.dims(), truth.dims());
    std::map<std::uint32_t, std::size_t> pred_size, truth_size;
    for (std::size_t i = 0; i < pred.voxels(); ++i) {
        if (pred[i] != 0)
            ++pred_size[pred[i]];
        if (truth[i] != 0)
            ++truth_size[truth[i]];
    }
    struct Pair {
        std::size_t overlap;
        std::uint32_t p, t;
    };
    std::vector<Pair> pairs;
    for (auto [key, n] : detail::overlap_counts(pred, truth))
        if (key.first != 0 && key.second != 0)
            pairs.push_back({n, key.first, key.second});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return std::make_tuple(-std::int64_t(a.overlap), a.p, a.t) < std::make_tuple(-std::int64_t(b.overlap), b.p, b.t);
    });

    MetricsReport r;
    for (auto [t, n] : truth_size)
        r.per_label_dice[t] = 0.0;
    std::map<std::uint32_t, bool> pred_used, truth_used;
    std::size_t matched_overlap = 0;
    for (const auto& pr : pairs) {
        if (pred_used[pr.p] || truth_used[pr.t])
            continue;
        pred_used[pr.p] = truth_used[pr.t] = true;
        r.matching.emplace_back(pr.p, pr.t);
        matched_overlap += pr.overlap;
        r.per_label_dice[pr.t] = 2.0 * double(pr.overlap) / double(pred_size[pr.p] + truth_size[pr.t]);
    }
    std::size_t total = 0;
    for (auto [l, n] : pred_size)
        total += n;
    for (auto [l, n] : truth_size)
        total += n;
    // Two empty foregrounds agree trivially.
    r.overall_dice = total == 0 ? 1.0 : 2.0 * double(matched_overlap) / double(total);
    if (!r.per_label_dice.empty()) {
        double s = 0.0;
        for (auto [l, d] : r.per_label_dice)
            s += d;
        r.mean_label_dice = s / double(r.per_label_dice.size());
    } else {
        r.mean_label_dice = r.overall_dice;
    }
    return r;
}

namespace detail {

struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / double(n);
        m2 += delta * (x - mean);
    }
    double stddev() const { return n > 0 ? std::sqrt(std::max(0.0, m2 / double(n))) : 0.0; }
};

} // namespace detail

// Mean over the non-background pixels of a photon-count image divided by
// their (population) standard deviation.
inline Ratio snr_projection(std::span<const double> counts, std::span<const std::uint8_t> background_mask) {
    if (counts.size() != background_mask.size())
        throw DomainError("count image and background mask differ in size");
    detail::Moments m;
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (!background_mask[i])
            m.add(counts[i]);
    if (m.n == 0)
        throw DomainError("SNR needs at least one non-background pixel");
    return Ratio::of(m.mean, m.stddev());
}

inline void check_channel_mask(const SpectralVolume& v, std::size_t channel, std::span<const std::uint8_t> mask,
                               const char* what) {
    if (channel >= v.channels())
        throw BoundsError("channel " + std::to_string(channel) + " out of range");
    if (mask.size() != v.voxels())
        throw DomainError(std::string(what) + " mask does not match the volume size");
}

inline Ratio snr_reconstruction(const SpectralVolume& v, std::size_t channel, std::span<const std::uint8_t> roi) {
    check_channel_mask(v, channel, roi, "roi");
    detail::Moments m;
    auto ch = v.channel(channel);
    for (std::size_t i = 0; i < ch.size(); ++i)
        if (roi[i])
            m.add(ch[i]);
    if (m.n == 0)
        throw DomainError("SNR roi is empty");
    return Ratio::of(m.mean, m.stddev());
}

// (mean over material - mean over background) / std over background.
inline Ratio cnr(const SpectralVolume& v, std::size_t channel, std::span<const std::uint8_t> material_mask,
                 std::span<const std::uint8_t> background_mask) {
    check_channel_mask(v, channel, material_mask, "material");
    check_channel_mask(v, channel, background_mask, "background");
    detail::Moments mat, bg;
    auto ch = v.channel(channel);
    for (std::size_t i = 0; i < ch.size(); ++i) {
        if (material_mask[i])
            mat.add(ch[i]);
        if (background_mask[i])
            bg.add(ch[i]);
    }
    if (mat.n == 0 || bg.n == 0)
        throw DomainError("CNR needs non-empty material and background masks");
    return Ratio::of(mat.mean - bg.mean, bg.stddev());
}

inline std::vector<std::uint8_t> label_mask(const LabelVolume& l, std::uint32_t label) {
    std::vector<std::uint8_t> m(l.voxels());
    for (std::size_t i = 0; i < m.size(); ++i)
        m[i] = l[i] == label;
    return m;
}

struct HomogeneityTerms {
    std::vector<std::uint32_t> segments;
    std::vector<std::vector<double>> means; // per segment, per channel
    std::vector<double> dispersion;         // per segment, normalized
    double scale = 1.0;                     // largest |segment mean|
    double pairwise_mean = 0.0;
    double pairwise_max = 0.0;
    double dispersion_mean = 0.0;
    double score = 0.0;
};

// Similarity of two segments: 1 - mean_e |mean_i(e) - mean_j(e)| / scale.
inline double segment_similarity(std::span<const double> a, std::span<const double> b, double scale) {
    double s = 0.0;
    for (std::size_t e = 0; e < a.size(); ++e)
        s += std::abs(a[e] - b[e]);
    return 1.0 - (s / double(a.size())) / scale;
}

// Unsupervised segmentation objective, lower is better: mean pairwise
// inter-segment similarity plus mean in-segment dispersion. A segment's
// dispersion is the channel mean of sqrt(sum of squared deviations from the
// segment mean), divided by sqrt(segment size) and by the scale so both terms
// are dimensionless. Label 0 is ignored.
inline HomogeneityTerms homogeneity_terms(const SpectralVolume& v, const LabelVolume& labels) {
    detail::require_same_dims(v.dims(), labels.dims());
    HomogeneityTerms h;
    std::map<std::uint32_t, std::size_t> slot;
    for (auto l : labels.labels())
        if (l != 0 && !slot.count(l))
            slot.emplace(l, 0);
    if (slot.empty())
        throw DomainError("homogeneity needs at least one segment");
    for (auto& [l, s] : slot) {
        s = h.segments.size();
        h.segments.push_back(l);
    }
    const std::size_t ns = h.segments.size(), ne = v.channels();
    std::vector<std::size_t> size(ns, 0);
    std::vector<std::uint32_t> seg_of(labels.voxels());
    for (std::size_t i = 0; i < labels.voxels(); ++i)
        if (labels[i] != 0) {
            seg_of[i] = std::uint32_t(slot[labels[i]]);
            ++size[seg_of[i]];
        }
    h.means.assign(ns, std::vector<double>(ne, 0.0));
    std::vector<double> ssd(ns, 0.0);
    h.dispersion.assign(ns, 0.0);
    for (std::size_t e = 0; e < ne; ++e) {
        auto ch = v.channel(e);
        std::vector<double> sum(ns, 0.0);
        for (std::size_t i = 0; i < ch.size(); ++i)
            if (labels[i] != 0)
                sum[seg_of[i]] += ch[i];
        for (std::size_t s = 0; s < ns; ++s)
            h.means[s][e] = sum[s] / double(size[s]);
        std::fill(ssd.begin(), ssd.end(), 0.0);
        for (std::size_t i = 0; i < ch.size(); ++i)
            if (labels[i] != 0) {
                const double t = ch[i] - h.means[seg_of[i]][e];
                ssd[seg_of[i]] += t * t;
            }
        for (std::size_t s = 0; s < ns; ++s)
            h.dispersion[s] += std::sqrt(ssd[s]) / double(ne);
    }
    double scale = 0.0;
    for (const auto& m : h.means)
        for (double x : m)
            scale = std::max(scale, std::abs(x));
    h.scale = scale > 0.0 ? scale : 1.0;
    double dsum = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
        h.dispersion[s] /= std::sqrt(double(size[s])) * h.scale;
        dsum += h.dispersion[s];
    }
    h.dispersion_mean = dsum / double(ns);
    double psum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = i + 1; j < ns; ++j) {
            const double s = segment_similarity(h.means[i], h.means[j], h.scale);
            psum += s;
            h.pairwise_max = pairs == 0 ? s : std::max(h.pairwise_max, s);
            ++pairs;
        }
    h.pairwise_mean = pairs > 0 ? psum / double(pairs) : 0.0;
    h.score = h.pairwise_mean + h.dispersion_mean;
    return h;
}

inline double homogeneity_score(const SpectralVolume& v, const LabelVolume& labels) {
    return homogeneity_terms(v, labels).score;
}

} // namespace msct
