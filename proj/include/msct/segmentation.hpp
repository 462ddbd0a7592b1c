#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "msct/volume.hpp"

namespace msct {

enum class Algorithm { GraphCut, Fams };

inline std::string to_string(Algorithm a) { return a == Algorithm::GraphCut ? "graphcut" : "fams"; }

inline Algorithm algorithm_from_string(const std::string& s) {
    if (s == "graphcut" || s == "gc")
        return Algorithm::GraphCut;
    if (s == "fams")
        return Algorithm::Fams;
    throw ValidationError("unknown algorithm '" + s + "'");
}

// A label volume plus how it was produced.
struct Segmentation {
    LabelVolume labels;
    Algorithm algorithm = Algorithm::GraphCut;
    nlohmann::json params = nlohmann::json::object();
    std::string source_digest;

    nlohmann::json provenance() const {
        return {{"algorithm", to_string(algorithm)},
                {"params", params},
                {"source_digest", source_digest},
                {"segments", count_segments(labels)}};
    }
};

} // namespace msct
