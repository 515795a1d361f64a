#pragma once

// Origin/destination data: both roles are encoded against one shared label
// universe so every unit carries an origin and a destination effect.

#include <ccmm/dataset.hpp>
#include <ccmm/error.hpp>

#include <string>
#include <vector>

namespace ccmm {

enum class SelfPairPolicy { forbid, allow };

struct DyadFrame {
    ClassificationMap origin;
    ClassificationMap dest;
    SelfPairPolicy policy = SelfPairPolicy::forbid;

    const std::vector<std::string>& labels() const noexcept { return origin.labels; }
    std::size_t J() const noexcept { return origin.J(); }
};

inline DyadFrame build_dyad(const Dataset& d, const std::string& origin_col, const std::string& dest_col,
                            SelfPairPolicy policy = SelfPairPolicy::forbid) {
    const auto& from = d.labels(origin_col);
    const auto& to = d.labels(dest_col);

    // union of both columns, first appearance scanning row by row (origin before dest)
    std::vector<std::string> both;
    both.reserve(2 * from.size());
    for (std::size_t i = 0; i < from.size(); ++i) {
        if (from[i].empty() || to[i].empty()) {
            throw DataError("row " + std::to_string(i + 1) + ": empty origin or destination label");
        }
        if (policy == SelfPairPolicy::forbid && from[i] == to[i]) {
            throw DataError("row " + std::to_string(i + 1) + ": self pair '" + from[i] + "' -> '" + to[i] +
                            "' not allowed");
        }
        both.push_back(from[i]);
        both.push_back(to[i]);
    }
    const auto shared = encode_labels("", both);

    DyadFrame f;
    f.policy = policy;
    f.origin.name = origin_col;
    f.dest.name = dest_col;
    f.origin.labels = shared.labels;
    f.dest.labels = shared.labels;
    f.origin.assign.reserve(from.size());
    f.dest.assign.reserve(to.size());
    for (std::size_t i = 0; i < from.size(); ++i) {
        f.origin.assign.push_back(shared.assign[2 * i]);
        f.dest.assign.push_back(shared.assign[2 * i + 1]);
    }
    return f;
}

}  // namespace ccmm
