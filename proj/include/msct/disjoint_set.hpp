#pragma once

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace msct {

// Union-find with union by size and path halving.
template <class Index = std::uint32_t>
class DisjointSet {
public:
    explicit DisjointSet(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), Index(0)); }

    Index find(Index x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // Returns the surviving root.
    Index join(Index a, Index b) {
        a = find(a);
        b = find(b);
        if (a == b)
            return a;
        if (size_[a] < size_[b])
            std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return a;
    }

    std::size_t size(Index x) { return size_[find(x)]; }
    std::size_t elements() const { return parent_.size(); }

private:
    std::vector<Index> parent_;
    std::vector<std::size_t> size_;
};

} // namespace msct
