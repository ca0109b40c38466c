#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adbench/matrix.hpp"

namespace adbench {

/// Average-subtree path adjustment c(m) = 2 H(m-1) - 2(m-1)/m for a truncated
/// external node holding m points; c(1) = 0.
double iforest_path_adjustment(std::size_t m);

/// Isolation forest: n_trees random recursive partitions of subsamples of the
/// training data, grown to the height limit ceil(log2(subsample)).
/// Anomaly score of a query is the negative of its average path length over
/// the trees, so shorter paths (easier isolation) give higher scores.
class IsolationForest {
public:
    IsolationForest() = default;
    IsolationForest(const Matrix& data, int n_trees, int max_subsample, std::uint64_t seed,
                    bool path_adjustment = true);

    double mean_path_length(std::span<const double> query) const;
    double score(std::span<const double> query) const { return -mean_path_length(query); }

    int tree_count() const { return static_cast<int>(trees_.size()); }
    int height_limit() const { return height_limit_; }
    int subsample_size() const { return subsample_; }
    std::size_t dim() const { return dim_; }
    /// Deepest node over all trees (diagnostics / tests).
    int max_depth() const;

    struct Node {
        int split_dim = -1;  // -1 marks an external node
        double threshold = 0.0;
        int left = -1, right = -1;
        std::uint32_t size = 0;  // points that reached this node (external only)
    };
    using Tree = std::vector<Node>;
    const std::vector<Tree>& trees() const { return trees_; }
    bool path_adjustment_enabled() const { return adjust_; }

private:
    int grow(Tree& tree, std::vector<std::uint32_t>& items, std::size_t begin, std::size_t end,
             int depth, const Matrix& data, class Rng& rng);

    std::vector<Tree> trees_;
    std::size_t dim_ = 0;
    int height_limit_ = 0;
    int subsample_ = 0;
    bool adjust_ = true;

    friend struct IsolationForestSerializer;
};

}  // namespace adbench
