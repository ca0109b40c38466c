#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "adbench/matrix.hpp"

namespace adbench {

/// Exact k-nearest-neighbour search over a fixed point set. Median splits on
/// the widest dimension, bucketed leaves. Query results are exactly the
/// brute-force distances: distances accumulate in the same dimension order as
/// a plain scan, so the returned values are bit-identical to an exhaustive
/// search.
class KdTree {
public:
    KdTree() = default;
    explicit KdTree(Matrix points, int leaf_size = 16);

    /// The k smallest Euclidean distances from `query` to stored points,
    /// sorted ascending. Throws if k < 1 or k > size().
    std::vector<double> knn_distances(std::span<const double> query, int k) const;

    std::size_t size() const { return points_.rows(); }
    std::size_t dim() const { return points_.cols(); }
    const Matrix& points() const { return points_; }

private:
    struct Node {
        int split_dim = -1;      // -1 marks a leaf
        double split_value = 0;
        int left = -1, right = -1;
        std::uint32_t begin = 0, end = 0;  // leaf range into index_
    };

    int build(std::uint32_t begin, std::uint32_t end);
    void search(int node, std::span<const double> query, int k,
                std::vector<double>& heap) const;

    Matrix points_;
    std::vector<std::uint32_t> index_;
    std::vector<Node> nodes_;
    int leaf_size_ = 16;
    int root_ = -1;

    friend struct KdTreeSerializer;
};

}  // namespace adbench
