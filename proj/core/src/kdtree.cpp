#include "adbench/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adbench/errors.hpp"

namespace adbench {

KdTree::KdTree(Matrix points, int leaf_size)
    : points_(std::move(points)), leaf_size_(leaf_size < 1 ? 1 : leaf_size) {
    if (points_.rows() == 0 || points_.cols() == 0)
        throw ConfigError("kdtree: empty point set");
    index_.resize(points_.rows());
    for (std::uint32_t i = 0; i < index_.size(); ++i) index_[i] = i;
    root_ = build(0, static_cast<std::uint32_t>(index_.size()));
}

int KdTree::build(std::uint32_t begin, std::uint32_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    if (end - begin <= static_cast<std::uint32_t>(leaf_size_)) {
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size() - 1);
    }

    // split on the dimension with the widest spread
    std::size_t d = points_.cols();
    int best_dim = 0;
    double best_spread = -1.0;
    for (std::size_t j = 0; j < d; ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::uint32_t i = begin; i < end; ++i) {
            double v = points_(index_[i], j);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            best_dim = static_cast<int>(j);
        }
    }
    if (best_spread <= 0.0) {
        // all points identical in every dimension; keep as one leaf
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size() - 1);
    }

    std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         return points_(a, best_dim) < points_(b, best_dim);
                     });
    node.split_dim = best_dim;
    node.split_value = points_(index_[mid], best_dim);

    int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    int left = build(begin, mid);
    int right = build(mid, end);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
}

namespace {

// binary max-heap over plain doubles
void heap_push(std::vector<double>& heap, double v) {
    heap.push_back(v);
    std::push_heap(heap.begin(), heap.end());
}

void heap_replace_top(std::vector<double>& heap, double v) {
    std::pop_heap(heap.begin(), heap.end());
    heap.back() = v;
    std::push_heap(heap.begin(), heap.end());
}

}  // namespace

void KdTree::search(int node_id, std::span<const double> query, int k,
                    std::vector<double>& heap) const {
    const Node& node = nodes_[node_id];
    if (node.split_dim < 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
            double d2 = squared_distance(query, points_.row(index_[i]));
            if (heap.size() < static_cast<std::size_t>(k)) {
                heap_push(heap, d2);
            } else if (d2 < heap.front()) {
                heap_replace_top(heap, d2);
            }
        }
        return;
    }
    double diff = query[node.split_dim] - node.split_value;
    int near = diff < 0.0 ? node.left : node.right;
    int far = diff < 0.0 ? node.right : node.left;
    search(near, query, k, heap);
    if (heap.size() < static_cast<std::size_t>(k) || diff * diff < heap.front())
        search(far, query, k, heap);
}

std::vector<double> KdTree::knn_distances(std::span<const double> query, int k) const {
    if (query.size() != points_.cols()) throw ConfigError("kdtree: query dimension mismatch");
    if (k < 1) throw ConfigError("kdtree: k must be >= 1");
    if (static_cast<std::size_t>(k) > points_.rows())
        throw ConfigError("kdtree: k exceeds number of stored points");
    std::vector<double> heap;
    heap.reserve(static_cast<std::size_t>(k));
    search(root_, query, k, heap);
    std::sort(heap.begin(), heap.end());
    for (double& d2 : heap) d2 = std::sqrt(d2);
    return heap;
}

}  // namespace adbench
