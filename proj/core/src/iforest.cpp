#include "adbench/iforest.hpp"

#include <algorithm>
#include <cmath>

#include "adbench/errors.hpp"
#include "adbench/rng.hpp"

namespace adbench {

double iforest_path_adjustment(std::size_t m) {
    if (m <= 1) return 0.0;
    constexpr double euler_gamma = 0.57721566490153286;
    double h = std::log(static_cast<double>(m - 1)) + euler_gamma;
    return 2.0 * h - 2.0 * static_cast<double>(m - 1) / static_cast<double>(m);
}

IsolationForest::IsolationForest(const Matrix& data, int n_trees, int max_subsample,
                                 std::uint64_t seed, bool path_adjustment)
    : dim_(data.cols()), adjust_(path_adjustment) {
    if (data.rows() == 0 || data.cols() == 0) throw ConfigError("iforest: empty training data");
    if (n_trees < 1) throw ConfigError("iforest: tree count must be >= 1");
    if (max_subsample < 1) throw ConfigError("iforest: subsample must be >= 1");

    std::size_t n = data.rows();
    subsample_ = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(max_subsample), n));
    height_limit_ =
        static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max(subsample_, 2)))));

    Rng rng(seed);
    std::vector<std::uint32_t> all(n);
    for (std::uint32_t i = 0; i < n; ++i) all[i] = i;

    trees_.resize(static_cast<std::size_t>(n_trees));
    for (auto& tree : trees_) {
        // subsample without replacement
        rng.shuffle(all);
        std::vector<std::uint32_t> items(all.begin(), all.begin() + subsample_);
        grow(tree, items, 0, items.size(), 0, data, rng);
    }
}

int IsolationForest::grow(Tree& tree, std::vector<std::uint32_t>& items, std::size_t begin,
                          std::size_t end, int depth, const Matrix& data, Rng& rng) {
    Node node;
    node.size = static_cast<std::uint32_t>(end - begin);
    std::size_t count = end - begin;

    bool make_external = count <= 1 || depth >= height_limit_;
    int split_dim = -1;
    double lo = 0.0, hi = 0.0;
    if (!make_external) {
        // pick a split dimension among those with spread; give up if all constant
        std::vector<int> candidates;
        candidates.reserve(dim_);
        for (std::size_t j = 0; j < dim_; ++j) {
            double jlo = data(items[begin], j), jhi = jlo;
            for (std::size_t i = begin + 1; i < end; ++i) {
                double v = data(items[i], j);
                jlo = std::min(jlo, v);
                jhi = std::max(jhi, v);
            }
            if (jhi > jlo) candidates.push_back(static_cast<int>(j));
        }
        if (candidates.empty()) {
            make_external = true;
        } else {
            split_dim = candidates[rng.below(candidates.size())];
            lo = data(items[begin], split_dim);
            hi = lo;
            for (std::size_t i = begin + 1; i < end; ++i) {
                double v = data(items[i], split_dim);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }

    if (make_external) {
        tree.push_back(node);
        return static_cast<int>(tree.size() - 1);
    }

    node.split_dim = split_dim;
    node.threshold = rng.uniform(lo, hi);
    auto mid_it = std::partition(items.begin() + begin, items.begin() + end,
                                 [&](std::uint32_t i) { return data(i, split_dim) < node.threshold; });
    std::size_t mid = static_cast<std::size_t>(mid_it - items.begin());
    if (mid == begin || mid == end) {
        // threshold equal to an extreme; fall back to an even cut so the
        // recursion always makes progress
        mid = begin + count / 2;
        std::nth_element(items.begin() + begin, items.begin() + mid, items.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) {
                             return data(a, split_dim) < data(b, split_dim);
                         });
    }

    int self = static_cast<int>(tree.size());
    tree.push_back(node);
    int left = grow(tree, items, begin, mid, depth + 1, data, rng);
    int right = grow(tree, items, mid, end, depth + 1, data, rng);
    tree[self].left = left;
    tree[self].right = right;
    return self;
}

double IsolationForest::mean_path_length(std::span<const double> query) const {
    if (query.size() != dim_) throw ConfigError("iforest: query dimension mismatch");
    double total = 0.0;
    for (const Tree& tree : trees_) {
        int node = 0;
        int depth = 0;
        while (tree[node].split_dim >= 0) {
            node = query[tree[node].split_dim] < tree[node].threshold ? tree[node].left
                                                                      : tree[node].right;
            ++depth;
        }
        double path = static_cast<double>(depth);
        if (adjust_) path += iforest_path_adjustment(tree[node].size);
        total += path;
    }
    return total / static_cast<double>(trees_.size());
}

int IsolationForest::max_depth() const {
    int best = 0;
    for (const Tree& tree : trees_) {
        // depth of each node by walking from the root
        std::vector<int> depth(tree.size(), 0);
        for (std::size_t i = 0; i < tree.size(); ++i) {
            if (tree[i].split_dim >= 0) {
                depth[tree[i].left] = depth[i] + 1;
                depth[tree[i].right] = depth[i] + 1;
            }
        }
        for (int d : depth) best = std::max(best, d);
    }
    return best;
}

}  // namespace adbench
