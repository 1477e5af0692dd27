#include "scatter/mesh/bvh.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace scatter::mesh {

Bvh::Bvh(std::vector<Box> boxes, int leaf_size) : boxes_(std::move(boxes)), leaf_size_(std::max(1, leaf_size))
{
    order_.resize(boxes_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * boxes_.size() / static_cast<std::size_t>(leaf_size_) + 2);
    if (!boxes_.empty()) build(0, static_cast<int>(boxes_.size()));
}

int Bvh::build(int begin, int end)
{
    const int idx = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    Box box;
    box.setEmpty();
    Box centers;
    centers.setEmpty();
    for (int i = begin; i < end; ++i) {
        box.extend(boxes_[order_[i]]);
        centers.extend(boxes_[order_[i]].center());
    }
    nodes_[idx].box = box;
    nodes_[idx].begin = begin;
    nodes_[idx].end = end;
    if (end - begin <= leaf_size_) return idx;

    int axis = 0;
    centers.sizes().maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
        const double ca = boxes_[a].center()[axis];
        const double cb = boxes_[b].center()[axis];
        return ca < cb || (ca == cb && a < b);
    });
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes_[idx].left = l;
    nodes_[idx].right = r;
    return idx;
}

void Bvh::overlaps(int a, int b, std::vector<std::pair<int, int>>& out) const
{
    const Node& na = nodes_[a];
    const Node& nb = nodes_[b];
    if (!na.box.intersects(nb.box)) return;
    const bool leaf_a = na.left < 0;
    const bool leaf_b = nb.left < 0;
    if (a == b) {
        if (leaf_a) {
            for (int i = na.begin; i < na.end; ++i)
                for (int j = i + 1; j < na.end; ++j) {
                    const int p = order_[i], q = order_[j];
                    if (boxes_[p].intersects(boxes_[q])) out.emplace_back(std::min(p, q), std::max(p, q));
                }
            return;
        }
        overlaps(na.left, na.left, out);
        overlaps(na.right, na.right, out);
        overlaps(na.left, na.right, out);
        return;
    }
    if (leaf_a && leaf_b) {
        for (int i = na.begin; i < na.end; ++i)
            for (int j = nb.begin; j < nb.end; ++j) {
                const int p = order_[i], q = order_[j];
                if (boxes_[p].intersects(boxes_[q])) out.emplace_back(std::min(p, q), std::max(p, q));
            }
        return;
    }
    if (leaf_b || (!leaf_a && na.box.volume() >= nb.box.volume())) {
        overlaps(na.left, b, out);
        overlaps(na.right, b, out);
    } else {
        overlaps(a, nb.left, out);
        overlaps(a, nb.right, out);
    }
}

std::vector<std::pair<int, int>> Bvh::self_overlaps() const
{
    std::vector<std::pair<int, int>> out;
    if (!nodes_.empty()) overlaps(0, 0, out);
    std::sort(out.begin(), out.end());
    return out;
}

double Bvh::nearest(const Vec3& p, const std::function<double(int)>& exact) const
{
    double best = std::numeric_limits<double>::infinity();
    if (nodes_.empty()) return best;
    std::vector<std::pair<double, int>> stack{{0.0, 0}};
    while (!stack.empty()) {
        auto [lower, idx] = stack.back();
        stack.pop_back();
        if (lower >= best) continue;
        const Node& n = nodes_[idx];
        if (n.left < 0) {
            for (int i = n.begin; i < n.end; ++i) best = std::min(best, exact(order_[i]));
            continue;
        }
        const double dl = nodes_[n.left].box.exteriorDistance(p);
        const double dr = nodes_[n.right].box.exteriorDistance(p);
        // Push the farther child first so the nearer one is explored first.
        if (dl < dr) {
            stack.emplace_back(dr, n.right);
            stack.emplace_back(dl, n.left);
        } else {
            stack.emplace_back(dl, n.left);
            stack.emplace_back(dr, n.right);
        }
    }
    return best;
}

} // namespace scatter::mesh
