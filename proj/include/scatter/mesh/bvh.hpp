#pragma once

#include "scatter/types.hpp"

#include <Eigen/Geometry>

#include <functional>
#include <utility>
#include <vector>

namespace scatter::mesh {

using Box = Eigen::AlignedBox3d;

/// Axis-aligned bounding-box tree over an indexed set of boxes.
class Bvh {
public:
    explicit Bvh(std::vector<Box> boxes, int leaf_size = 4);

    /// All index pairs (i < j) whose boxes overlap.
    std::vector<std::pair<int, int>> self_overlaps() const;

    /// Branch-and-bound nearest query. `exact(i)` returns the distance from the
    /// query point to primitive i; boxes farther than the current best are pruned.
    double nearest(const Vec3& p, const std::function<double(int)>& exact) const;

    const std::vector<Box>& boxes() const { return boxes_; }

private:
    struct Node {
        Box box;
        int left = -1;
        int right = -1;
        int begin = 0;
        int end = 0;
    };

    int build(int begin, int end);
    void overlaps(int a, int b, std::vector<std::pair<int, int>>& out) const;

    std::vector<Box> boxes_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int leaf_size_;
};

} // namespace scatter::mesh
