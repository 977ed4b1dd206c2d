#include "hipnav/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hipnav {

KdTree::KdTree(PointCloud cloud) : cloud_(std::move(cloud)) {
  if (cloud_.empty()) throw Error(ErrorCode::EmptyCloud, "cannot build a kd-tree over an empty cloud");
  if (cloud_.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "cloud too large for 32-bit indices");
  }
  for (const auto& p : cloud_.points) {
    if (!is_finite(p)) throw Error(ErrorCode::InvalidArgument, "cloud contains non-finite points");
  }
  order_.resize(cloud_.size());
  std::iota(order_.begin(), order_.end(), std::uint32_t{0});
  nodes_.reserve(2 * (cloud_.size() / kLeafCapacity + 1));
  build(0, static_cast<std::uint32_t>(cloud_.size()), 0);
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end, std::size_t depth) {
  depth_ = std::max(depth_, depth);
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end, -1, -1, 0, 0.0});
  if (end - begin <= kLeafCapacity) return id;

  const auto axis = static_cast<std::uint8_t>(depth % 3);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return cloud_.points[a][axis] < cloud_.points[b][axis];
                   });
  const double split = cloud_.points[order_[mid]][axis];

  // Left holds coordinates <= split, right holds >= split.
  const std::int32_t left = build(begin, mid, depth + 1);
  const std::int32_t right = build(mid, end, depth + 1);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void KdTree::query(std::int32_t id, const Point3& center, double radius2, double radius,
                   std::vector<std::size_t>& out) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.leaf()) {
    for (std::uint32_t k = node.begin; k < node.end; ++k) {
      const std::uint32_t i = order_[k];
      if ((cloud_.points[i] - center).squaredNorm() <= radius2) out.push_back(i);
    }
    return;
  }
  const double c = center[node.axis];
  if (c - radius <= node.split) query(node.left, center, radius2, radius, out);
  if (c + radius >= node.split) query(node.right, center, radius2, radius, out);
}

std::vector<std::size_t> KdTree::radius_neighbors(const Point3& center, double radius) const {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "query radius must be positive");
  if (!is_finite(center)) throw Error(ErrorCode::InvalidArgument, "query center must be finite");
  std::vector<std::size_t> out;
  query(0, center, radius * radius, radius, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<std::size_t>> KdTree::leaves() const {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& node : nodes_) {
    if (!node.leaf()) continue;
    out.emplace_back(order_.begin() + node.begin, order_.begin() + node.end);
  }
  return out;
}

KdTree build_kdtree(const PointCloud& cloud) { return KdTree(cloud); }

std::vector<std::size_t> radius_neighbors(const KdTree& tree, const Point3& center, double radius) {
  return tree.radius_neighbors(center, radius);
}

std::vector<std::vector<std::size_t>> euclidean_cluster(const KdTree& tree, double link_radius) {
  if (!(link_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "link radius must be positive");

  const std::size_t n = tree.size();
  std::vector<bool> assigned(n, false);
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<std::size_t> frontier;

  for (std::size_t seed = 0; seed < n; ++seed) {
    if (assigned[seed]) continue;
    std::vector<std::size_t> members{seed};
    assigned[seed] = true;
    frontier.assign(1, seed);
    while (!frontier.empty()) {
      const std::size_t current = frontier.back();
      frontier.pop_back();
      for (std::size_t nb : tree.radius_neighbors(tree.point(current), link_radius)) {
        if (assigned[nb]) continue;
        assigned[nb] = true;
        members.push_back(nb);
        frontier.push_back(nb);
      }
    }
    std::sort(members.begin(), members.end());
    clusters.push_back(std::move(members));
  }
  return clusters;
}

}  // namespace hipnav
