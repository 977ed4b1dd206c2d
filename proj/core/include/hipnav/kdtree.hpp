#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hipnav/pointcloud.hpp"

namespace hipnav {

/// Balanced 3-d tree over a copy of the cloud. Split axis cycles x, y, z with
/// depth; each split is at the median; leaves hold at most kLeafCapacity points.
/// Immutable after construction, so concurrent queries are safe.
class KdTree {
 public:
  static constexpr std::size_t kLeafCapacity = 8;

  /// Throws EmptyCloud.
  explicit KdTree(PointCloud cloud);

  std::size_t size() const noexcept { return cloud_.size(); }
  const PointCloud& cloud() const noexcept { return cloud_; }
  const Point3& point(std::size_t i) const { return cloud_.points[i]; }

  /// Indices with |p - center| <= radius, ascending. radius may be +inf.
  std::vector<std::size_t> radius_neighbors(const Point3& center, double radius) const;

  /// Point indices held by each leaf, in tree order.
  std::vector<std::vector<std::size_t>> leaves() const;
  std::size_t depth() const noexcept { return depth_; }

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint8_t axis = 0;
    double split = 0.0;
    bool leaf() const noexcept { return left < 0; }
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, std::size_t depth);
  void query(std::int32_t node, const Point3& center, double radius2, double radius,
             std::vector<std::size_t>& out) const;

  PointCloud cloud_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::size_t depth_ = 0;
};

KdTree build_kdtree(const PointCloud& cloud);

std::vector<std::size_t> radius_neighbors(const KdTree& tree, const Point3& center, double radius);

/// Connected components of the "within link_radius" relation. Each cluster is
/// sorted ascending; clusters are ordered by their smallest index.
std::vector<std::vector<std::size_t>> euclidean_cluster(const KdTree& tree, double link_radius);

}  // namespace hipnav
