#pragma once

#include <filesystem>
#include <vector>

#include "hipnav/geometry.hpp"

namespace hipnav {

struct PointCloud {
  std::vector<Point3> points;
  FrameTag frame = FrameTag::Pic;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

/// Plain-text XYZ: one "x y z" triple per line, millimetres. Blank lines and
/// lines starting with '#' are skipped.
PointCloud read_xyz(const std::filesystem::path& path, FrameTag frame = FrameTag::Pic);
void write_xyz(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace hipnav
