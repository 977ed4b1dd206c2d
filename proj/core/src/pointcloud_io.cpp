#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "hipnav/pointcloud.hpp"

namespace hipnav {

PointCloud read_xyz(const std::filesystem::path& path, FrameTag frame) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");

  PointCloud cloud;
  cloud.frame = frame;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    double x = 0.0, y = 0.0, z = 0.0;
    std::string extra;
    if (!(fields >> x >> y >> z) || (fields >> extra)) {
      throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": expected 'x y z'");
    }
    cloud.points.emplace_back(x, y, z);
  }
  return cloud;
}

void write_xyz(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  for (const auto& p : cloud.points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

}  // namespace hipnav
