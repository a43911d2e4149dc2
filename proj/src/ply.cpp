#include "semmap/ply.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace semmap::ply {

void write(std::ostream& os, const PointCloud& cloud) {
  os << "ply\nformat ascii 1.0\n"
     << "element vertex " << cloud.size() << "\n"
     << "property float x\nproperty float y\nproperty float z\n"
     << "end_header\n";
  char line[96];
  for (const auto& p : cloud.points) {
    std::snprintf(line, sizeof(line), "%.9g %.9g %.9g\n", static_cast<float>(p.x()), static_cast<float>(p.y()),
                  static_cast<float>(p.z()));
    os << line;
  }
}

void write_file(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  write(os, cloud);
  if (!os) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

PointCloud read(std::istream& is, Frame frame) {
  std::string line;
  if (!std::getline(is, line) || line != "ply") {
    throw Error(ErrorCode::SchemaError, "missing ply magic");
  }
  std::size_t count = 0;
  bool have_count = false;
  int properties = 0;
  while (std::getline(is, line)) {
    if (line == "end_header") break;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") throw Error(ErrorCode::SchemaError, "only ascii PLY is supported");
    } else if (word == "element") {
      std::string name;
      ls >> name >> count;
      if (name != "vertex" || !ls) throw Error(ErrorCode::SchemaError, "unsupported element: " + line);
      have_count = true;
    } else if (word == "property") {
      ++properties;
    }
  }
  if (!have_count || properties != 3) {
    throw Error(ErrorCode::SchemaError, "expected a vertex element with x y z properties");
  }
  PointCloud cloud(frame);
  cloud.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double x, y, z;
    if (!(is >> x >> y >> z)) throw Error(ErrorCode::SchemaError, "truncated vertex list");
    cloud.points.emplace_back(x, y, z);
  }
  return cloud;
}

PointCloud read_file(const std::filesystem::path& path, Frame frame) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read(is, frame);
}

}  // namespace semmap::ply
