#pragma once

#include <filesystem>
#include <iosfwd>

#include "semmap/geometry.hpp"

namespace semmap::ply {

// ASCII PLY, one "x y z" float vertex per line. No faces.
void write(std::ostream& os, const PointCloud& cloud);
void write_file(const std::filesystem::path& path, const PointCloud& cloud);

// The frame tag is not part of the file format; callers state it.
PointCloud read(std::istream& is, Frame frame = Frame::World);
PointCloud read_file(const std::filesystem::path& path, Frame frame = Frame::World);

}  // namespace semmap::ply
