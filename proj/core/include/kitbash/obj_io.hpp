// Wavefront OBJ reader/writer, triangles only. Polygons are fan-triangulated
// on load; normals/UVs are ignored. The writer emits `v`/`f` lines with
// 1-based indices and 9 significant digits.
#pragma once

#include <iosfwd>
#include <string>

#include "kitbash/mesh.hpp"

namespace kitbash {

TriMesh load_obj(const std::string& path);
TriMesh read_obj(std::istream& in, const std::string& label = "<stream>");

void save_obj(const TriMesh& mesh, const std::string& path,
              const std::string& object_name = "");
void write_obj(const TriMesh& mesh, std::ostream& out,
               const std::string& object_name = "");

}  // namespace kitbash
