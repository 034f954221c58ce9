#include "kitbash/obj_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace kitbash {

namespace {

// "3", "3/1", "3//2", "3/1/2" -> vertex index; negative indices are relative
// to the current vertex count, per the OBJ spec.
int parse_face_index(const std::string& token, std::size_t vertex_count,
                     const std::string& label, int line_no) {
  std::size_t slash = token.find('/');
  const std::string head = token.substr(0, slash);
  int idx = 0;
  try {
    idx = std::stoi(head);
  } catch (const std::exception&) {
    std::ostringstream os;
    os << label << ":" << line_no << ": bad face index '" << token << "'";
    throw ParseError(os.str());
  }
  if (idx < 0) idx = static_cast<int>(vertex_count) + idx + 1;
  if (idx < 1 || idx > static_cast<int>(vertex_count)) {
    std::ostringstream os;
    os << label << ":" << line_no << ": face index " << token
       << " out of range";
    throw ParseError(os.str());
  }
  return idx - 1;
}

}  // namespace

TriMesh read_obj(std::istream& in, const std::string& label) {
  TriMesh mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) {
        std::ostringstream os;
        os << label << ":" << line_no << ": malformed vertex line";
        throw ParseError(os.str());
      }
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string token;
      while (ls >> token)
        poly.push_back(
            parse_face_index(token, mesh.vertices.size(), label, line_no));
      if (poly.size() < 3) {
        std::ostringstream os;
        os << label << ":" << line_no << ": face with fewer than 3 vertices";
        throw ParseError(os.str());
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k)
        mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
    }
    // all other tags (vn, vt, o, g, s, mtllib, usemtl, #) ignored
  }
  return mesh;
}

TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open OBJ file: " + path);
  return read_obj(in, path);
}

void write_obj(const TriMesh& mesh, std::ostream& out,
               const std::string& object_name) {
  if (!object_name.empty()) out << "o " << object_name << "\n";
  char buf[96];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& f : mesh.faces)
    out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
}

void save_obj(const TriMesh& mesh, const std::string& path,
              const std::string& object_name) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write OBJ file: " + path);
  write_obj(mesh, out, object_name);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace kitbash
