#pragma once

#include <iosfwd>
#include <string>

#include "shapeopt/mesh.hpp"

namespace shapeopt {

// ASCII mesh format:
//
//   $Nodes
//   <n_v>
//   <id> <x> <y> <marker>      ids 1..n_v in order; 0 interior, 1 outer, 2 inner
//   $Elements
//   <n_t>
//   <id> <v1> <v2> <v3>        1-based node ids, counterclockwise
//   $BoundaryEdges
//   <n_b>
//   <id> <v1> <v2> <marker>    1 outer, 2 inner
//   $End
//
// Coordinates are written with 17 significant digits so that save/load is
// bit-exact.

void write_mesh(std::ostream& out, const TriMesh& mesh);
TriMesh read_mesh(std::istream& in);

void save_mesh(const TriMesh& mesh, const std::string& path);
TriMesh load_mesh(const std::string& path);

}  // namespace shapeopt
