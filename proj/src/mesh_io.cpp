#include "shapeopt/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-blank line; throws ParseError at end of input.
  std::string next(const char* expecting) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return line;
    }
    throw ParseError(line_no_ + 1, std::string("unexpected end of file, expected ") + expecting);
  }

  void expect_section(const std::string& name) {
    std::string line = next(name.c_str());
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok != name) throw ParseError(line_no_, "expected " + name + ", found '" + tok + "'");
  }

  long count(const char* what) {
    std::istringstream ss(next(what));
    long n = -1;
    if (!(ss >> n) || n < 0) throw ParseError(line_no_, std::string("invalid ") + what);
    check_trailing(ss);
    return n;
  }

  std::istringstream record(const char* what) { return std::istringstream(next(what)); }

  void check_trailing(std::istringstream& ss) const {
    std::string extra;
    if (ss >> extra) throw ParseError(line_no_, "unexpected token '" + extra + "'");
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

int parse_node_id(long v, long n, int line) {
  if (v < 1 || v > n) throw ParseError(line, "node id " + std::to_string(v) + " out of range");
  return static_cast<int>(v - 1);
}

}  // namespace

void write_mesh(std::ostream& out, const TriMesh& mesh) {
  out << std::setprecision(17);
  out << "$Nodes\n" << mesh.num_nodes() << "\n";
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    out << i + 1 << ' ' << mesh.node(i).x() << ' ' << mesh.node(i).y() << ' '
        << static_cast<int>(mesh.marker(i)) << '\n';
  }
  out << "$Elements\n" << mesh.num_triangles() << "\n";
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    out << t + 1 << ' ' << tri[0] + 1 << ' ' << tri[1] + 1 << ' ' << tri[2] + 1 << '\n';
  }
  const auto& edges = mesh.boundary_edges();
  out << "$BoundaryEdges\n" << edges.size() << "\n";
  for (std::size_t e = 0; e < edges.size(); ++e) {
    out << e + 1 << ' ' << edges[e].v1 + 1 << ' ' << edges[e].v2 + 1 << ' '
        << static_cast<int>(edges[e].marker) << '\n';
  }
  out << "$End\n";
}

TriMesh read_mesh(std::istream& in) {
  LineReader reader(in);

  reader.expect_section("$Nodes");
  const long nv = reader.count("node count");
  std::vector<Vec2> nodes;
  std::vector<NodeMarker> markers;
  nodes.reserve(nv);
  markers.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    auto ss = reader.record("node record");
    long id = 0;
    double x = 0, y = 0;
    int m = -1;
    if (!(ss >> id >> x >> y >> m)) throw ParseError(reader.line(), "malformed node record");
    reader.check_trailing(ss);
    if (id != i + 1) throw ParseError(reader.line(), "node ids must be 1..n_v in order");
    if (m < 0 || m > 2) throw ParseError(reader.line(), "node marker must be 0, 1 or 2");
    nodes.emplace_back(x, y);
    markers.push_back(static_cast<NodeMarker>(m));
  }

  reader.expect_section("$Elements");
  const long nt = reader.count("element count");
  std::vector<Triangle> tris;
  tris.reserve(nt);
  for (long t = 0; t < nt; ++t) {
    auto ss = reader.record("element record");
    long id = 0, a = 0, b = 0, c = 0;
    if (!(ss >> id >> a >> b >> c)) throw ParseError(reader.line(), "malformed element record");
    reader.check_trailing(ss);
    if (id != t + 1) throw ParseError(reader.line(), "element ids must be 1..n_t in order");
    tris.push_back({parse_node_id(a, nv, reader.line()), parse_node_id(b, nv, reader.line()),
                    parse_node_id(c, nv, reader.line())});
  }

  reader.expect_section("$BoundaryEdges");
  const long nb = reader.count("boundary edge count");
  std::vector<BoundaryEdge> edges;
  edges.reserve(nb);
  for (long e = 0; e < nb; ++e) {
    auto ss = reader.record("boundary edge record");
    long id = 0, a = 0, b = 0;
    int m = 0;
    if (!(ss >> id >> a >> b >> m)) throw ParseError(reader.line(), "malformed boundary edge record");
    reader.check_trailing(ss);
    if (id != e + 1) throw ParseError(reader.line(), "boundary edge ids must be 1..n_b in order");
    if (m != 1 && m != 2) throw ParseError(reader.line(), "boundary edge marker must be 1 or 2");
    edges.push_back({parse_node_id(a, nv, reader.line()), parse_node_id(b, nv, reader.line()),
                     static_cast<EdgeMarker>(m)});
  }
  reader.expect_section("$End");

  return TriMesh(std::move(nodes), std::move(tris), std::move(edges), std::move(markers));
}

void save_mesh(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_mesh(out, mesh);
  if (!out) throw Error("failed writing '" + path + "'");
}

TriMesh load_mesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return read_mesh(in);
}

}  // namespace shapeopt
