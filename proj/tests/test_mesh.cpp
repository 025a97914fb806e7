#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <doctest.h>

#include "shapeopt/errors.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/mesh_io.hpp"

using namespace shapeopt;

namespace {

TriMesh case1(int n_theta = 64, int n_r = 16) { return generate_annulus_mesh(circle_curve(0.4), 1.0, n_theta, n_r); }

DisplacementField radial_bump(const TriMesh& m, double r_inner) {
  DisplacementField d(m.num_nodes());
  for (int i = 0; i < m.num_nodes(); ++i) {
    const Vec2& x = m.node(i);
    d[i] = (1.0 - x.norm()) / (1.0 - r_inner) * x.normalized();
  }
  return d;
}

std::string text_of(const TriMesh& m) {
  std::ostringstream s;
  write_mesh(s, m);
  return s.str();
}

std::string replace_line(const std::string& text, int line, const std::string& with) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string l;
  for (int k = 1; std::getline(in, l); ++k) out << (k == line ? with : l) << '\n';
  return out.str();
}

}  // namespace

TEST_CASE("annulus generator: counts, area and boundary placement") {
  const TriMesh m = generate_annulus_mesh(circle_curve(0.2), 1.0, 64, 16);
  CHECK(m.num_nodes() == 64 * 17);
  CHECK(m.num_triangles() == 2 * 64 * 16);
  CHECK(m.boundary_edges().size() == 128);
  CHECK(std::abs(m.total_area() - std::numbers::pi * 0.96) < 1e-2);

  CHECK(m.inner_loop().size() == 64);
  CHECK(m.outer_loop().size() == 64);
  for (int v : m.inner_loop()) {
    CHECK(m.marker(v) == NodeMarker::InnerFree);
    CHECK(std::abs(m.node(v).norm() - 0.2) < 1e-15);
  }
  for (int v : m.outer_loop()) CHECK(std::abs(m.node(v).norm() - 1.0) < 1e-15);
  for (int t = 0; t < m.num_triangles(); ++t) CHECK(m.signed_area(t) > 0.0);
}

TEST_CASE("annulus generator: ellipse nodes lie on the curve") {
  const TriMesh m = generate_annulus_mesh(ellipse_curve(0.6, 0.4), 1.0, 64, 16);
  for (int v : m.inner_loop()) {
    const Vec2& x = m.node(v);
    CHECK(x.x() * x.x() / 9.0 + x.y() * x.y() / 4.0 == doctest::Approx(1.0 / 25.0).epsilon(1e-14));
  }
}

TEST_CASE("annulus generator: rejects bad input") {
  CHECK_THROWS_AS(generate_annulus_mesh(circle_curve(0.4), 1.0, 7, 4), ValidationError);
  CHECK_THROWS_AS(generate_annulus_mesh(circle_curve(0.4), 1.0, 16, 1), ValidationError);
  CHECK_THROWS_AS(generate_annulus_mesh(circle_curve(1.2), 1.0, 16, 4), ValidationError);
  // Circle traversed twice: the strip folds over itself.
  auto twice = [](double th) { return Vec2(0.4 * std::cos(2 * th), 0.4 * std::sin(2 * th)); };
  CHECK_THROWS_AS(generate_annulus_mesh(twice, 1.0, 32, 4), ValidationError);
}

TEST_CASE("boundary edges are oriented with the domain on the left") {
  const TriMesh m = case1(32, 8);
  for (const auto& e : m.boundary_edges()) {
    const Vec2 a = m.node(e.v1), b = m.node(e.v2);
    const Vec2 outward(b.y() - a.y(), a.x() - b.x());
    const double radial = outward.dot(0.5 * (a + b));
    if (e.marker == EdgeMarker::InnerFree) {
      CHECK(radial < 0.0);
    } else {
      CHECK(radial > 0.0);
    }
  }
  // Loops are closed and visit each node once.
  std::set<int> seen(m.inner_loop().begin(), m.inner_loop().end());
  CHECK(seen.size() == m.inner_loop().size());
}

TEST_CASE("TriMesh rejects inconsistent input") {
  const TriMesh m = case1(16, 2);
  auto markers = m.node_markers();
  markers[m.inner_loop()[0]] = NodeMarker::Interior;
  CHECK_THROWS_AS(TriMesh(m.nodes(), m.triangles(), m.boundary_edges(), markers), ValidationError);

  auto edges = m.boundary_edges();
  edges.pop_back();
  CHECK_THROWS_AS(TriMesh(m.nodes(), m.triangles(), edges, m.node_markers()), ValidationError);

  auto tris = m.triangles();
  std::swap(tris[3][1], tris[3][2]);
  CHECK_THROWS_AS(TriMesh(m.nodes(), tris, m.boundary_edges(), m.node_markers()), ValidationError);

  auto collapsed = m.nodes();
  const auto& t0 = m.triangle(0);
  collapsed[t0[2]] = 0.5 * (collapsed[t0[0]] + collapsed[t0[1]]);
  CHECK_THROWS_AS(m.with_nodes(collapsed), ValidationError);
}

TEST_CASE("deform_mesh: identity, linearity and inversion") {
  const TriMesh m = case1();
  const DisplacementField zero(m.num_nodes(), Vec2::Zero());
  CHECK(deform_mesh(m, zero, 1.0) == m);
  const DisplacementField d = radial_bump(m, 0.4);
  CHECK(deform_mesh(m, d, 0.0) == m);

  const TriMesh twice = deform_mesh(deform_mesh(m, d, 0.01), d, 0.02);
  const TriMesh once = deform_mesh(m, d, 0.03);
  for (int i = 0; i < m.num_nodes(); ++i) CHECK((twice.node(i) - once.node(i)).norm() < 1e-15);

  DisplacementField unit(m.num_nodes());
  for (int i = 0; i < m.num_nodes(); ++i) unit[i] = m.node(i).normalized();
  CHECK_THROWS_AS(deform_mesh(m, unit, 0.7), StepTooLarge);
}

TEST_CASE("deform_mesh: small radial step moves the inner loop by h") {
  const TriMesh m = case1();
  const TriMesh moved = deform_mesh(m, radial_bump(m, 0.4), 0.01);
  for (int t = 0; t < moved.num_triangles(); ++t) CHECK(moved.signed_area(t) > 0.0);
  CHECK(mean_inner_radius(moved) == doctest::Approx(0.39).epsilon(1e-14));
  for (int v : m.outer_loop()) CHECK(moved.node(v) == m.node(v));
}

TEST_CASE("inner perimeter changes linearly in h") {
  const TriMesh m = case1();
  DisplacementField d(m.num_nodes());
  for (int i = 0; i < m.num_nodes(); ++i) {
    const Vec2& x = m.node(i);
    d[i] = (1.0 - x.norm()) / 0.6 * (1.0 + 0.3 * std::cos(3.0 * std::atan2(x.y(), x.x()))) * x.normalized();
  }
  const double p0 = inner_perimeter(m);
  const double d2 = std::abs(inner_perimeter(deform_mesh(m, d, 1e-2)) - p0);
  const double d3 = std::abs(inner_perimeter(deform_mesh(m, d, 1e-3)) - p0);
  CHECK(d2 / d3 == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("mesh measures") {
  CHECK(triangle_quality({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(triangle_quality({0, 0}, {1, 0}, {0, 1}) == doctest::Approx(2.0 * (std::sqrt(2.0) - 1.0)).epsilon(1e-14));
  CHECK(triangle_quality({0, 0}, {1, 0}, {2, 0}) == 0.0);

  const TriMesh m = case1();
  const double q = mesh_quality(m);
  CHECK(q > 0.0);
  CHECK(q <= 1.0);
  CHECK(inner_perimeter(generate_annulus_mesh(circle_curve(0.2), 1.0, 64, 4)) ==
        doctest::Approx(64 * 0.4 * std::sin(std::numbers::pi / 64)).epsilon(1e-14));
  // Radial edges (0.6 / 16) are shorter than the inner chords.
  CHECK(min_edge_length(m) == doctest::Approx(0.6 / 16).epsilon(1e-12));
  CHECK(inner_radius_rms_error(m, 0.2) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(area_epsilon(m) == doctest::Approx(1e-12 * 4.0 / m.num_triangles()).epsilon(1e-12));
}

TEST_CASE("mesh file round trip is exact") {
  const TriMesh m = generate_annulus_mesh(ellipse_curve(0.6, 0.4), 1.0, 16, 4);
  std::istringstream in(text_of(m));
  CHECK(read_mesh(in) == m);
}

TEST_CASE("mesh file errors") {
  const TriMesh m = case1(8, 2);
  const std::string text = text_of(m);

  SUBCASE("missing elements section") {
    std::string bad = text;
    bad.replace(bad.find("$Elements"), 9, "$Elemnts");
    std::istringstream in(bad);
    try {
      read_mesh(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == m.num_nodes() + 3);
    }
  }
  SUBCASE("clockwise triangle") {
    const auto& t = m.triangle(0);
    const int line = m.num_nodes() + 5;
    std::ostringstream row;
    row << 1 << ' ' << t[0] + 1 << ' ' << t[2] + 1 << ' ' << t[1] + 1;
    std::istringstream in(replace_line(text, line, row.str()));
    CHECK_THROWS_AS(read_mesh(in), ValidationError);
  }
  SUBCASE("bad node marker") {
    std::istringstream in(replace_line(text, 3, "1 0.4 0 7"));
    CHECK_THROWS_AS(read_mesh(in), ParseError);
  }
  SUBCASE("trailing token") {
    std::istringstream in(replace_line(text, 3, "1 0.4 0 2 9"));
    CHECK_THROWS_AS(read_mesh(in), ParseError);
  }
  SUBCASE("truncated file") {
    std::istringstream in(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(read_mesh(in), ParseError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_mesh("/nonexistent/dir/mesh.msh"), Error); }
}
