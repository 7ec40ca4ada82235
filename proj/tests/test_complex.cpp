#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "flowembed/complex.hpp"
#include "flowembed/error.hpp"
#include "oracles.hpp"

using namespace flowembed;

namespace {

using E = std::array<VertexId, 2>;
using T = std::array<VertexId, 3>;

// Four vertices, edges 12 13 14 23 and the filled triangle 1-3-2 (0-based here).
SimplicialComplex toy() {
  const std::vector<E> edges{{0, 1}, {0, 2}, {0, 3}, {1, 2}};
  const std::vector<T> tris{{0, 2, 1}};
  return SimplicialComplex::build(4, edges, tris);
}

SimplicialComplex hollow_triangle() {
  const std::vector<E> edges{{0, 1}, {1, 2}, {0, 2}};
  return SimplicialComplex::build(3, edges, {});
}

Eigen::MatrixXi dense(const IncidenceMatrix& m) { return Eigen::MatrixXi(m); }

SimplicialComplex from_oracle(const oracle::RandomComplex& rc) {
  std::vector<E> edges(rc.edges.begin(), rc.edges.end());
  std::vector<T> tris(rc.tris.begin(), rc.tris.end());
  return SimplicialComplex::build(rc.n, edges, tris);
}

void check_kind(ErrorKind kind, auto&& fn) {
  try {
    fn();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
  }
}

}  // namespace

TEST_CASE("build canonicalizes simplices") {
  const auto sc = toy();
  CHECK(sc.vertex_count() == 4);
  CHECK(sc.edge_count() == 4);
  REQUIRE(sc.triangle_count() == 1);
  CHECK(sc.triangles()[0] == OrientedTriangle{0, 1, 2});

  const std::vector<E> reversed{{2, 1}, {3, 0}, {2, 0}, {1, 0}};
  const std::vector<T> tri{{2, 1, 0}};
  const auto again = SimplicialComplex::build(4, reversed, tri);
  CHECK(again.edges() == sc.edges());
  CHECK(again.triangles() == sc.triangles());
  CHECK(again.edge_index(1, 0) == std::optional<std::size_t>(0));
  CHECK(again.edge_index(0, 1) == std::optional<std::size_t>(0));
  CHECK_FALSE(again.edge_index(1, 3).has_value());
}

TEST_CASE("build errors") {
  const std::vector<E> missing_23{{0, 1}, {0, 2}};
  const std::vector<T> tri{{0, 1, 2}};
  check_kind(ErrorKind::MissingFace, [&] { SimplicialComplex::build(3, missing_23, tri); });

  const std::vector<E> out_of_range{{0, 5}};
  check_kind(ErrorKind::MissingFace, [&] { SimplicialComplex::build(3, out_of_range, {}); });

  const std::vector<E> dup{{0, 1}, {1, 0}};
  check_kind(ErrorKind::DuplicateSimplex, [&] { SimplicialComplex::build(2, dup, {}); });

  const std::vector<E> tri_edges{{0, 1}, {1, 2}, {0, 2}};
  const std::vector<T> dup_tri{{0, 1, 2}, {2, 0, 1}};
  check_kind(ErrorKind::DuplicateSimplex, [&] { SimplicialComplex::build(3, tri_edges, dup_tri); });

  const std::vector<E> loop{{1, 1}};
  check_kind(ErrorKind::InvalidArgument, [&] { SimplicialComplex::build(2, loop, {}); });
}

TEST_CASE("empty complex") {
  const auto sc = SimplicialComplex::build(3, {}, {});
  CHECK(sc.edge_count() == 0);
  const auto b1 = boundary_1(sc);
  CHECK(b1.rows() == 3);
  CHECK(b1.cols() == 0);
  CHECK(boundary_2(sc).cols() == 0);
  CHECK(hodge_laplacian(sc).rows() == 0);
}

TEST_CASE("boundary_1 on the toy complex") {
  Eigen::MatrixXi expected(4, 4);
  // tail row -1, head row +1
  expected << -1, -1, -1, 0,
               1,  0,  0, -1,
               0,  1,  0,  1,
               0,  0,  1,  0;
  CHECK(dense(boundary_1(toy())) == expected);

  const std::vector<E> single{{0, 1}};
  const auto b = dense(boundary_1(SimplicialComplex::build(2, single, {})));
  CHECK(b(0, 0) == -1);
  CHECK(b(1, 0) == 1);
}

TEST_CASE("boundary_2 on the toy complex") {
  const auto b2 = dense(boundary_2(toy()));
  REQUIRE(b2.cols() == 1);
  // (1,2): +1, (1,3): -1, (1,4): 0, (2,3): +1
  CHECK(b2(0, 0) == 1);
  CHECK(b2(1, 0) == -1);
  CHECK(b2(2, 0) == 0);
  CHECK(b2(3, 0) == 1);

  const auto tri_b2 = dense(boundary_2(SimplicialComplex::build(
      3, std::vector<E>{{0, 1}, {1, 2}, {0, 2}}, std::vector<T>{{0, 1, 2}})));
  CHECK((tri_b2.transpose() * tri_b2)(0, 0) == 3);
}

TEST_CASE("hodge_laplacian small cases") {
  const auto l1 = Eigen::MatrixXd(hodge_laplacian(toy()));
  CHECK(l1.rows() == 4);
  CHECK(oracle::kernel_dimension(l1) == 0);

  const auto lh = Eigen::MatrixXd(hodge_laplacian(hollow_triangle()));
  CHECK(oracle::kernel_dimension(lh) == 1);
  // edges sorted (0,1), (0,2), (1,2): kernel spanned by (1, -1, 1)
  Eigen::Vector3d v(1, -1, 1);
  CHECK((lh * v).norm() == doctest::Approx(0.0));
}

TEST_CASE("disjoint union gives a block-diagonal Laplacian") {
  const auto a = toy();
  const auto b = hollow_triangle();
  const auto u = disjoint_union(a, b);
  CHECK(u.vertex_count() == 7);
  CHECK(u.edge_count() == 7);
  const Eigen::MatrixXd lu(hodge_laplacian(u));
  const Eigen::MatrixXd la(hodge_laplacian(a));
  const Eigen::MatrixXd lb(hodge_laplacian(b));
  CHECK(lu.topLeftCorner(4, 4) == la);
  CHECK(lu.bottomRightCorner(3, 3) == lb);
  CHECK(lu.topRightCorner(4, 3).isZero());
  CHECK(lu.bottomLeftCorner(3, 4).isZero());
}

TEST_CASE("random complexes: chain identity, column structure, rank identity") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto rc = oracle::random_complex(gen);
    const auto sc = from_oracle(rc);
    const Eigen::MatrixXi b1 = dense(boundary_1(sc));
    const Eigen::MatrixXi b2 = dense(boundary_2(sc));
    CHECK((b1 * b2).isZero());
    CHECK(b1 == oracle::dense_b1(rc.n, rc.edges));
    CHECK(b2 == oracle::dense_b2(rc.edges, rc.tris));
    for (Eigen::Index c = 0; c < b1.cols(); ++c) CHECK(b1.col(c).sum() == 0);
    for (Eigen::Index c = 0; c < b2.cols(); ++c) {
      CHECK(b2.col(c).cwiseAbs().sum() == 3);
      CHECK(std::abs(b2.col(c).sum()) == 1);
    }
    const Eigen::MatrixXd l1(hodge_laplacian(sc));
    const Eigen::MatrixXd expected = (b1.transpose() * b1 + b2 * b2.transpose()).cast<double>();
    CHECK(l1 == expected);
    CHECK(oracle::kernel_dimension(l1) == oracle::betti_1(rc.n, rc.edges, rc.tris));
  }
}

TEST_CASE("flipping an edge orientation conjugates L1 by a sign matrix") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto rc = oracle::random_complex(gen);
    if (rc.edges.empty()) continue;
    const auto sc = from_oracle(rc);
    const Eigen::MatrixXd l1(hodge_laplacian(sc));
    // Flip edge 0 by hand in dense B1/B2 and rebuild the Laplacian.
    Eigen::MatrixXi b1 = oracle::dense_b1(rc.n, rc.edges);
    Eigen::MatrixXi b2 = oracle::dense_b2(rc.edges, rc.tris);
    b1.col(0) *= -1;
    b2.row(0) *= -1;
    const Eigen::MatrixXd flipped = (b1.transpose() * b1 + b2 * b2.transpose()).cast<double>();
    Eigen::VectorXd s = Eigen::VectorXd::Ones(l1.rows());
    s(0) = -1;
    CHECK((s.asDiagonal() * l1 * s.asDiagonal() - flipped).norm() == doctest::Approx(0.0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(l1), e2(flipped);
    CHECK((e1.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("induced subcomplex and components") {
  const auto sc = toy();
  std::vector<std::optional<VertexId>> map;
  const auto sub = sc.induced_subcomplex({true, true, true, false}, &map);
  CHECK(sub.vertex_count() == 3);
  CHECK(sub.edge_count() == 3);
  CHECK(sub.triangle_count() == 1);
  CHECK_FALSE(map[3].has_value());
  CHECK(sc.connected_components() == 1);
  CHECK(disjoint_union(sc, hollow_triangle()).connected_components() == 2);
  CHECK(SimplicialComplex::build(3, {}, {}).connected_components() == 3);
}

TEST_CASE("neighbors are sorted with edge columns") {
  const auto sc = toy();
  const auto nb = sc.neighbors(0);
  REQUIRE(nb.size() == 3);
  CHECK(nb[0].vertex == 1);
  CHECK(nb[1].vertex == 2);
  CHECK(nb[2].vertex == 3);
  for (const auto& n : nb) CHECK(sc.edge_index(0, n.vertex) == std::optional<std::size_t>(n.edge));
}

TEST_CASE("complex JSON round trip uses 1-based indices") {
  const auto sc = toy();
  const std::string json = complex_to_json(sc);
  CHECK(json.find("\"vertices\":4") != std::string::npos);
  CHECK(json.find("[1,2,3]") != std::string::npos);
  const auto back = complex_from_json(json);
  CHECK(back.edges() == sc.edges());
  CHECK(back.triangles() == sc.triangles());
  CHECK(complex_to_json(back) == json);

  check_kind(ErrorKind::ParseError, [] { complex_from_json("{not json"); });
  check_kind(ErrorKind::ParseError, [] { complex_from_json(R"({"edges": [[1, 2]]})"); });
  check_kind(ErrorKind::MissingFace, [] { complex_from_json(R"({"vertices": 2, "edges": [[0, 1]]})"); });
  check_kind(ErrorKind::MissingFace,
             [] { complex_from_json(R"({"vertices": 3, "edges": [[1,2],[1,3]], "triangles": [[1,2,3]]})"); });
}
