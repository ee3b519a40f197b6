#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <string>

#include "cdbench/dag.hpp"
#include "cdbench/io.hpp"
#include "testutil.hpp"

using namespace cdbench;
namespace fs = std::filesystem;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name)
      : path((fs::temp_directory_path() / ("cdbench_test_" + name)).string()) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("adjacency csv round-trips a dag exactly", "[io]") {
  Dag g(4);
  g.set_edge(0, 3);
  g.set_edge(1, 2);
  TempFile f("adj.csv");
  save_adjacency_csv(g, f.path);
  CHECK(load_adjacency_csv(f.path) == g);
}

TEST_CASE("edge list round-trips isolated nodes via the node-count header", "[io]") {
  Dag g(5);
  g.set_edge(0, 1);  // nodes 2..4 isolated
  TempFile f("edges.txt");
  save_edge_list(g, f.path);
  CHECK(load_edge_list(f.path) == g);

  Dag empty(3);
  TempFile f2("edges_empty.txt");
  save_edge_list(empty, f2.path);
  CHECK(load_edge_list(f2.path) == empty);
}

TEST_CASE("order file round-trips", "[io]") {
  CausalOrder order{3, 0, 2, 1};
  TempFile f("order.txt");
  save_order(order, f.path);
  CHECK(load_order(f.path) == order);
}

TEST_CASE("matrix csv round-trips doubles bit-exactly", "[io]") {
  Eigen::MatrixXd x = testutil::gauss_iid(37, 4, 123);
  x(0, 0) = 1.0 / 3.0;  // not representable in decimal, %.17g must still round-trip
  TempFile f("mat.csv");
  save_matrix_csv(x, f.path);
  Eigen::MatrixXd back = load_matrix_csv(f.path);
  REQUIRE(back.rows() == x.rows());
  REQUIRE(back.cols() == x.cols());
  CHECK((back - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("loads report missing files", "[io]") {
  CHECK_THROWS(load_matrix_csv("/nonexistent/path.csv"));
  CHECK_THROWS(load_adjacency_csv("/nonexistent/path.csv"));
  CHECK_THROWS(load_edge_list("/nonexistent/path.txt"));
  CHECK_THROWS(load_order("/nonexistent/path.txt"));
}
