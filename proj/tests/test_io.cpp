#include "fcls/io.hpp"
#include "fcls/rng.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>

using namespace fcls;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("io_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("format_double round trips bit-exactly") {
  Rng rng(1);
  for (int t = 0; t < 2000; ++t) {
    double v = rng.normal() * std::pow(10.0, double(rng.uniform_int(41)) - 20.0);
    CHECK(parse_double(format_double(v), 0, "mem") == v);
  }
  CHECK(format_double(0.0) == "0");
  CHECK(parse_double(format_double(0.1), 0, "mem") == 0.1);
  CHECK(parse_double(format_double(1.0 / 3.0), 0, "mem") == 1.0 / 3.0);
}

TEST_CASE("parse_double rejects junk with location info") {
  CHECK_THROWS_AS(parse_double("abc", 7, "f.csv"), IoError);
  CHECK_THROWS_AS(parse_double("1.5x", 7, "f.csv"), IoError);
  CHECK_THROWS_AS(parse_double("", 7, "f.csv"), IoError);
  try {
    parse_double("oops", 7, "f.csv");
  } catch (const IoError& e) {
    std::string msg = e.what();
    CHECK(msg.find("f.csv:7") != std::string::npos);
    CHECK(msg.find("oops") != std::string::npos);
  }
  // trailing \r (CRLF files) is tolerated
  CHECK(parse_double("2.5\r", 1, "f.csv") == 2.5);
}

TEST_CASE("edge vector round trip") {
  Rng rng(5);
  TempFile f("edges.csv");
  for (Index d : {1, 2, 5, 9}) {
    EdgeVectord b = EdgeVectord::Zero(d);
    for (Index l = 0; l < b.size(); ++l) b.values(l) = rng.normal();
    write_edge_vector(f.path, b);
    EdgeVectord back = read_edge_vector(f.path);
    CHECK(back.d == d);
    CHECK(back.values == b.values);  // bit-exact
  }
}

TEST_CASE("edge vector writes are byte-stable") {
  Rng rng(9);
  EdgeVectord b = EdgeVectord::Zero(6);
  for (Index l = 0; l < b.size(); ++l) b.values(l) = rng.normal();
  TempFile f1("edges1.csv"), f2("edges2.csv");
  write_edge_vector(f1.path, b);
  write_edge_vector(f2.path, b);
  CHECK(slurp(f1.path) == slurp(f2.path));
  CHECK(slurp(f1.path).rfind("d=6\n", 0) == 0);
}

TEST_CASE("edge vector reader rejects malformed files") {
  TempFile f("bad.csv");
  {
    std::ofstream out(f.path);
    out << "x=4\n1\n";
  }
  CHECK_THROWS_AS(read_edge_vector(f.path), IoError);
  {
    std::ofstream out(f.path);
    out << "d=3\n1.0\n2.0\n";  // needs 3 values
  }
  CHECK_THROWS_AS(read_edge_vector(f.path), IoError);
  {
    std::ofstream out(f.path);
    out << "d=3\n1.0\nnope\n3.0\n";
  }
  try {
    read_edge_vector(f.path);
    CHECK(false);
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
  {
    std::ofstream out(f.path);
    out << "d=0\n";
  }
  CHECK_THROWS_AS(read_edge_vector(f.path), IoError);
  CHECK_THROWS_AS(read_edge_vector("does_not_exist.csv"), IoError);
}

TEST_CASE("matrix csv round trip") {
  Rng rng(13);
  Eigen::MatrixXd m(4, 3);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 3; ++j) m(i, j) = rng.normal();
  TempFile f("mat.csv");
  write_matrix_csv(f.path, m);
  Eigen::MatrixXd back = read_matrix_csv(f.path);
  CHECK(back == m);  // bit-exact
}

TEST_CASE("matrix csv reader rejects ragged rows and empties") {
  TempFile f("ragged.csv");
  {
    std::ofstream out(f.path);
    out << "1,2,3\n4,5\n";
  }
  try {
    read_matrix_csv(f.path);
    CHECK(false);
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  {
    std::ofstream out(f.path);
    out << "";
  }
  CHECK_THROWS_AS(read_matrix_csv(f.path), IoError);
}

TEST_CASE("vector csv") {
  TempFile f("vec.csv");
  {
    std::ofstream out(f.path);
    out << "1.5\n-2\n0.25\n";
  }
  Eigen::VectorXd v = read_vector_csv(f.path);
  REQUIRE(v.size() == 3);
  CHECK(v(0) == 1.5);
  CHECK(v(1) == -2.0);
  CHECK(v(2) == 0.25);
  {
    std::ofstream out(f.path);
    out << "1,2\n3,4\n";
  }
  CHECK_THROWS_AS(read_vector_csv(f.path), IoError);
}
