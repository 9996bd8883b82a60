#include <stdexcept>

#include <doctest.h>

#include "confglm/binning.hpp"

using namespace confglm;

namespace {

Vector vec1(double v) {
  Vector x(1);
  x << v;
  return x;
}

}  // namespace

TEST_CASE("one-dimensional bin assignment") {
  BinPartition p(vec1(0.0), vec1(1.0), 2);
  CHECK(assign_bin(p, vec1(0.0)) == 0);
  CHECK(assign_bin(p, vec1(0.49)) == 0);
  CHECK(assign_bin(p, vec1(0.5)) == 1);
  CHECK(assign_bin(p, vec1(1.0)) == 1);  // final cell is closed
  CHECK_THROWS_AS(assign_bin(p, vec1(1.0001)), std::invalid_argument);
  CHECK_THROWS_AS(assign_bin(p, vec1(-0.0001)), std::invalid_argument);
}

TEST_CASE("composite index is row-major over axes") {
  Vector lo(2), hi(2);
  lo << 0.0, 0.0;
  hi << 1.0, 1.0;
  BinPartition p(lo, hi, std::vector<int>{2, 3});
  CHECK(p.num_bins() == 6);

  Vector x(2);
  x << 0.1, 0.1;
  CHECK(assign_bin(p, x) == 0);
  x << 0.1, 0.9;
  CHECK(assign_bin(p, x) == 2);
  x << 0.9, 0.1;
  CHECK(assign_bin(p, x) == 3);
  x << 0.9, 0.9;
  CHECK(assign_bin(p, x) == 5);
}

TEST_CASE("bin membership lists") {
  BinPartition p(vec1(0.0), vec1(1.0), 3);
  Matrix x(5, 1);
  x << 0.05, 0.4, 0.45, 0.8, 1.0;
  auto members = bin_members(p, x);
  REQUIRE(members.size() == 3);
  CHECK(members[0] == std::vector<Eigen::Index>{0});
  CHECK(members[1] == std::vector<Eigen::Index>{1, 2});
  CHECK(members[2] == std::vector<Eigen::Index>{3, 4});
}

TEST_CASE("bin count rule by sample size") {
  CHECK(default_bin_count(150) == 2);
  CHECK(default_bin_count(249) == 2);
  CHECK(default_bin_count(250) == 3);
  CHECK(default_bin_count(500) == 3);
}

TEST_CASE("partition validation") {
  CHECK_THROWS_AS(BinPartition(vec1(1.0), vec1(0.0), 2).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(BinPartition(vec1(0.0), vec1(1.0), 0).validate(),
                  std::invalid_argument);
  Vector lo(2), hi(1);
  lo << 0.0, 0.0;
  hi << 1.0;
  CHECK_THROWS_AS(BinPartition(lo, hi, 2).validate(), std::invalid_argument);
}
