#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "sdelab/io.hpp"
#include "test_util.hpp"

using namespace sdelab;

TEST_SUITE("io") {

TEST_CASE("format_double uses nine significant digits") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(5.0) == "5");
  CHECK(format_double(-1.0) == "-1");
  CHECK(format_double(1.0 / 3.0) == "0.333333333");
  CHECK(format_double(0.473684210526) == "0.473684211");
}

TEST_CASE("format_double round-trips to 1e-8 relative") {
  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.normal(0.0, 1.0) * std::pow(10.0, 8.0 * (rng.uniform() - 0.5));
    const double back = std::strtod(format_double(x).c_str(), nullptr);
    CHECK(std::fabs(back - x) <= 1e-8 * std::fabs(x));
  }
}

TEST_CASE("fnv1a64 matches the published reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("fnv1a64 separates nearby inputs") {
  CHECK(fnv1a64("run.seed=1") != fnv1a64("run.seed=2"));
  CHECK(fnv1a64("ab") != fnv1a64("ba"));
}

TEST_CASE("hex64 is zero-padded lowercase") {
  CHECK(hex64(0) == "0000000000000000");
  CHECK(hex64(0xdeadbeefULL) == "00000000deadbeef");
  CHECK(hex64(~0ULL) == "ffffffffffffffff");
  CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
}

TEST_CASE("atomic_write_file writes and replaces content") {
  testutil::TempDir tmp;
  const std::string path = tmp.path("out.csv");
  atomic_write_file(path, "first\n");
  CHECK(testutil::read_file(path) == "first\n");
  atomic_write_file(path, "second\n");
  CHECK(testutil::read_file(path) == "second\n");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
}

TEST_CASE("atomic_write_file failure leaves the target untouched") {
  testutil::TempDir tmp;
  const std::string good = tmp.path("keep.csv");
  atomic_write_file(good, "keep me\n");

  const std::string bad = tmp.path("no_such_dir") + "/out.csv";
  CHECK_THROWS_AS(atomic_write_file(bad, "data"), std::runtime_error);
  CHECK_FALSE(std::filesystem::exists(bad));
  CHECK(testutil::read_file(good) == "keep me\n");
}

TEST_CASE("CsvWriter emits header plus rows") {
  CsvWriter w({"a", "b"});
  w.add_row({"1", "2"});
  w.add_row({"x", "y"});
  CHECK(w.rows() == 2);
  CHECK(w.str() == "a,b\n1,2\nx,y\n");
}

TEST_CASE("CsvWriter rejects rows of the wrong width") {
  CsvWriter w({"a", "b", "c"});
  CHECK_THROWS_WITH_AS(w.add_row({"1", "2"}), doctest::Contains("width"),
                       std::invalid_argument);
  CHECK(w.rows() == 0);
}

}  // TEST_SUITE
