#include "doctest.h"

#include <atomic>
#include <filesystem>
#include <set>
#include <vector>

#include "trex/util.hpp"

using namespace trex;

TEST_CASE("sha256 known vectors") {
  // FIPS 180-4 test vectors
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  std::string million(1000000, 'a');
  CHECK(sha256_hex(million) == "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("stable_hash64 and unit_draw") {
  CHECK(stable_hash64("x") == stable_hash64("x"));
  CHECK(stable_hash64("x") != stable_hash64("y"));
  double d = unit_draw("seed|doc|pair");
  CHECK(d >= 0.0);
  CHECK(d < 1.0);
  CHECK(unit_draw("seed|doc|pair") == d);

  // rough uniformity: mean of many keyed draws near 0.5
  double sum = 0;
  int n = 20000;
  for (int i = 0; i < n; ++i) sum += unit_draw("k" + std::to_string(i));
  CHECK(sum / n > 0.48);
  CHECK(sum / n < 0.52);
}

TEST_CASE("string helpers") {
  CHECK(to_lower("Is Included") == "is included");
  CHECK(trim("  x\t\n") == "x");
  CHECK(trim("") == "");
  CHECK(normalize_ws("a \t b\n\nc") == "a b c");
  CHECK(split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(split("", ',') == std::vector<std::string>{""});
}

TEST_CASE("file round trip") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "trex_util_test";
  fs::remove_all(dir);
  write_file(dir / "a" / "b.txt", "hello\n");
  CHECK(read_file(dir / "a" / "b.txt") == "hello\n");
  write_file_atomic(dir / "a" / "b.txt", "world");
  CHECK(read_file(dir / "a" / "b.txt") == "world");
  fs::remove_all(dir);
}

TEST_CASE("parallel_for covers every index once") {
  std::vector<std::atomic<int>> hits(500);
  parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);

  // exceptions propagate
  CHECK_THROWS_AS(
      parallel_for(100, 4, [](std::size_t i) { if (i == 37) throw std::runtime_error("boom"); }),
      std::runtime_error);

  // workers=1 runs inline
  int count = 0;
  parallel_for(10, 1, [&](std::size_t) { count++; });
  CHECK(count == 10);
}
