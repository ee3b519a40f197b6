#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "cdbench/random.hpp"

using namespace cdbench;

TEST_CASE("stream_key is a pure function of its inputs", "[random]") {
  CHECK(stream_key(7, "noise", 3) == stream_key(7, "noise", 3));
  CHECK(stream_key(7, "noise", 3) != stream_key(8, "noise", 3));
  CHECK(stream_key(7, "noise", 3) != stream_key(7, "mech", 3));
  CHECK(stream_key(7, "noise", 3) != stream_key(7, "noise", 4));
}

TEST_CASE("streams with different tags diverge immediately", "[random]") {
  auto a = make_stream(42, "noise", 0);
  auto b = make_stream(42, "mech", 0);
  CHECK(a() != b());
  CHECK(make_stream(42, "noise", 0) == make_stream(42, "noise", 0));
}

TEST_CASE("stream keys spread over distinct (seed, tag, index) triples", "[random]") {
  std::set<std::uint64_t> keys;
  for (std::uint64_t seed = 0; seed < 8; ++seed)
    for (std::uint64_t idx = 0; idx < 8; ++idx)
      for (const char* tag : {"noise", "mech", "sigma", "graph"})
        keys.insert(stream_key(seed, tag, idx));
  CHECK(keys.size() == 8 * 8 * 4);
}

TEST_CASE("mix64 is not the identity and hash_bytes separates close strings", "[random]") {
  CHECK(mix64(0) != 0);
  CHECK(mix64(1) != 1);
  CHECK(hash_bytes("abc") != hash_bytes("abd"));
  CHECK(hash_bytes("") != hash_bytes("a"));
}
