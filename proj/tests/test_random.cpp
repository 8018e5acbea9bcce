#include "rbcast/random.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace rbcast;

TEST_CASE("Philox4x32-10 known answers")
{
  using B = Philox::Block;
  CHECK(Philox::encrypt(B{0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox::encrypt(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox::encrypt(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are deterministic and distinct")
{
  StreamKey key{7, 3, 11, 5};
  Philox a{key}, b{key};
  for (int i = 0; i < 1000; ++i)
    REQUIRE(a() == b());

  std::set<std::uint64_t> firsts;
  for (std::uint32_t trial = 0; trial < 50; ++trial)
    for (std::uint32_t receiver = 0; receiver < 50; ++receiver)
      firsts.insert(Philox{StreamKey{7, 3, trial, receiver}}());
  firsts.insert(Philox{StreamKey{8, 3, 0, 0}}());
  firsts.insert(Philox{StreamKey{7, 4, 0, 0}}());
  CHECK(firsts.size() == 2502);
}

TEST_CASE("uniform draws stay inside the open unit interval")
{
  Philox rng{StreamKey{1, 2, 3, 4}};
  double sum = 0.0, sq = 0.0;
  constexpr int draws = 1'000'000;
  for (int i = 0; i < draws; ++i) {
    double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sq += u * u;
  }
  const double mean = sum / draws;
  CHECK(std::abs(mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / draws));
  CHECK(std::abs(sq / draws - mean * mean - 1.0 / 12.0) < 1e-3);
}

TEST_CASE("hash mixing")
{
  CHECK(mix64(0) != mix64(1));
  CHECK(hash_combine(1, 2) != hash_combine(2, 1));
  CHECK(hash_combine(5, 6) == hash_combine(5, 6));
}
