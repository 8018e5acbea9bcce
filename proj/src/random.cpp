#include "rbcast/random.hpp"

namespace rbcast {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept
{
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

} // namespace

std::uint64_t mix64(std::uint64_t x) noexcept
{
  // splitmix64 finalizer
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept
{
  return mix64(a ^ (mix64(b) + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2)));
}

Philox::Block Philox::encrypt(Block ctr, std::array<std::uint32_t, 2> key) noexcept
{
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

Philox::Philox(const StreamKey& key) noexcept
{
  std::uint64_t k = hash_combine(key.seed, key.salt);
  m_key = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  m_counter = {0u, 0u, key.trial, key.receiver};
}

Philox::result_type Philox::operator()() noexcept
{
  if (m_used == 2) {
    m_buffer = encrypt(m_counter, m_key);
    if (++m_counter[0] == 0)
      ++m_counter[1];
    m_used = 0;
  }
  auto lo = m_buffer[2 * m_used];
  auto hi = m_buffer[2 * m_used + 1];
  ++m_used;
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

} // namespace rbcast
