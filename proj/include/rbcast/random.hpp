#pragma once

// Counter-based random streams. Every stream is addressed by
// (seed, salt, trial, receiver), so draws never depend on how work is
// scheduled across threads.

#include <array>
#include <cstdint>
#include <limits>

namespace rbcast {

/// Key of one independent stream.
struct StreamKey
{
  std::uint64_t seed = 0;
  std::uint64_t salt = 0;
  std::uint32_t trial = 0;
  std::uint32_t receiver = 0;
};

inline constexpr std::uint32_t kSharedStream = 0xFFFFFFFFu;

std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept;

/// Philox4x32-10 used as a UniformRandomBitGenerator with 64-bit output.
class Philox
{
public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox(const StreamKey& key) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept
  {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// The raw bijection, exposed for known-answer tests.
  static Block encrypt(Block counter, std::array<std::uint32_t, 2> key) noexcept;

private:
  std::array<std::uint32_t, 2> m_key;
  Block m_counter;
  Block m_buffer{};
  int m_used = 2; // 64-bit words consumed from m_buffer
};

} // namespace rbcast
