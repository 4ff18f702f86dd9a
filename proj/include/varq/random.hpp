#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <utility>

namespace varq {

/// Philox4x32-10 block function (Salmon et al., Random123). Maps a 128-bit
/// counter and 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Reproducible random stream identified by (seed, stream_id).
///
/// The seed is the Philox key; the counter is (block index, stream_id), so
/// every stream has 2^64 independent blocks of two 64-bit words and any word
/// can be reached in O(1). This is the only source of randomness in varq.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t word_position = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Two independent standard normals from the next two words (Box-Muller).
  std::pair<double, double> normal_pair();

  void seek(std::uint64_t word_position);
  std::uint64_t position() const { return position_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// The two words of block `block`, independent of the stream position.
  std::array<std::uint64_t, 2> block_words(std::uint64_t block) const;

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t position_;
  std::array<std::uint64_t, 2> buffer_{};
  std::uint64_t buffered_block_ = std::numeric_limits<std::uint64_t>::max();
};

inline RandomStream rng_substream(std::uint64_t seed, std::uint64_t stream_id) {
  return RandomStream(seed, stream_id);
}

/// Box-Muller transform of two raw words. The first word is mapped to (0, 1]
/// so the logarithm is always finite.
std::pair<double, double> box_muller(std::uint64_t a, std::uint64_t b);

}  // namespace varq
