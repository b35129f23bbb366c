#include "cmcopula/rng.hpp"

#include "cmcopula/error.hpp"

namespace cmcopula {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

Xoshiro256StarStar seeded_engine(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t mix = stream;
  std::uint64_t state = master ^ splitmix64(mix);
  std::uint64_t s[4];
  for (auto& word : s) word = splitmix64(state);
  if ((s[0] | s[1] | s[2] | s[3]) == 0) s[0] = 1;  // all-zero state is a fixed point
  return Xoshiro256StarStar(s);
}

}  // namespace

Xoshiro256StarStar::Xoshiro256StarStar(const std::uint64_t (&state)[4]) {
  for (int i = 0; i < 4; ++i) s_[i] = state[i];
}

std::uint64_t Xoshiro256StarStar::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

SeededRng::SeededRng(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id), engine_(seeded_engine(master_seed, stream_id)) {}

double SeededRng::uniform() {
  return (static_cast<double>(engine_.next() >> 11) + 0.5) * 0x1.0p-53;
}

SeededRng derive_replication_rng(const SeededRng& master, std::int64_t index) {
  if (index < 0) throw DomainError("replication index must be >= 0");
  std::uint64_t state = master.master_seed() ^ 0x5851f42d4c957f2dULL;
  const std::uint64_t seed_hash = splitmix64(state);
  state = seed_hash + static_cast<std::uint64_t>(index);
  const std::uint64_t stream = splitmix64(state) ^ master.stream_id();
  return SeededRng(master.master_seed(), stream);
}

}  // namespace cmcopula
