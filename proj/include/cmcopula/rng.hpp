#pragma once

#include <cstdint>

namespace cmcopula {

/// splitmix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Raw xoshiro256** engine.
class Xoshiro256StarStar {
 public:
  explicit Xoshiro256StarStar(const std::uint64_t (&state)[4]);
  std::uint64_t next();

 private:
  std::uint64_t s_[4];
};

/// Seedable uniform stream identified by (master_seed, stream_id).
/// The xoshiro256** state is filled by splitmix64 from
/// master_seed ^ mix(stream_id), so equal identifiers give equal streams on
/// every platform.
class SeededRng {
 public:
  SeededRng(std::uint64_t master_seed, std::uint64_t stream_id = 0);

  static constexpr const char* algorithm() { return "xoshiro256**/splitmix64"; }
  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_.next(); }
  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform();

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  Xoshiro256StarStar engine_;
};

/// Stream for replication `index`: same master seed, stream id hashed from
/// (master_seed, index). Throws DomainError for a negative index.
SeededRng derive_replication_rng(const SeededRng& master, std::int64_t index);

}  // namespace cmcopula
