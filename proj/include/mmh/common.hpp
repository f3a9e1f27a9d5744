#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace mmh {

inline constexpr double kPi = 3.14159265358979323846;

enum class Errc {
  DuplicateId,
  DanglingPathHop,
  RfChainViolation,
  NonDisjointPaths,
  NodeNotOnPath,
  NonPositiveDistance,
  InvalidBeamwidth,
  NegativePower,
  ZeroArrivalRate,
  EmptySplit,
  DimensionMismatch,
  BadConfig,
};

/// Error raised by model construction and numeric preconditions.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// splitmix64; used to derive independent substream seeds from a master seed.
inline uint64_t mix_seed(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_stream(uint64_t master_seed, uint64_t stream_id) {
  return std::mt19937_64(mix_seed(master_seed ^ mix_seed(stream_id)));
}

}  // namespace mmh
