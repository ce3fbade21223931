#ifndef WDN_TYPES_HPP_
#define WDN_TYPES_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace wdn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Configuration or input validation failure (bad dimensions, empty data, ...).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Failure inside an optimization solve (breakdown, size guard, ...).
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File parsing / filesystem failure.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// splitmix64 step; used to derive independent seeds for parallel streams.
inline std::uint64_t split_mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Combine a master seed with stream identifiers (scenario, block, ...).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return split_mix64(split_mix64(master ^ split_mix64(a)) ^ split_mix64(b + 0x51ed270b891ULL));
}

/// The project-wide pseudorandom source: a seeded mt19937_64.  All sampling
/// goes through an owned Rng instance so parallel workers never share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace wdn

#endif  // WDN_TYPES_HPP_
