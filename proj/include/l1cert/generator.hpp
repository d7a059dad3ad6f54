#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "l1cert/certify.hpp"
#include "l1cert/common.hpp"

namespace l1cert {

// Deterministic random source. Every draw is an explicit mapping of raw
// mt19937_64 output (no library distributions), so identical seeds give
// bitwise-identical instances on every platform this library builds on.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double gaussian();
  Index below(Index n);  // uniform over {0, ..., n-1}
  int sign();
  IndexSet sample_sorted(Index n, Index k);  // k distinct indices, sorted

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

enum class Ensemble { kGaussian, kPartialIdentity };

struct GeneratorSpec {
  Index m = 0;
  Index n = 0;
  Index k = 0;          // target support size, <= min(m, n)
  double delta = 0.1;   // margin target in (0, 1)
  std::uint64_t seed = 0;
  Ensemble ensemble = Ensemble::kGaussian;
  int max_redraws = 30;
  int max_pocs_iters = 5000;
};

struct GeneratedInstance {
  Matrix a;
  Vector b;
  Vector x_star;
  DualCertificate certificate;  // strict for unique instances, margin ~0 otherwise
  int redraws = 0;
  int pocs_iterations = 0;
};

class GenerationFailed : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Alternating projections between the affine set {a_I^T y = s} and the slab
// {|a_i^T y| <= 1 - delta off support}. The displacement per full sweep is
// recorded; it is non-increasing because every correction is a projection
// onto a convex set.
struct PocsTrace {
  bool converged = false;
  Vector y;
  std::vector<double> displacement;
  double eq_residual = 0.0;
  double slab_violation = 0.0;
};

PocsTrace project_to_certificate(const Matrix& a, const SupportPattern& sp, double delta,
                                 int max_iters);

// Draws instances whose minimum-l1 solution with the planted support is
// provably unique: the projected dual certificate has margin >= delta and
// every returned instance re-validates under check_uniqueness_condition. Support
// magnitudes are uniform in [0.5, 1.5) so support detection is unambiguous.
GeneratedInstance generate_unique(const GeneratorSpec& spec);

// Plants an exact degeneracy: one off-support column is rewritten as a_I beta
// with beta^T s = 1, which pins the best certificate margin to zero while
// keeping x_star optimal. Every returned instance has a non-singleton
// optimal face.
GeneratedInstance generate_nonunique(const GeneratorSpec& spec);

}  // namespace l1cert
