#pragma once

#include <cstdint>
#include <vector>

#include "htc/analysis.hpp"
#include "htc/model.hpp"
#include "htc/rng.hpp"

namespace htc {

/// One phase-space trajectory: a cavity spin (a_x, a_y, a_z) and per molecule
/// a spin (s_x, s_y, s_z) plus vibrational quadratures (x, p).
/// Flat layout: [a_x a_y a_z | s_x s_y s_z x p (molecule 1) | ...].
struct TrajectoryState {
  std::vector<double> y;

  int n_molecules() const { return static_cast<int>((y.size() - 3) / 5); }
  static std::size_t base(int molecule) { return 3 + 5 * static_cast<std::size_t>(molecule - 1); }
  double& a(int c) { return y[static_cast<std::size_t>(c)]; }
  double a(int c) const { return y[static_cast<std::size_t>(c)]; }
  double& s(int molecule, int c) { return y[base(molecule) + static_cast<std::size_t>(c)]; }
  double s(int molecule, int c) const { return y[base(molecule) + static_cast<std::size_t>(c)]; }
  double& x(int molecule) { return y[base(molecule) + 3]; }
  double x(int molecule) const { return y[base(molecule) + 3]; }
  double& p(int molecule) { return y[base(molecule) + 4]; }
  double p(int molecule) const { return y[base(molecule) + 4]; }
};

/// Vacuum Wigner samples for every (x, p); discrete spin samples with s_z = +1
/// (excited) or -1 (ground) and s_x, s_y uniformly +-1.
TrajectoryState sample_initial(const InitialStateSpec& spec, const HTCParams& params, CounterRng& rng);

/// Weyl symbol of the Hamiltonian on one trajectory.
double weyl_energy(const TrajectoryState& st, const HTCParams& params, const std::vector<double>& epsilons);

/// Classical flow of the Weyl symbol: {x, p} = 1, {s_a, s_b} = 2 eps_abc s_c.
/// Exposed for independent integrators.
void trajectory_rhs(const TrajectoryState& st, const HTCParams& params, const std::vector<double>& epsilons,
                    std::vector<double>& dy);

/// One fourth-order commutator-free Lie-group step (Celledoni-Marthinsen-Owren).
/// Every stage moves spins by exact rotations, so spin lengths are kept to
/// rounding; on the quadratures it reduces to classical RK4.
void trajectory_step(TrajectoryState& st, const HTCParams& params, const std::vector<double>& epsilons, double dt);

/// Ensemble sums of the Weyl symbols of |b><a| at sampled (x, p). Mergeable,
/// so several realizations or chunks can be pooled before reconstruction.
class WeylAccumulator {
 public:
  explicit WeylAccumulator(int n_max = 0);

  void add(double x, double p);
  void merge(const WeylAccumulator& other);
  double count() const { return count_; }
  int n_max() const { return n_max_; }

  /// Unbiased sample estimate of the Fock matrix (not projected).
  CMatrix raw_estimate() const;
  /// Elementwise standard error of raw_estimate.
  RMatrix standard_error() const;
  /// Elements below z standard errors are set to zero, then the result is
  /// Hermitised, clipped to PSD and renormalised. z = 0 keeps every element.
  CMatrix reconstruct(double z_threshold) const;

 private:
  int n_max_;
  double count_ = 0.0;
  CMatrix sum_;
  RMatrix sum_sq_;
};

/// 2-D histogram of (x, p) on a grid (bins centred on the grid points).
class HistogramAccumulator {
 public:
  HistogramAccumulator() = default;
  explicit HistogramAccumulator(const GridSpec& grid);

  void add(double x, double p);
  void merge(const HistogramAccumulator& other);
  double count() const { return total_; }

  /// Normalised so that the grid integral is 1; optional Gaussian smoothing
  /// with width `sigma` in quadrature units.
  WignerGrid estimate(double sigma = 0.0) const;

 private:
  GridSpec grid_;
  RMatrix counts_;
  double total_ = 0.0;
};

struct MoleculeMoments {
  double sx = 0.0, sy = 0.0, sz = 0.0;
  double x = 0.0, p = 0.0, xx = 0.0, pp = 0.0, xp = 0.0;
};

/// Ensemble statistics at one sample time.
struct TrajectorySample {
  double time = 0.0;
  double count = 0.0;
  double photon_weight = 0.0;  // sum of (1 + a_z) / 2
  std::vector<WeylAccumulator> weyl;       // per molecule
  std::vector<MoleculeMoments> moments;    // sums, per molecule
  HistogramAccumulator histogram;          // molecule `histogram_molecule`

  void merge(const TrajectorySample& other);
  double mean_photon_weight() const { return photon_weight / count; }
  MoleculeMoments mean_moments(int molecule) const;
};

struct SemiclassicalConfig {
  int n_traj = 10000;
  double dt = 0.0;  // 0 selects period / 800
  std::vector<double> sample_times;
  std::uint64_t seed = 0;
  int workers = 1;
  int chunk = 1024;  // trajectories per work unit; fixed so results do not depend on workers
  bool histogram = true;
  int histogram_molecule = 1;
  GridSpec grid{};
};

struct SemiclassicalResult {
  std::vector<TrajectorySample> samples;
  int n_traj = 0;
  double max_energy_drift = 0.0;  // max over trajectories of |H_W(t) - H_W(0)|
  double max_spin_drift = 0.0;    // max over trajectories and spins of ||s|^2 - |s(0)|^2|
};

/// Samples `n_traj` initial conditions from per-trajectory streams of
/// `config.seed` and integrates each through the sample times.
SemiclassicalResult evolve_trajectories(const HTCParams& params, const DisorderRealization& realization,
                                        const InitialStateSpec& spec, const SemiclassicalConfig& config);

/// Default threshold of the Fock-matrix reconstruction, in standard errors.
inline constexpr double kWeylThreshold = 3.0;

}  // namespace htc
