#pragma once

#include <functional>
#include <vector>

#include "htc/model.hpp"
#include "htc/mps.hpp"

namespace htc {

/// Mean-field product state for one excitation: an exact electro-photonic
/// amplitude vector (index 0 = one photon, i = molecule i excited) times a
/// coherent vibrational state alpha_i on every molecule.
///
/// This is the bond-dimension-one limit of the molecule chain with the
/// vibrations kept classical-coherent, so vibronic entanglement is absent.
struct MeanFieldState {
  CVector amplitudes;
  std::vector<Complex> alpha;
  double time = 0.0;

  int n_molecules() const { return static_cast<int>(alpha.size()); }
  double population(int molecule) const { return std::norm(amplitudes(molecule)); }
};

MeanFieldState mean_field_initial(const InitialStateSpec& spec, const HTCParams& params);

using MeanFieldObserver = std::function<void(double time, const MeanFieldState& state)>;

/// Same symmetric gate sweep as the TEBD engine, including the fourth-order
/// composition when config.trotter_order is 4. Each gate does a vibrational
/// half-step at frozen population, the exact electronic 2x2 update at the
/// mean-field shift, and a second vibrational half-step.
void evolve_ehrenfest(MeanFieldState& state, const HTCParams& params, const DisorderRealization& realization,
                      const EvolutionConfig& config, const MeanFieldObserver& observer);

/// Time derivatives of the mean-field equations of motion; exposed for
/// independent integrators.
void mean_field_rhs(const MeanFieldState& state, const HTCParams& params, const std::vector<double>& epsilons,
                    CVector& d_amplitudes, std::vector<Complex>& d_alpha);

double mean_field_energy(const MeanFieldState& state, const HTCParams& params, const std::vector<double>& epsilons);

/// Coherent state |alpha_i> truncated to n_max_vib and renormalised.
CMatrix mean_field_vibrational_dm(const MeanFieldState& state, int molecule, int n_max_vib);

/// Norm lost to the truncation of |alpha_i>.
double coherent_truncation_tail(Complex alpha, int n_max_vib);

}  // namespace htc
