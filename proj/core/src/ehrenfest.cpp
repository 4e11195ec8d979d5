#include "htc/ehrenfest.hpp"

#include <cmath>

namespace htc {

namespace {

Complex vib_half_step(Complex alpha, double lambda, double n, double nu, double tau) {
  const Complex ph = std::exp(-kI * (nu * tau));
  return ph * alpha + lambda * n * (1.0 - ph);
}

CVector coherent_vector(Complex alpha, int n_max) {
  CVector c(n_max + 1);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n <= n_max; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return c;
}

}  // namespace

MeanFieldState mean_field_initial(const InitialStateSpec& spec, const HTCParams& params) {
  params.validate();
  MeanFieldState s;
  s.amplitudes = CVector::Zero(params.n_molecules + 1);
  s.alpha.assign(static_cast<std::size_t>(params.n_molecules), Complex{});
  if (spec.kind == InitialStateSpec::Kind::CavityExcited) {
    s.amplitudes(0) = 1.0;
  } else {
    if (spec.index < 1 || spec.index > params.n_molecules) throw InvalidArgument("initial molecule index out of range");
    s.amplitudes(spec.index) = 1.0;
  }
  return s;
}

void evolve_ehrenfest(MeanFieldState& state, const HTCParams& params, const DisorderRealization& realization,
                      const EvolutionConfig& config, const MeanFieldObserver& observer) {
  config.validate();
  const int n = params.n_molecules;
  if (state.n_molecules() != n || static_cast<int>(realization.epsilons.size()) != n)
    throw InvalidArgument("mean-field state does not match the parameters");
  const double g = params.coupling();
  const double lam = params.huang_rhys_lambda;
  const double nu = params.nu;

  auto gate = [&](int i, double tau) {
    Complex& a = state.alpha[static_cast<std::size_t>(i - 1)];
    a = vib_half_step(a, lam, std::norm(state.amplitudes(i)), nu, 0.5 * tau);
    const double shift = realization.epsilons[static_cast<std::size_t>(i - 1)] + params.detuning - 2.0 * lam * nu * a.real();
    // exp(-i tau [[0, g], [g, shift]]) on (photon, molecule i)
    const double mean = 0.5 * shift;
    const double omega = std::sqrt(0.25 * shift * shift + g * g);
    const double c = std::cos(omega * tau);
    const double sn = omega > 0.0 ? std::sin(omega * tau) / omega : tau;
    const Complex ph = std::exp(-kI * (mean * tau));
    const Complex u00 = ph * (c + kI * mean * sn);
    const Complex u11 = ph * (c - kI * mean * sn);
    const Complex u01 = ph * (-kI * g * sn);
    const Complex x0 = state.amplitudes(0);
    const Complex x1 = state.amplitudes(i);
    state.amplitudes(0) = u00 * x0 + u01 * x1;
    state.amplitudes(i) = u01 * x0 + u11 * x1;
    a = vib_half_step(a, lam, std::norm(state.amplitudes(i)), nu, 0.5 * tau);
  };

  std::vector<double> weights{1.0};
  if (config.trotter_order == 4) {
    const double w = 1.0 / (4.0 - std::cbrt(4.0));
    weights = {w, w, 1.0 - 4.0 * w, w, w};
  }

  std::vector<double> samples = config.sample_times;
  if (samples.empty()) samples = {0.0, config.t_final};
  double t = state.time;
  for (double ts : samples) {
    const double interval = ts - t;
    if (interval > 0.0) {
      const int steps = static_cast<int>(std::ceil(interval / config.dt - 1e-9));
      const double h = interval / steps;
      for (int j = 0; j < steps; ++j)
        for (double w : weights) {
          for (int i = 1; i <= n; ++i) gate(i, 0.5 * w * h);
          for (int i = n; i >= 1; --i) gate(i, 0.5 * w * h);
        }
      if (!state.amplitudes.allFinite()) throw NumericalError("mean-field evolution produced non-finite amplitudes");
    }
    t = std::max(t, ts);
    state.time = t;
    if (observer) observer(ts, state);
  }
}

void mean_field_rhs(const MeanFieldState& state, const HTCParams& params, const std::vector<double>& epsilons,
                    CVector& d_amplitudes, std::vector<Complex>& d_alpha) {
  const int n = state.n_molecules();
  const double g = params.coupling();
  const double lam = params.huang_rhys_lambda;
  const double nu = params.nu;
  d_amplitudes = CVector::Zero(n + 1);
  d_alpha.assign(static_cast<std::size_t>(n), Complex{});
  for (int i = 1; i <= n; ++i) {
    const Complex a = state.alpha[static_cast<std::size_t>(i - 1)];
    const double shift = epsilons[static_cast<std::size_t>(i - 1)] + params.detuning - 2.0 * lam * nu * a.real();
    d_amplitudes(0) += -kI * g * state.amplitudes(i);
    d_amplitudes(i) = -kI * (g * state.amplitudes(0) + shift * state.amplitudes(i));
    d_alpha[static_cast<std::size_t>(i - 1)] = -kI * nu * a + kI * lam * nu * state.population(i);
  }
}

double mean_field_energy(const MeanFieldState& state, const HTCParams& params, const std::vector<double>& epsilons) {
  const double g = params.coupling();
  const double lam = params.huang_rhys_lambda;
  const double nu = params.nu;
  double e = 0.0;
  for (int i = 1; i <= state.n_molecules(); ++i) {
    const Complex a = state.alpha[static_cast<std::size_t>(i - 1)];
    const double p = state.population(i);
    e += nu * std::norm(a) - 2.0 * lam * nu * p * a.real() + (epsilons[static_cast<std::size_t>(i - 1)] + params.detuning) * p;
    e += 2.0 * g * (std::conj(state.amplitudes(0)) * state.amplitudes(i)).real();
  }
  return e;
}

CMatrix mean_field_vibrational_dm(const MeanFieldState& state, int molecule, int n_max_vib) {
  if (molecule < 1 || molecule > state.n_molecules()) throw InvalidArgument("molecule index out of range");
  CVector c = coherent_vector(state.alpha[static_cast<std::size_t>(molecule - 1)], n_max_vib);
  c.normalize();
  return c * c.adjoint();
}

double coherent_truncation_tail(Complex alpha, int n_max_vib) {
  return std::max(0.0, 1.0 - coherent_vector(alpha, n_max_vib).squaredNorm());
}

}  // namespace htc
