#include "htc/dense.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace htc {

namespace {

std::uint64_t config_key(int photons, std::uint64_t mask) {
  return (static_cast<std::uint64_t>(photons) << 58) ^ mask;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

}  // namespace

DenseBasis::DenseBasis(const HTCParams& params, int excitations, bool restrict_block)
    : n_molecules_(params.n_molecules), vib_dim_(params.vib_dim()), cavity_dim_(params.cavity_dim()) {
  if (n_molecules_ > 62) throw ResourceLimitError("dense oracle supports at most 62 molecules");
  vib_states_ = 1;
  for (int i = 0; i < n_molecules_; ++i) vib_states_ *= vib_dim_;
  const std::uint64_t n_masks = std::uint64_t{1} << n_molecules_;
  for (int n = 0; n < cavity_dim_; ++n) {
    for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
      if (restrict_block && n + std::popcount(mask) != excitations) continue;
      config_index_.emplace(config_key(n, mask), static_cast<Index>(configs_.size()));
      configs_.push_back({n, mask});
    }
  }
}

double DenseBasis::predicted_dim(const HTCParams& params, int excitations, bool restrict_block) {
  const double vib = std::pow(static_cast<double>(params.vib_dim()), params.n_molecules);
  if (!restrict_block) return params.cavity_dim() * std::pow(2.0, params.n_molecules) * vib;
  double configs = 0.0;
  for (int n = 0; n < params.cavity_dim(); ++n) configs += binomial(params.n_molecules, excitations - n);
  return configs * vib;
}

Index DenseBasis::vib_stride(int molecule) const {
  Index stride = 1;
  for (int j = molecule; j < n_molecules_; ++j) stride *= vib_dim_;
  return stride;
}

Index DenseBasis::find(int photons, std::uint64_t mask, Index vib) const {
  auto it = config_index_.find(config_key(photons, mask));
  if (it == config_index_.end()) return -1;
  return it->second * vib_states_ + vib;
}

DenseSystem::DenseSystem(const HTCParams& params, const DisorderRealization& realization, int excitations,
                         const DenseOptions& options)
    : params_(params), options_(options) {
  params.validate();
  const double predicted = DenseBasis::predicted_dim(params, excitations, options.single_excitation_block);
  if (predicted > static_cast<double>(options.dimension_limit)) {
    throw ResourceLimitError("dense oracle: dimension " + std::to_string(static_cast<long long>(predicted)) +
                             " exceeds limit " + std::to_string(options.dimension_limit));
  }
  basis_ = std::make_shared<DenseBasis>(params, excitations, options.single_excitation_block);
  const HamiltonianTerms terms = build_terms(params, realization);
  const DenseBasis& b = *basis_;
  const Index dv = b.vib_dim();
  const Index dm = params.molecule_dim();
  const Index dc = params.cavity_dim();
  std::vector<Eigen::Triplet<Complex>> triplets;
  const int n = params.n_molecules;
  for (Index ci = 0; ci < static_cast<Index>(b.configs().size()); ++ci) {
    const auto cfg = b.configs()[static_cast<std::size_t>(ci)];
    for (Index vib = 0; vib < b.vib_states(); ++vib) {
      const Index col = ci * b.vib_states() + vib;
      for (int i = 1; i <= n; ++i) {
        const Index stride = b.vib_stride(i);
        const Index v = (vib / stride) % dv;
        const int e = static_cast<int>((cfg.mask >> (i - 1)) & 1U);
        const Index s = e * dv + v;
        const CMatrix& onsite = terms.onsite[static_cast<std::size_t>(i - 1)];
        for (Index s2 = 0; s2 < dm; ++s2) {
          const Complex amp = onsite(s2, s);
          if (amp == Complex(0.0)) continue;
          const std::uint64_t mask2 = (cfg.mask & ~(std::uint64_t{1} << (i - 1))) |
                                      (static_cast<std::uint64_t>(s2 / dv) << (i - 1));
          const Index vib2 = vib + (s2 % dv - v) * stride;
          const Index row = b.find(cfg.photons, mask2, vib2);
          if (row < 0) throw NumericalError("dense oracle: on-site term leaves the basis");
          triplets.emplace_back(row, col, amp);
        }
        const CMatrix& coupling = terms.cavity_coupling[static_cast<std::size_t>(i - 1)];
        const Index in = cfg.photons * dm + s;
        for (Index out = 0; out < dc * dm; ++out) {
          const Complex amp = coupling(out, in);
          if (amp == Complex(0.0)) continue;
          const int n2 = static_cast<int>(out / dm);
          const Index s2 = out % dm;
          const std::uint64_t mask2 = (cfg.mask & ~(std::uint64_t{1} << (i - 1))) |
                                      (static_cast<std::uint64_t>(s2 / dv) << (i - 1));
          const Index vib2 = vib + (s2 % dv - v) * stride;
          const Index row = b.find(n2, mask2, vib2);
          if (row < 0) throw NumericalError("dense oracle: coupling leaves the excitation block");
          triplets.emplace_back(row, col, amp);
        }
      }
    }
  }
  h_.resize(b.dim(), b.dim());
  h_.setFromTriplets(triplets.begin(), triplets.end());
  h_.makeCompressed();
}

DenseState DenseSystem::prepare(const InitialStateSpec& spec) const { return prepare(initial_state(spec, params_)); }

DenseState DenseSystem::prepare(const ProductState& product) const {
  const DenseBasis& b = *basis_;
  const Index dv = b.vib_dim();
  DenseState state{basis_, CVector::Zero(b.dim()), 0.0};
  for (Index ci = 0; ci < static_cast<Index>(b.configs().size()); ++ci) {
    const auto cfg = b.configs()[static_cast<std::size_t>(ci)];
    const Complex cav = product.cavity(cfg.photons);
    if (cav == Complex(0.0)) continue;
    for (Index vib = 0; vib < b.vib_states(); ++vib) {
      Complex amp = cav;
      for (int i = 1; i <= b.n_molecules() && amp != Complex(0.0); ++i) {
        const Index v = (vib / b.vib_stride(i)) % dv;
        const int e = static_cast<int>((cfg.mask >> (i - 1)) & 1U);
        amp *= product.molecules[static_cast<std::size_t>(i - 1)](e * dv + v);
      }
      state.amplitudes(ci * b.vib_states() + vib) = amp;
    }
  }
  const double norm = state.amplitudes.norm();
  if (std::abs(norm - 1.0) > 1e-12) throw InvalidArgument("dense oracle: product state outside the basis block");
  return state;
}

DenseState DenseSystem::step(const DenseState& state, double dt) const {
  DenseState out = state;
  out.amplitudes = expm_multiply(h_, state.amplitudes, dt, options_.krylov);
  out.time = state.time + dt;
  return out;
}

std::vector<DenseState> DenseSystem::evolve(const DenseState& state, const std::vector<double>& times) const {
  std::vector<DenseState> out;
  out.reserve(times.size());
  DenseState current = state;
  for (double t : times) {
    if (t < current.time - 1e-12) throw InvalidArgument("dense_evolve: times must be ascending");
    if (t > current.time) current = step(current, t - current.time);
    current.time = t;
    out.push_back(current);
  }
  return out;
}

double DenseSystem::energy(const DenseState& state) const {
  return state.amplitudes.dot(h_ * state.amplitudes).real();
}

double DenseSystem::photon_number(const DenseState& state) const {
  const DenseBasis& b = *basis_;
  double total = 0.0;
  for (Index ci = 0; ci < static_cast<Index>(b.configs().size()); ++ci) {
    const int n = b.configs()[static_cast<std::size_t>(ci)].photons;
    if (n == 0) continue;
    total += n * state.amplitudes.segment(ci * b.vib_states(), b.vib_states()).squaredNorm();
  }
  return total;
}

double DenseSystem::excited_population(const DenseState& state, int molecule) const {
  const DenseBasis& b = *basis_;
  double total = 0.0;
  for (Index ci = 0; ci < static_cast<Index>(b.configs().size()); ++ci) {
    if (((b.configs()[static_cast<std::size_t>(ci)].mask >> (molecule - 1)) & 1U) == 0U) continue;
    total += state.amplitudes.segment(ci * b.vib_states(), b.vib_states()).squaredNorm();
  }
  return total;
}

double DenseSystem::excitation_number(const DenseState& state) const {
  double total = photon_number(state);
  for (int i = 1; i <= basis_->n_molecules(); ++i) total += excited_population(state, i);
  return total;
}

double DenseSystem::leakage(const DenseState& state, int excitations) const {
  const DenseBasis& b = *basis_;
  double total = 0.0;
  for (Index ci = 0; ci < static_cast<Index>(b.configs().size()); ++ci) {
    const auto cfg = b.configs()[static_cast<std::size_t>(ci)];
    if (cfg.photons + std::popcount(cfg.mask) == excitations) continue;
    total += state.amplitudes.segment(ci * b.vib_states(), b.vib_states()).squaredNorm();
  }
  return std::sqrt(total);
}

std::vector<DenseState> dense_evolve(const HTCParams& params, const DisorderRealization& realization,
                                     const InitialStateSpec& spec, const std::vector<double>& times,
                                     const DenseOptions& options) {
  DenseSystem system(params, realization, spec.total_excitations(), options);
  return system.evolve(system.prepare(spec), times);
}

CMatrix dense_rdm(const DenseState& state, int molecule) {
  const DenseBasis& b = *state.basis;
  if (molecule < 1 || molecule > b.n_molecules()) {
    throw InvalidArgument("dense_rdm: molecule index " + std::to_string(molecule) + " out of range");
  }
  const Index dv = b.vib_dim();
  const Index stride = b.vib_stride(molecule);
  CMatrix rho = CMatrix::Zero(dv, dv);
  const CVector& psi = state.amplitudes;
  for (Index idx = 0; idx < psi.size(); ++idx) {
    const Index v = (idx / stride) % dv;
    if (v != 0) continue;
    for (Index a = 0; a < dv; ++a) {
      const Complex pa = psi(idx + a * stride);
      if (pa == Complex(0.0)) continue;
      for (Index c = 0; c < dv; ++c) rho(a, c) += pa * std::conj(psi(idx + c * stride));
    }
  }
  return rho;
}

}  // namespace htc
