#include "htc/model.hpp"

#include <cmath>
#include <random>

#include "htc/fockspace.hpp"
#include "htc/rng.hpp"

namespace htc {

double HTCParams::coupling() const { return g_collective / std::sqrt(static_cast<double>(n_molecules)); }

double HTCParams::reorganization_energy() const { return huang_rhys_lambda * huang_rhys_lambda * nu; }

double HTCParams::period() const { return 2.0 * kPi / nu; }

void HTCParams::validate() const {
  if (n_molecules < 1) throw InvalidArgument("n_molecules must be >= 1");
  if (n_max_vib < 1) throw InvalidArgument("n_max_vib must be >= 1 (cutoff <= 0)");
  if (n_max_cav < 1) throw InvalidArgument("n_max_cav must be >= 1 (cutoff <= 0)");
  if (!(nu > 0.0)) throw InvalidArgument("nu must be positive");
  if (!(disorder_w >= 0.0)) throw InvalidArgument("disorder_w must be >= 0");
  if (!std::isfinite(g_collective) || g_collective < 0.0) throw InvalidArgument("g_collective must be finite and >= 0");
  if (!std::isfinite(huang_rhys_lambda)) throw InvalidArgument("huang_rhys_lambda must be finite");
  if (!std::isfinite(detuning)) throw InvalidArgument("detuning must be finite");
}

std::string InitialStateSpec::label() const {
  if (kind == Kind::CavityExcited) return "cavity";
  return "molecule" + std::to_string(index);
}

DisorderRealization sample_disorder(const HTCParams& params, std::uint64_t seed) {
  if (!(params.disorder_w >= 0.0)) throw InvalidArgument("sample_disorder: W must be >= 0");
  DisorderRealization r;
  r.seed = seed;
  r.epsilons.resize(static_cast<std::size_t>(params.n_molecules));
  CounterRng rng(stream_key(seed, 0, static_cast<std::uint64_t>(StreamTag::Disorder)));
  if (params.distribution == DisorderDistribution::Normal) {
    std::normal_distribution<double> unit(0.0, 1.0);
    for (double& e : r.epsilons) e = params.disorder_w * unit(rng);
  } else {
    for (double& e : r.epsilons) e = params.disorder_w * (rng.uniform() - 0.5);
  }
  return r;
}

namespace {

CMatrix onsite_term(const HTCParams& params, double epsilon) {
  const TruncatedOscillator osc = ladder_matrices(params.n_max_vib);
  const Index dv = osc.dim();
  CMatrix h = CMatrix::Zero(2 * dv, 2 * dv);
  const CMatrix id = CMatrix::Identity(dv, dv);
  // ground block: nu b^dag b ; excited block: nu b^dag b - lambda nu (b + b^dag) + eps + Delta
  h.topLeftCorner(dv, dv) = params.nu * osc.number;
  h.bottomRightCorner(dv, dv) = params.nu * osc.number -
                                params.huang_rhys_lambda * params.nu * (osc.b + osc.b_dag) +
                                (epsilon + params.detuning) * id;
  return h;
}

CMatrix coupling_term(const HTCParams& params) {
  const Index dv = params.vib_dim();
  const Index dm = params.molecule_dim();
  const Index dc = params.cavity_dim();
  const double g = params.coupling();
  CMatrix h = CMatrix::Zero(dc * dm, dc * dm);
  // a^dag sigma^-: |n, g, v> <- |n-1, e, v> with amplitude g sqrt(n)
  for (Index n = 1; n < dc; ++n) {
    for (Index v = 0; v < dv; ++v) {
      const Index row = n * dm + v;
      const Index col = (n - 1) * dm + dv + v;
      const double amp = g * std::sqrt(static_cast<double>(n));
      h(row, col) = amp;
      h(col, row) = amp;
    }
  }
  return h;
}

// Kronecker product with `a` as the more significant factor.
CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix identity(Index d) { return CMatrix::Identity(d, d); }

// Embeds an operator on factor k of a list of local dimensions.
CMatrix embed(const std::vector<Index>& dims, std::size_t k, const CMatrix& op) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (std::size_t j = 0; j < dims.size(); ++j) out = kron(out, j == k ? op : identity(dims[j]));
  return out;
}

}  // namespace

HamiltonianTerms build_terms(const HTCParams& params, const DisorderRealization& realization) {
  params.validate();
  if (static_cast<int>(realization.epsilons.size()) != params.n_molecules) {
    throw InvalidArgument("build_terms: realization has " + std::to_string(realization.epsilons.size()) +
                          " energies for " + std::to_string(params.n_molecules) + " molecules");
  }
  HamiltonianTerms terms;
  terms.n_molecules = params.n_molecules;
  terms.molecule_dim = params.molecule_dim();
  terms.cavity_dim = params.cavity_dim();
  terms.epsilons = realization.epsilons;
  const CMatrix coupling = coupling_term(params);
  for (double eps : realization.epsilons) {
    terms.onsite.push_back(onsite_term(params, eps));
    terms.cavity_coupling.push_back(coupling);
  }
  return terms;
}

LocalOperators local_operators(const HTCParams& params) {
  const TruncatedOscillator cav = ladder_matrices(params.n_max_cav);
  const TruncatedOscillator vib = ladder_matrices(params.n_max_vib);
  const Index dv = vib.dim();
  LocalOperators ops;
  ops.cavity_number = cav.number;
  ops.cavity_create = cav.b_dag;
  CMatrix ne = CMatrix::Zero(2, 2);
  ne(1, 1) = 1.0;
  CMatrix sm = CMatrix::Zero(2, 2);
  sm(0, 1) = 1.0;
  ops.excited = kron(ne, identity(dv));
  ops.lower = kron(sm, identity(dv));
  ops.vib_number = kron(identity(2), vib.number);
  ops.vib_x = kron(identity(2), vib.x);
  return ops;
}

CMatrix assemble_hamiltonian(const HamiltonianTerms& terms) {
  const auto n = static_cast<std::size_t>(terms.n_molecules);
  std::vector<Index> dims{terms.cavity_dim};
  for (std::size_t i = 0; i < n; ++i) dims.push_back(terms.molecule_dim);
  Index total = 1;
  for (Index d : dims) total *= d;
  CMatrix h = CMatrix::Zero(total, total);
  for (std::size_t i = 0; i < n; ++i) h += embed(dims, i + 1, terms.onsite[i]);
  // two-site term on (cavity, molecule i): permute molecule i next to the cavity
  const Index dc = terms.cavity_dim;
  const Index dm = terms.molecule_dim;
  for (std::size_t i = 0; i < n; ++i) {
    const CMatrix& c = terms.cavity_coupling[i];
    Index after = 1;
    for (std::size_t j = i + 1; j < n; ++j) after *= dm;
    for (Index col = 0; col < total; ++col) {
      const Index nc = col / (total / dc);
      Index rest = col % (total / dc);
      const Index left = rest / (dm * after);
      const Index s = (rest / after) % dm;
      const Index right = rest % after;
      for (Index nc2 = 0; nc2 < dc; ++nc2) {
        for (Index s2 = 0; s2 < dm; ++s2) {
          const Complex amp = c(nc2 * dm + s2, nc * dm + s);
          if (amp == Complex(0.0)) continue;
          const Index row = nc2 * (total / dc) + (left * dm + s2) * after + right;
          h(row, col) += amp;
        }
      }
    }
  }
  return h;
}

CMatrix total_excitation_operator(const HTCParams& params) {
  const LocalOperators ops = local_operators(params);
  const auto n = static_cast<std::size_t>(params.n_molecules);
  std::vector<Index> dims{params.cavity_dim()};
  for (std::size_t i = 0; i < n; ++i) dims.push_back(params.molecule_dim());
  CMatrix out = embed(dims, 0, ops.cavity_number);
  for (std::size_t i = 0; i < n; ++i) out += embed(dims, i + 1, ops.excited);
  return out;
}

ProductState initial_state(const InitialStateSpec& spec, const HTCParams& params) {
  params.validate();
  if (spec.kind == InitialStateSpec::Kind::MoleculeExcited &&
      (spec.index < 1 || spec.index > params.n_molecules)) {
    throw InvalidArgument("initial_state: molecule index " + std::to_string(spec.index) + " outside [1, " +
                          std::to_string(params.n_molecules) + "]");
  }
  ProductState state;
  state.cavity = CVector::Zero(params.cavity_dim());
  state.cavity(spec.kind == InitialStateSpec::Kind::CavityExcited ? 1 : 0) = 1.0;
  for (int i = 1; i <= params.n_molecules; ++i) {
    CVector m = CVector::Zero(params.molecule_dim());
    const bool excited = spec.kind == InitialStateSpec::Kind::MoleculeExcited && spec.index == i;
    m(excited ? params.vib_dim() : 0) = 1.0;
    state.molecules.push_back(std::move(m));
  }
  return state;
}

double thermal_reference_energy(const InitialStateSpec& spec, const HTCParams& params) {
  const double r = params.reorganization_energy();
  return spec.kind == InitialStateSpec::Kind::MoleculeExcited ? r : r / params.n_molecules;
}

}  // namespace htc
