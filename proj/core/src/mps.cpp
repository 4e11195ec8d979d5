#include "htc/mps.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace htc {

namespace {

using RowMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

CMatrix exp_hermitian(const CMatrix& h, double tau) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  const RVector& w = eig.eigenvalues();
  CVector phases(w.size());
  for (Index j = 0; j < w.size(); ++j) phases(j) = std::exp(-kI * (w(j) * tau));
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

// Charge carried by a local operator: c(s') - c(s) for its nonzero elements.
int operator_charge(const CMatrix& op, const std::vector<int>& phys) {
  const Index d = static_cast<Index>(phys.size());
  if (op.rows() != d || op.cols() != d) throw InvalidArgument("operator does not match the local dimension");
  bool seen = false;
  int charge = 0;
  for (Index s = 0; s < d; ++s) {
    for (Index sp = 0; sp < d; ++sp) {
      if (op(sp, s) == Complex{}) continue;
      const int c = phys[static_cast<std::size_t>(sp)] - phys[static_cast<std::size_t>(s)];
      if (seen && c != charge) throw InvalidArgument("operator does not change the excitation number uniformly");
      seen = true;
      charge = c;
    }
  }
  return charge;
}

// Environment at a bond. Blocks are indexed by the bra sector; the ket
// sector has charge q_bra + delta. Left environments are stored bra x ket,
// right environments ket x bra.
struct Env {
  int delta = 0;
  std::vector<CMatrix> blocks;
};

Env boundary_env(const Bond& b) {
  Env e;
  e.blocks.resize(static_cast<std::size_t>(b.sectors()));
  for (int j = 0; j < b.sectors(); ++j) {
    const Index d = b.dims[static_cast<std::size_t>(j)];
    e.blocks[static_cast<std::size_t>(j)] = CMatrix::Identity(d, d);
  }
  return e;
}

using Site = MatrixProductState::Site;

Env transfer_left(const Env& env, const Site& a, const Bond& lb, const Bond& rb, const CMatrix* op) {
  const int d = a.dim();
  const int nl = lb.sectors();
  const int dop = op ? operator_charge(*op, a.phys_charge) : 0;
  Env out;
  out.delta = env.delta - dop;
  out.blocks.resize(static_cast<std::size_t>(rb.sectors()));
  for (int r = 0; r < rb.sectors(); ++r) {
    const int rk = rb.find(rb.charges[static_cast<std::size_t>(r)] + out.delta);
    if (rk >= 0) out.blocks[static_cast<std::size_t>(r)] = CMatrix::Zero(rb.dims[r], rb.dims[rk]);
  }
  for (int l = 0; l < nl; ++l) {
    const CMatrix& e = env.blocks[static_cast<std::size_t>(l)];
    if (e.size() == 0) continue;
    const int ql = lb.charges[static_cast<std::size_t>(l)];
    const int lk = lb.find(ql + env.delta);
    if (lk < 0) continue;
    for (int s = 0; s < d; ++s) {
      const CMatrix& bk = a.blocks[static_cast<std::size_t>(s * nl + lk)];
      if (bk.size() == 0) continue;
      const CMatrix t = e * bk;
      for (int sp = 0; sp < d; ++sp) {
        const Complex w = op ? (*op)(sp, s) : (sp == s ? Complex{1.0} : Complex{});
        if (w == Complex{}) continue;
        const CMatrix& bb = a.blocks[static_cast<std::size_t>(sp * nl + l)];
        if (bb.size() == 0) continue;
        const int r = rb.find(ql + a.phys_charge[static_cast<std::size_t>(sp)]);
        out.blocks[static_cast<std::size_t>(r)].noalias() += w * (bb.adjoint() * t);
      }
    }
  }
  return out;
}

Env transfer_right(const Env& env, const Site& a, const Bond& lb, const Bond& rb, const CMatrix* op) {
  const int d = a.dim();
  const int nl = lb.sectors();
  const int dop = op ? operator_charge(*op, a.phys_charge) : 0;
  Env out;
  out.delta = env.delta + dop;
  out.blocks.resize(static_cast<std::size_t>(nl));
  for (int l = 0; l < nl; ++l) {
    const int ql = lb.charges[static_cast<std::size_t>(l)];
    const int lk = lb.find(ql + out.delta);
    if (lk < 0) continue;
    CMatrix acc = CMatrix::Zero(lb.dims[lk], lb.dims[l]);
    for (int sp = 0; sp < d; ++sp) {
      const CMatrix& bb = a.blocks[static_cast<std::size_t>(sp * nl + l)];
      if (bb.size() == 0) continue;
      const int r = rb.find(ql + a.phys_charge[static_cast<std::size_t>(sp)]);
      const CMatrix& e = env.blocks[static_cast<std::size_t>(r)];
      if (e.size() == 0) continue;
      const CMatrix t = e * bb.adjoint();
      for (int s = 0; s < d; ++s) {
        const Complex w = op ? (*op)(sp, s) : (sp == s ? Complex{1.0} : Complex{});
        if (w == Complex{}) continue;
        const CMatrix& bk = a.blocks[static_cast<std::size_t>(s * nl + lk)];
        if (bk.size() == 0) continue;
        acc.noalias() += w * (bk * t);
      }
    }
    out.blocks[static_cast<std::size_t>(l)] = std::move(acc);
  }
  return out;
}

Complex close(const Env& left, const Env& right) {
  if (left.delta != right.delta) return {};
  Complex v{};
  for (std::size_t j = 0; j < left.blocks.size(); ++j) {
    if (left.blocks[j].size() == 0 || right.blocks[j].size() == 0) continue;
    v += (left.blocks[j].cwiseProduct(right.blocks[j].transpose())).sum();
  }
  return v;
}

std::vector<Env> left_envs(const MatrixProductState& st) {
  std::vector<Env> envs;
  envs.reserve(static_cast<std::size_t>(st.num_sites() + 1));
  envs.push_back(boundary_env(st.bond(0)));
  for (int k = 0; k < st.num_sites(); ++k)
    envs.push_back(transfer_left(envs.back(), st.site(k), st.bond(k), st.bond(k + 1), nullptr));
  return envs;
}

std::vector<Env> right_envs(const MatrixProductState& st) {
  const int n = st.num_sites();
  std::vector<Env> envs(static_cast<std::size_t>(n + 1));
  envs[static_cast<std::size_t>(n)] = boundary_env(st.bond(n));
  for (int k = n - 1; k >= 0; --k)
    envs[static_cast<std::size_t>(k)] =
        transfer_right(envs[static_cast<std::size_t>(k + 1)], st.site(k), st.bond(k), st.bond(k + 1), nullptr);
  return envs;
}

CMatrix site_rdm(const MatrixProductState& st, int k, const Env& left, const Env& right) {
  const Site& a = st.site(k);
  const Bond& lb = st.bond(k);
  const Bond& rb = st.bond(k + 1);
  const int d = a.dim();
  const int nl = lb.sectors();
  CMatrix rho = CMatrix::Zero(d, d);
  for (int l = 0; l < nl; ++l) {
    const CMatrix& e = left.blocks[static_cast<std::size_t>(l)];
    if (e.size() == 0) continue;
    const int ql = lb.charges[static_cast<std::size_t>(l)];
    std::vector<CMatrix> x(static_cast<std::size_t>(d)), y(static_cast<std::size_t>(d));
    for (int s = 0; s < d; ++s) {
      const CMatrix& b = a.blocks[static_cast<std::size_t>(s * nl + l)];
      if (b.size() == 0) continue;
      const int r = rb.find(ql + a.phys_charge[static_cast<std::size_t>(s)]);
      x[static_cast<std::size_t>(s)] = e * b;
      y[static_cast<std::size_t>(s)] = right.blocks[static_cast<std::size_t>(r)] * b.adjoint();
    }
    for (int s = 0; s < d; ++s) {
      if (x[static_cast<std::size_t>(s)].size() == 0) continue;
      for (int sp = 0; sp < d; ++sp) {
        if (y[static_cast<std::size_t>(sp)].size() == 0) continue;
        if (a.phys_charge[static_cast<std::size_t>(s)] != a.phys_charge[static_cast<std::size_t>(sp)]) continue;
        rho(s, sp) += (x[static_cast<std::size_t>(s)].cwiseProduct(y[static_cast<std::size_t>(sp)].transpose())).sum();
      }
    }
  }
  return rho;
}

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvalidArgument("truncated MPS checkpoint");
  return v;
}

constexpr char kMagic[8] = {'H', 'T', 'C', 'M', 'P', 'S', '0', '1'};

}  // namespace

int Bond::find(int charge) const {
  auto it = std::lower_bound(charges.begin(), charges.end(), charge);
  if (it == charges.end() || *it != charge) return -1;
  return static_cast<int>(it - charges.begin());
}

Index Bond::total() const { return std::accumulate(dims.begin(), dims.end(), Index{0}); }

Index Bond::offset(int sector) const {
  return std::accumulate(dims.begin(), dims.begin() + sector, Index{0});
}

MatrixProductState MatrixProductState::from_product(const ProductState& product, const HTCParams& params) {
  params.validate();
  if (static_cast<int>(product.molecules.size()) != params.n_molecules)
    throw InvalidArgument("product state has the wrong number of molecules");
  MatrixProductState st;
  const int dv = params.vib_dim();
  std::vector<const CVector*> local;
  Site cav;
  cav.molecule = 0;
  for (int n = 0; n < params.cavity_dim(); ++n) cav.phys_charge.push_back(n);
  st.sites_.push_back(cav);
  local.push_back(&product.cavity);
  for (int i = 1; i <= params.n_molecules; ++i) {
    Site m;
    m.molecule = i;
    for (int s = 0; s < params.molecule_dim(); ++s) m.phys_charge.push_back(s / dv);
    st.sites_.push_back(m);
    local.push_back(&product.molecules[static_cast<std::size_t>(i - 1)]);
  }
  st.bonds_.push_back(Bond{{0}, {1}});
  for (std::size_t k = 0; k < st.sites_.size(); ++k) {
    Site& a = st.sites_[k];
    const CVector& c = *local[k];
    if (c.size() != a.dim()) throw InvalidArgument("product state factor has the wrong dimension");
    const Bond& lb = st.bonds_[k];
    std::vector<int> reach;
    for (int q : lb.charges)
      for (int s = 0; s < a.dim(); ++s)
        if (c(s) != Complex{}) reach.push_back(q + a.phys_charge[static_cast<std::size_t>(s)]);
    std::sort(reach.begin(), reach.end());
    reach.erase(std::unique(reach.begin(), reach.end()), reach.end());
    Bond rb{reach, std::vector<Index>(reach.size(), 1)};
    a.blocks.assign(static_cast<std::size_t>(a.dim() * lb.sectors()), CMatrix());
    for (int s = 0; s < a.dim(); ++s) {
      for (int l = 0; l < lb.sectors(); ++l) {
        const int r = rb.find(lb.charges[static_cast<std::size_t>(l)] + a.phys_charge[static_cast<std::size_t>(s)]);
        if (r < 0) continue;
        a.blocks[static_cast<std::size_t>(s * lb.sectors() + l)] = CMatrix::Constant(1, 1, c(s));
      }
    }
    st.bonds_.push_back(std::move(rb));
  }
  if (st.bonds_.back().sectors() != 1)
    throw InvalidArgument("initial state must have a definite excitation number");
  const double n = st.norm();
  if (!(n > 0.0)) throw InvalidArgument("initial state has zero norm");
  st.right_canonicalize();
  return st;
}

int MatrixProductState::site_of_molecule(int molecule) const {
  if (molecule < 1 || molecule > n_molecules()) throw InvalidArgument("molecule index out of range");
  for (int k = 0; k < num_sites(); ++k)
    if (sites_[static_cast<std::size_t>(k)].molecule == molecule) return k;
  throw InvalidArgument("molecule not found in chain");
}

Index MatrixProductState::max_bond_dim() const {
  Index m = 0;
  for (const Bond& b : bonds_) m = std::max(m, b.total());
  return m;
}

double MatrixProductState::norm() const {
  const std::vector<Env> envs = left_envs(*this);
  return std::sqrt(std::max(0.0, close(envs.back(), boundary_env(bonds_.back())).real()));
}

std::vector<CMatrix> MatrixProductState::dense_site(int k) const {
  const Site& a = site(k);
  const Bond& lb = bond(k);
  const Bond& rb = bond(k + 1);
  std::vector<CMatrix> out(static_cast<std::size_t>(a.dim()), CMatrix::Zero(lb.total(), rb.total()));
  for (int s = 0; s < a.dim(); ++s) {
    for (int l = 0; l < lb.sectors(); ++l) {
      const CMatrix& b = a.blocks[static_cast<std::size_t>(s * lb.sectors() + l)];
      if (b.size() == 0) continue;
      const int r = rb.find(lb.charges[static_cast<std::size_t>(l)] + a.phys_charge[static_cast<std::size_t>(s)]);
      out[static_cast<std::size_t>(s)].block(lb.offset(l), rb.offset(r), b.rows(), b.cols()) = b;
    }
  }
  return out;
}

CVector MatrixProductState::to_full_vector() const {
  // contract in chain order, then permute to cavity, molecule 1..N
  CMatrix psi = CMatrix::Ones(1, 1);
  std::vector<int> dims;
  for (int k = 0; k < num_sites(); ++k) {
    const std::vector<CMatrix> a = dense_site(k);
    const int d = site(k).dim();
    CMatrix next(psi.rows() * d, a[0].cols());
    for (Index p = 0; p < psi.rows(); ++p)
      for (int s = 0; s < d; ++s) next.row(p * d + s) = psi.row(p) * a[static_cast<std::size_t>(s)];
    psi = std::move(next);
    dims.push_back(d);
  }
  const CVector chain = psi.col(0);
  const int n = num_sites();
  std::vector<Index> target_stride(static_cast<std::size_t>(n));
  // target order: cavity (label 0) most significant, then molecules 1..N
  std::vector<int> dim_of_label(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) dim_of_label[static_cast<std::size_t>(site(k).molecule)] = dims[static_cast<std::size_t>(k)];
  std::vector<Index> stride_of_label(static_cast<std::size_t>(n));
  Index stride = 1;
  for (int lab = n - 1; lab >= 0; --lab) {
    stride_of_label[static_cast<std::size_t>(lab)] = stride;
    stride *= dim_of_label[static_cast<std::size_t>(lab)];
  }
  CVector out = CVector::Zero(chain.size());
  for (Index idx = 0; idx < chain.size(); ++idx) {
    Index rem = idx;
    Index t = 0;
    for (int k = n - 1; k >= 0; --k) {
      const int d = dims[static_cast<std::size_t>(k)];
      t += (rem % d) * stride_of_label[static_cast<std::size_t>(site(k).molecule)];
      rem /= d;
    }
    out(t) = chain(idx);
  }
  return out;
}

void MatrixProductState::right_canonicalize() {
  for (int k = num_sites() - 1; k >= 1; --k) {
    Site& a = sites_[static_cast<std::size_t>(k)];
    Site& prev = sites_[static_cast<std::size_t>(k - 1)];
    Bond& lb = bonds_[static_cast<std::size_t>(k)];
    const Bond& rb = bonds_[static_cast<std::size_t>(k + 1)];
    const Bond& pb = bonds_[static_cast<std::size_t>(k - 1)];
    const int nl = lb.sectors();
    const int d = a.dim();
    for (int l = 0; l < nl; ++l) {
      const int ql = lb.charges[static_cast<std::size_t>(l)];
      Index cols = 0;
      std::vector<Index> col_off(static_cast<std::size_t>(d), -1);
      for (int s = 0; s < d; ++s) {
        const int r = rb.find(ql + a.phys_charge[static_cast<std::size_t>(s)]);
        if (r < 0) continue;
        col_off[static_cast<std::size_t>(s)] = cols;
        cols += rb.dims[static_cast<std::size_t>(r)];
      }
      const Index rows = lb.dims[static_cast<std::size_t>(l)];
      CMatrix m = CMatrix::Zero(rows, cols);
      for (int s = 0; s < d; ++s) {
        const CMatrix& b = a.blocks[static_cast<std::size_t>(s * nl + l)];
        if (b.size() == 0) continue;
        m.block(0, col_off[static_cast<std::size_t>(s)], b.rows(), b.cols()) = b;
      }
      Eigen::BDCSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const RVector& sv = svd.singularValues();
      Index rank = 0;
      while (rank < sv.size() && sv(rank) > 1e-14 * std::max(1.0, sv(0))) ++rank;
      const CMatrix vh = svd.matrixV().leftCols(rank).adjoint();
      const CMatrix us = svd.matrixU().leftCols(rank) * sv.head(rank).asDiagonal();
      for (int s = 0; s < d; ++s) {
        CMatrix& b = a.blocks[static_cast<std::size_t>(s * nl + l)];
        const Index off = col_off[static_cast<std::size_t>(s)];
        if (off < 0) continue;
        const int r = rb.find(ql + a.phys_charge[static_cast<std::size_t>(s)]);
        b = vh.middleCols(off, rb.dims[static_cast<std::size_t>(r)]);
      }
      for (int s = 0; s < prev.dim(); ++s) {
        for (int p = 0; p < pb.sectors(); ++p) {
          if (pb.charges[static_cast<std::size_t>(p)] + prev.phys_charge[static_cast<std::size_t>(s)] != ql) continue;
          CMatrix& b = prev.blocks[static_cast<std::size_t>(s * pb.sectors() + p)];
          if (b.size() == 0) b = CMatrix::Zero(pb.dims[static_cast<std::size_t>(p)], rank);
          else b = b * us;
        }
      }
      lb.dims[static_cast<std::size_t>(l)] = rank;
    }
  }
  center_ = 0;
}

void MatrixProductState::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InvalidArgument("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic, sizeof(kMagic));
  put<std::int32_t>(os, num_sites());
  put<std::int32_t>(os, cavity_pos_);
  put<std::int32_t>(os, center_);
  put<double>(os, truncation_weight_);
  put<double>(os, max_step_truncation_);
  for (const Bond& b : bonds_) {
    put<std::int32_t>(os, b.sectors());
    for (int j = 0; j < b.sectors(); ++j) {
      put<std::int32_t>(os, b.charges[static_cast<std::size_t>(j)]);
      put<std::int64_t>(os, b.dims[static_cast<std::size_t>(j)]);
    }
  }
  for (const Site& a : sites_) {
    put<std::int32_t>(os, a.molecule);
    put<std::int32_t>(os, a.dim());
    for (int c : a.phys_charge) put<std::int32_t>(os, c);
    put<std::int64_t>(os, static_cast<std::int64_t>(a.blocks.size()));
    for (const CMatrix& b : a.blocks) {
      put<std::int64_t>(os, b.rows());
      put<std::int64_t>(os, b.cols());
      for (Index j = 0; j < b.size(); ++j) {
        put<double>(os, b.data()[j].real());
        put<double>(os, b.data()[j].imag());
      }
    }
  }
  if (!os) throw NumericalError("failed writing checkpoint: " + path.string());
}

MatrixProductState MatrixProductState::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open checkpoint: " + path.string());
  char magic[sizeof(kMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw InvalidArgument("not an MPS checkpoint");
  MatrixProductState st;
  const int n = get<std::int32_t>(is);
  if (n < 2 || n > 1 << 20) throw InvalidArgument("corrupt MPS checkpoint");
  st.cavity_pos_ = get<std::int32_t>(is);
  st.center_ = get<std::int32_t>(is);
  st.truncation_weight_ = get<double>(is);
  st.max_step_truncation_ = get<double>(is);
  for (int k = 0; k <= n; ++k) {
    Bond b;
    const int ns = get<std::int32_t>(is);
    for (int j = 0; j < ns; ++j) {
      b.charges.push_back(get<std::int32_t>(is));
      b.dims.push_back(get<std::int64_t>(is));
    }
    st.bonds_.push_back(std::move(b));
  }
  for (int k = 0; k < n; ++k) {
    Site a;
    a.molecule = get<std::int32_t>(is);
    const int d = get<std::int32_t>(is);
    for (int s = 0; s < d; ++s) a.phys_charge.push_back(get<std::int32_t>(is));
    const auto nb = get<std::int64_t>(is);
    if (nb != static_cast<std::int64_t>(d) * st.bonds_[static_cast<std::size_t>(k)].sectors())
      throw InvalidArgument("corrupt MPS checkpoint");
    for (std::int64_t j = 0; j < nb; ++j) {
      const auto rows = get<std::int64_t>(is);
      const auto cols = get<std::int64_t>(is);
      CMatrix b(rows, cols);
      for (Index e = 0; e < b.size(); ++e) {
        const double re = get<double>(is);
        const double im = get<double>(is);
        b.data()[e] = {re, im};
      }
      a.blocks.push_back(std::move(b));
    }
    st.sites_.push_back(std::move(a));
  }
  return st;
}

EvolutionConfig EvolutionConfig::defaults(const HTCParams& params) {
  EvolutionConfig c;
  c.dt = params.period() / 400.0;
  c.t_final = params.period();
  c.sample_times = {0.0, c.t_final};
  return c;
}

void EvolutionConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw InvalidArgument("t_final must be non-negative");
  if (chi_max < 1) throw InvalidArgument("chi_max must be at least 1");
  if (!(svd_cutoff >= 0.0)) throw InvalidArgument("svd_cutoff must be non-negative");
  if (!(truncation_alarm > 0.0)) throw InvalidArgument("truncation_alarm must be positive");
  if (trotter_order != 2 && trotter_order != 4) throw InvalidArgument("trotter_order must be 2 or 4");
  for (std::size_t j = 0; j < sample_times.size(); ++j) {
    if (!(sample_times[j] >= 0.0)) throw InvalidArgument("sample times must be non-negative");
    if (j > 0 && sample_times[j] < sample_times[j - 1]) throw InvalidArgument("sample times must be ascending");
  }
}

TebdEngine::TebdEngine(const HamiltonianTerms& terms, const EvolutionConfig& config)
    : terms_(terms), config_(config) {
  config_.validate();
  if (terms_.n_molecules < 1) throw InvalidArgument("TEBD needs at least one molecule");
}

TebdEngine::Gate TebdEngine::make_gate(const CMatrix& u, int dc, int dm, bool cavity_left,
                                       const std::vector<int>& cav_charge, const std::vector<int>& mol_charge) {
  Gate g;
  g.d_left_in = cavity_left ? dc : dm;
  g.d_right_in = cavity_left ? dm : dc;
  g.d_left_out = g.d_right_in;
  g.d_right_out = g.d_left_in;
  g.c_left_in = cavity_left ? cav_charge : mol_charge;
  g.c_right_in = cavity_left ? mol_charge : cav_charge;
  g.c_left_out = g.c_right_in;
  g.c_right_out = g.c_left_in;
  std::map<int, GateSector> by_charge;
  for (int a = 0; a < g.d_left_in; ++a)
    for (int b = 0; b < g.d_right_in; ++b)
      by_charge[g.c_left_in[static_cast<std::size_t>(a)] + g.c_right_in[static_cast<std::size_t>(b)]].in.emplace_back(a, b);
  for (int a = 0; a < g.d_left_out; ++a)
    for (int b = 0; b < g.d_right_out; ++b)
      by_charge[g.c_left_out[static_cast<std::size_t>(a)] + g.c_right_out[static_cast<std::size_t>(b)]].out.emplace_back(a, b);
  // two-site index in u is n * dm + s
  auto uindex = [&](int left, int right, bool left_is_cavity) {
    return left_is_cavity ? left * dm + right : right * dm + left;
  };
  for (auto& [charge, sec] : by_charge) {
    sec.block = CMatrix::Zero(static_cast<Index>(sec.out.size()), static_cast<Index>(sec.in.size()));
    for (std::size_t o = 0; o < sec.out.size(); ++o) {
      const int row = uindex(sec.out[o].first, sec.out[o].second, !cavity_left);
      for (std::size_t i = 0; i < sec.in.size(); ++i) {
        const int col = uindex(sec.in[i].first, sec.in[i].second, cavity_left);
        sec.block(static_cast<Index>(o), static_cast<Index>(i)) = u(row, col);
      }
    }
    g.sector_charge.push_back(charge);
    g.sectors.push_back(std::move(sec));
  }
  return g;
}

void TebdEngine::apply(MatrixProductState& st, int k, const Gate& gate, bool move_right) {
  auto& a1 = st.sites_[static_cast<std::size_t>(k)];
  auto& a2 = st.sites_[static_cast<std::size_t>(k + 1)];
  const Bond& lb = st.bonds_[static_cast<std::size_t>(k)];
  const Bond& mb = st.bonds_[static_cast<std::size_t>(k + 1)];
  const Bond& rb = st.bonds_[static_cast<std::size_t>(k + 2)];
  if (a1.dim() != gate.d_left_in || a2.dim() != gate.d_right_in) throw InvalidArgument("gate does not match sites");
  const int nl = lb.sectors();
  const int nm = mb.sectors();

  struct Piece {
    int l, g, r;
    RowMatrix data;  // out pair x (D_l * D_r), column-major reshape of each row
  };
  std::vector<Piece> pieces;
  for (int l = 0; l < nl; ++l) {
    const int ql = lb.charges[static_cast<std::size_t>(l)];
    const Index dl = lb.dims[static_cast<std::size_t>(l)];
    if (dl == 0) continue;
    for (int g = 0; g < static_cast<int>(gate.sectors.size()); ++g) {
      const int r = rb.find(ql + gate.sector_charge[static_cast<std::size_t>(g)]);
      if (r < 0) continue;
      const Index dr = rb.dims[static_cast<std::size_t>(r)];
      if (dr == 0) continue;
      const GateSector& sec = gate.sectors[static_cast<std::size_t>(g)];
      RowMatrix t = RowMatrix::Zero(static_cast<Index>(sec.in.size()), dl * dr);
      bool any = false;
      for (std::size_t p = 0; p < sec.in.size(); ++p) {
        const auto [s1, s2] = sec.in[p];
        const int m = mb.find(ql + gate.c_left_in[static_cast<std::size_t>(s1)]);
        if (m < 0) continue;
        const CMatrix& b1 = a1.blocks[static_cast<std::size_t>(s1 * nl + l)];
        const CMatrix& b2 = a2.blocks[static_cast<std::size_t>(s2 * nm + m)];
        if (b1.size() == 0 || b2.size() == 0) continue;
        CMatrix prod = b1 * b2;
        t.row(static_cast<Index>(p)) = Eigen::Map<const Eigen::RowVectorXcd>(prod.data(), prod.size());
        any = true;
      }
      if (!any) continue;
      pieces.push_back({l, g, r, sec.block * t});
    }
  }

  // group output rows by the charge of the new middle bond
  struct Group {
    std::map<std::pair<int, int>, Index> row_off;  // (l, s1') -> offset
    std::map<std::pair<int, int>, Index> col_off;  // (s2', r) -> offset
    Index rows = 0, cols = 0;
    CMatrix m;
    Eigen::BDCSVD<CMatrix> svd;
    Index keep = 0;
  };
  std::map<int, Group> groups;
  for (const Piece& pc : pieces) {
    const int ql = lb.charges[static_cast<std::size_t>(pc.l)];
    for (const auto& [s1, s2] : gate.sectors[static_cast<std::size_t>(pc.g)].out) {
      Group& gr = groups[ql + gate.c_left_out[static_cast<std::size_t>(s1)]];
      if (gr.row_off.emplace(std::make_pair(pc.l, s1), gr.rows).second) gr.rows += lb.dims[static_cast<std::size_t>(pc.l)];
      if (gr.col_off.emplace(std::make_pair(s2, pc.r), gr.cols).second) gr.cols += rb.dims[static_cast<std::size_t>(pc.r)];
    }
  }
  for (auto& [q, gr] : groups) gr.m = CMatrix::Zero(gr.rows, gr.cols);
  for (const Piece& pc : pieces) {
    const int ql = lb.charges[static_cast<std::size_t>(pc.l)];
    const Index dl = lb.dims[static_cast<std::size_t>(pc.l)];
    const Index dr = rb.dims[static_cast<std::size_t>(pc.r)];
    const auto& out = gate.sectors[static_cast<std::size_t>(pc.g)].out;
    for (std::size_t o = 0; o < out.size(); ++o) {
      const auto [s1, s2] = out[o];
      Group& gr = groups[ql + gate.c_left_out[static_cast<std::size_t>(s1)]];
      const Index ro = gr.row_off.at({pc.l, s1});
      const Index co = gr.col_off.at({s2, pc.r});
      Eigen::Map<const CMatrix> blk(pc.data.row(static_cast<Index>(o)).data(), dl, dr);
      gr.m.block(ro, co, dl, dr) = blk;
    }
  }

  // SVD per charge, global truncation
  std::vector<std::pair<double, int>> all;
  double total = 0.0;
  for (auto& [q, gr] : groups) {
    gr.svd.compute(gr.m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& sv = gr.svd.singularValues();
    for (Index j = 0; j < sv.size(); ++j) {
      all.emplace_back(sv(j), q);
      total += sv(j) * sv(j);
    }
  }
  if (!std::isfinite(total)) throw NumericalError("non-finite singular values in TEBD step");
  if (!(total > 0.0)) throw NumericalError("TEBD state collapsed to zero norm");
  std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  const double floor = config_.svd_cutoff * std::sqrt(total);
  double kept = 0.0;
  std::size_t n_keep = 0;
  for (; n_keep < all.size() && n_keep < static_cast<std::size_t>(config_.chi_max); ++n_keep) {
    if (all[n_keep].first <= floor) break;
    kept += all[n_keep].first * all[n_keep].first;
    ++groups[all[n_keep].second].keep;
  }
  const double discarded = std::max(0.0, 1.0 - kept / total);
  st.truncation_weight_ += discarded;
  st.max_step_truncation_ = std::max(st.max_step_truncation_, discarded);
  if (discarded > config_.truncation_alarm) {
    ++diagnostics_.alarms;
    if (config_.throw_on_alarm)
      throw TruncationAlarm("truncation discarded weight " + std::to_string(discarded) + " above alarm");
  }
  const double scale = 1.0 / std::sqrt(kept);

  Bond nb;
  for (const auto& [q, gr] : groups) {
    if (gr.keep == 0) continue;
    nb.charges.push_back(q);
    nb.dims.push_back(gr.keep);
  }
  Site n1, n2;
  n1.molecule = a2.molecule;
  n2.molecule = a1.molecule;
  n1.phys_charge = gate.c_left_out;
  n2.phys_charge = gate.c_right_out;
  const int nn = nb.sectors();
  n1.blocks.assign(static_cast<std::size_t>(gate.d_left_out * nl), CMatrix());
  n2.blocks.assign(static_cast<std::size_t>(gate.d_right_out * nn), CMatrix());
  for (int l = 0; l < nl; ++l) {
    const int ql = lb.charges[static_cast<std::size_t>(l)];
    for (int s1 = 0; s1 < gate.d_left_out; ++s1) {
      const int q = ql + gate.c_left_out[static_cast<std::size_t>(s1)];
      const int m = nb.find(q);
      if (m < 0) continue;
      const Group& gr = groups.at(q);
      CMatrix& b = n1.blocks[static_cast<std::size_t>(s1 * nl + l)];
      auto it = gr.row_off.find({l, s1});
      if (it == gr.row_off.end()) {
        b = CMatrix::Zero(lb.dims[static_cast<std::size_t>(l)], gr.keep);
        continue;
      }
      b = gr.svd.matrixU().block(it->second, 0, lb.dims[static_cast<std::size_t>(l)], gr.keep);
      if (!move_right) b = b * (gr.svd.singularValues().head(gr.keep) * scale).asDiagonal();
    }
  }
  for (int m = 0; m < nn; ++m) {
    const int q = nb.charges[static_cast<std::size_t>(m)];
    const Group& gr = groups.at(q);
    for (int s2 = 0; s2 < gate.d_right_out; ++s2) {
      const int r = rb.find(q + gate.c_right_out[static_cast<std::size_t>(s2)]);
      if (r < 0) continue;
      const Index dr = rb.dims[static_cast<std::size_t>(r)];
      CMatrix& b = n2.blocks[static_cast<std::size_t>(s2 * nn + m)];
      auto it = gr.col_off.find({s2, r});
      if (it == gr.col_off.end()) {
        b = CMatrix::Zero(gr.keep, dr);
        continue;
      }
      b = gr.svd.matrixV().block(it->second, 0, dr, gr.keep).adjoint();
      if (move_right) b = (gr.svd.singularValues().head(gr.keep) * scale).asDiagonal() * b;
    }
  }
  a1 = std::move(n1);
  a2 = std::move(n2);
  st.bonds_[static_cast<std::size_t>(k + 1)] = std::move(nb);
  st.center_ = move_right ? k + 1 : k;
}

void TebdEngine::step(MatrixProductState& st, double dt) {
  if (st.cavity_pos_ != 0) throw InvalidArgument("TEBD step expects the cavity at site 0");
  if (st.num_sites() != terms_.n_molecules + 1) throw InvalidArgument("state does not match the Hamiltonian");
  const double tau = 0.5 * dt;
  auto found = cached_.find(tau);
  if (found == cached_.end()) {
    std::vector<GatePair> gates;
    const int dc = terms_.cavity_dim;
    const int dm = terms_.molecule_dim;
    std::vector<int> cav_charge(static_cast<std::size_t>(dc)), mol_charge(static_cast<std::size_t>(dm));
    for (int n = 0; n < dc; ++n) cav_charge[static_cast<std::size_t>(n)] = n;
    for (int s = 0; s < dm; ++s) mol_charge[static_cast<std::size_t>(s)] = s / (dm / 2);
    for (int i = 0; i < terms_.n_molecules; ++i) {
      CMatrix h2 = terms_.cavity_coupling[static_cast<std::size_t>(i)];
      for (int n = 0; n < dc; ++n) h2.block(n * dm, n * dm, dm, dm) += terms_.onsite[static_cast<std::size_t>(i)];
      const CMatrix u = exp_hermitian(h2, tau);
      gates.push_back({make_gate(u, dc, dm, true, cav_charge, mol_charge),
                       make_gate(u, dc, dm, false, cav_charge, mol_charge)});
    }
    found = cached_.emplace(tau, std::move(gates)).first;
  }
  const std::vector<GatePair>& gates = found->second;
  const int n = st.num_sites();
  for (int j = 0; j + 1 < n; ++j) {
    const int mol = st.sites_[static_cast<std::size_t>(j + 1)].molecule;
    apply(st, j, gates[static_cast<std::size_t>(mol - 1)].cavity_left, true);
  }
  st.cavity_pos_ = n - 1;
  for (int j = n - 2; j >= 0; --j) {
    const int mol = st.sites_[static_cast<std::size_t>(j)].molecule;
    apply(st, j, gates[static_cast<std::size_t>(mol - 1)].cavity_right, false);
  }
  st.cavity_pos_ = 0;
  ++diagnostics_.steps;
  diagnostics_.truncation_weight = st.truncation_weight_;
  diagnostics_.max_step_truncation = std::max(diagnostics_.max_step_truncation, st.max_step_truncation_);
  diagnostics_.max_bond_dim = std::max(diagnostics_.max_bond_dim, st.max_bond_dim());
}

TebdDiagnostics evolve_tebd(MatrixProductState& state, const HamiltonianTerms& terms, const EvolutionConfig& config,
                            const MpsObserver& observer) {
  if (config.ehrenfest_mode) throw InvalidArgument("mean-field mode is run through evolve_ehrenfest");
  TebdEngine engine(terms, config);
  std::vector<double> samples = config.sample_times;
  if (samples.empty()) samples = {0.0, config.t_final};
  double t = 0.0;
  for (double ts : samples) {
    const double interval = ts - t;
    if (interval > 0.0) {
      const int n = static_cast<int>(std::ceil(interval / config.dt - 1e-9));
      const double h = interval / n;
      for (int j = 0; j < n; ++j) {
        if (config.trotter_order == 4) {
          const double w = 1.0 / (4.0 - std::cbrt(4.0));
          for (double f : {w, w, 1.0 - 4.0 * w, w, w}) engine.step(state, f * h);
        } else {
          engine.step(state, h);
        }
      }
    }
    t = std::max(t, ts);
    if (observer) observer(ts, state);
  }
  return engine.diagnostics();
}

std::vector<MatrixProductState> evolve_tebd(MatrixProductState state, const HamiltonianTerms& terms,
                                            const EvolutionConfig& config) {
  std::vector<MatrixProductState> out;
  evolve_tebd(state, terms, config, [&](double, const MatrixProductState& s) { out.push_back(s); });
  return out;
}

std::vector<CMatrix> site_density_matrices(const MatrixProductState& state) {
  const std::vector<Env> left = left_envs(state);
  const std::vector<Env> right = right_envs(state);
  std::vector<CMatrix> out;
  for (int k = 0; k < state.num_sites(); ++k) {
    CMatrix rho = site_rdm(state, k, left[static_cast<std::size_t>(k)], right[static_cast<std::size_t>(k + 1)]);
    const Complex tr = rho.trace();
    if (!(std::abs(tr) > 0.0) || !std::isfinite(std::abs(tr))) throw NumericalError("degenerate site density matrix");
    rho /= tr;
    out.push_back(std::move(rho));
  }
  return out;
}

namespace {

CMatrix trace_out_electronic(const CMatrix& rho, int dm) {
  const int dv = dm / 2;
  return rho.block(0, 0, dv, dv) + rho.block(dv, dv, dv, dv);
}

}  // namespace

CMatrix reduced_vibrational_dm(const MatrixProductState& state, int molecule) {
  const int k = state.site_of_molecule(molecule);
  const std::vector<Env> left = left_envs(state);
  const std::vector<Env> right = right_envs(state);
  CMatrix rho = site_rdm(state, k, left[static_cast<std::size_t>(k)], right[static_cast<std::size_t>(k + 1)]);
  rho /= rho.trace();
  return trace_out_electronic(rho, state.site(k).dim());
}

Complex expectation(const MatrixProductState& state, const CMatrix& op, int site) {
  if (site < 0 || site >= state.num_sites()) throw InvalidArgument("site index out of range");
  const std::vector<Env> left = left_envs(state);
  const std::vector<Env> right = right_envs(state);
  const CMatrix rho = site_rdm(state, site, left[static_cast<std::size_t>(site)], right[static_cast<std::size_t>(site + 1)]);
  if (op.rows() != rho.rows() || op.cols() != rho.cols()) throw InvalidArgument("operator does not match the site");
  return (rho * op).trace() / rho.trace();
}

Complex correlator(const MatrixProductState& state, const CMatrix& op_a, int site_a, const CMatrix& op_b, int site_b) {
  const int n = state.num_sites();
  if (site_a < 0 || site_a >= n || site_b < 0 || site_b >= n || site_a == site_b)
    throw InvalidArgument("correlator needs two distinct valid sites");
  Env env = boundary_env(state.bond(0));
  for (int k = 0; k < n; ++k) {
    const CMatrix* op = k == site_a ? &op_a : (k == site_b ? &op_b : nullptr);
    env = transfer_left(env, state.site(k), state.bond(k), state.bond(k + 1), op);
  }
  const double nn = state.norm();
  return close(env, boundary_env(state.bond(n))) / (nn * nn);
}

double energy(const MatrixProductState& state, const HamiltonianTerms& terms) {
  const int n = state.num_sites();
  if (terms.n_molecules + 1 != n) throw InvalidArgument("state does not match the Hamiltonian");
  const std::vector<Env> left = left_envs(state);
  const std::vector<Env> right = right_envs(state);
  const double norm2 = close(left.back(), boundary_env(state.bond(n))).real();
  double e = 0.0;
  for (int k = 0; k < n; ++k) {
    const int mol = state.site(k).molecule;
    if (mol == 0) continue;
    const CMatrix rho = site_rdm(state, k, left[static_cast<std::size_t>(k)], right[static_cast<std::size_t>(k + 1)]);
    e += (rho * terms.onsite[static_cast<std::size_t>(mol - 1)]).trace().real();
  }
  // coupling: sum over cavity matrix units |n'><n| (x) M_{n'n}, one sweep each side of the cavity
  const int c = state.cavity_position();
  const int dc = terms.cavity_dim;
  const int dm = terms.molecule_dim;
  for (int np = 0; np < dc; ++np) {
    for (int nc = 0; nc < dc; ++nc) {
      bool nonzero = false;
      for (int i = 0; i < terms.n_molecules && !nonzero; ++i)
        nonzero = !terms.cavity_coupling[static_cast<std::size_t>(i)].block(np * dm, nc * dm, dm, dm).isZero(0.0);
      if (!nonzero) continue;
      CMatrix unit = CMatrix::Zero(dc, dc);
      unit(np, nc) = 1.0;
      Env env = transfer_left(left[static_cast<std::size_t>(c)], state.site(c), state.bond(c), state.bond(c + 1), &unit);
      for (int k = c + 1; k < n; ++k) {
        const int mol = state.site(k).molecule;
        const CMatrix m = terms.cavity_coupling[static_cast<std::size_t>(mol - 1)].block(np * dm, nc * dm, dm, dm);
        if (!m.isZero(0.0)) {
          const Env with = transfer_left(env, state.site(k), state.bond(k), state.bond(k + 1), &m);
          e += close(with, right[static_cast<std::size_t>(k + 1)]).real() / norm2;
        }
        if (k + 1 < n) env = transfer_left(env, state.site(k), state.bond(k), state.bond(k + 1), nullptr);
      }
      Env renv = transfer_right(right[static_cast<std::size_t>(c + 1)], state.site(c), state.bond(c), state.bond(c + 1), &unit);
      for (int k = c - 1; k >= 0; --k) {
        const int mol = state.site(k).molecule;
        const CMatrix m = terms.cavity_coupling[static_cast<std::size_t>(mol - 1)].block(np * dm, nc * dm, dm, dm);
        if (!m.isZero(0.0)) {
          const Env with = transfer_right(renv, state.site(k), state.bond(k), state.bond(k + 1), &m);
          e += close(left[static_cast<std::size_t>(k)], with).real() / norm2;
        }
        if (k > 0) renv = transfer_right(renv, state.site(k), state.bond(k), state.bond(k + 1), nullptr);
      }
    }
  }
  return e;
}

double excitation_number(const MatrixProductState& state) {
  const std::vector<CMatrix> rhos = site_density_matrices(state);
  double total = 0.0;
  for (int k = 0; k < state.num_sites(); ++k) {
    const auto& pc = state.site(k).phys_charge;
    for (int s = 0; s < static_cast<int>(pc.size()); ++s) total += rhos[static_cast<std::size_t>(k)](s, s).real() * pc[static_cast<std::size_t>(s)];
  }
  return total;
}

}  // namespace htc
