#include "htc/semiclassical.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "htc/parallel.hpp"

namespace htc {

TrajectoryState sample_initial(const InitialStateSpec& spec, const HTCParams& params, CounterRng& rng) {
  params.validate();
  const int n = params.n_molecules;
  if (spec.kind == InitialStateSpec::Kind::MoleculeExcited && (spec.index < 1 || spec.index > n))
    throw InvalidArgument("initial molecule index out of range");
  TrajectoryState st;
  st.y.assign(3 + 5 * static_cast<std::size_t>(n), 0.0);
  auto sign = [&] { return (rng() >> 63) ? 1.0 : -1.0; };
  std::normal_distribution<double> vac(0.0, std::sqrt(0.5));
  st.a(0) = sign();
  st.a(1) = sign();
  st.a(2) = spec.kind == InitialStateSpec::Kind::CavityExcited ? 1.0 : -1.0;
  for (int i = 1; i <= n; ++i) {
    st.s(i, 0) = sign();
    st.s(i, 1) = sign();
    st.s(i, 2) = (spec.kind == InitialStateSpec::Kind::MoleculeExcited && spec.index == i) ? 1.0 : -1.0;
    st.x(i) = vac(rng);
    st.p(i) = vac(rng);
  }
  return st;
}

double weyl_energy(const TrajectoryState& st, const HTCParams& params, const std::vector<double>& eps) {
  const double g = params.coupling();
  const double lnu = params.huang_rhys_lambda * params.nu * std::sqrt(2.0);
  double e = 0.0;
  for (int i = 1; i <= st.n_molecules(); ++i) {
    const double ne = 0.5 * (1.0 + st.s(i, 2));
    e += 0.5 * params.nu * (st.x(i) * st.x(i) + st.p(i) * st.p(i)) - lnu * st.x(i) * ne +
         (eps[static_cast<std::size_t>(i - 1)] + params.detuning) * ne;
    e += 0.5 * g * (st.a(0) * st.s(i, 0) + st.a(1) * st.s(i, 1));
  }
  return e;
}

void trajectory_rhs(const TrajectoryState& st, const HTCParams& params, const std::vector<double>& eps,
                    std::vector<double>& dy) {
  const int n = st.n_molecules();
  const double g = params.coupling();
  const double nu = params.nu;
  const double lnu = params.huang_rhys_lambda * nu * std::sqrt(2.0);
  dy.assign(st.y.size(), 0.0);
  double sx = 0.0, sy = 0.0;
  for (int i = 1; i <= n; ++i) {
    sx += st.s(i, 0);
    sy += st.s(i, 1);
  }
  // d(spin)/dt = 2 grad(H) x spin
  const double hx = 0.5 * g * sx;
  const double hy = 0.5 * g * sy;
  dy[0] = 2.0 * hy * st.a(2);
  dy[1] = -2.0 * hx * st.a(2);
  dy[2] = 2.0 * (hx * st.a(1) - hy * st.a(0));
  const double mx = 0.5 * g * st.a(0);
  const double my = 0.5 * g * st.a(1);
  for (int i = 1; i <= n; ++i) {
    const std::size_t b = TrajectoryState::base(i);
    const double mz = 0.5 * (eps[static_cast<std::size_t>(i - 1)] + params.detuning) - 0.5 * lnu * st.x(i);
    const double s0 = st.s(i, 0), s1 = st.s(i, 1), s2 = st.s(i, 2);
    dy[b + 0] = 2.0 * (my * s2 - mz * s1);
    dy[b + 1] = 2.0 * (mz * s0 - mx * s2);
    dy[b + 2] = 2.0 * (mx * s1 - my * s0);
    dy[b + 3] = nu * st.p(i);
    dy[b + 4] = -nu * st.x(i) + lnu * 0.5 * (1.0 + s2);
  }
}

namespace {

// Flow generators in trajectory layout: for every spin the rotation vector
// Omega = 2 grad_s H (ds/dt = Omega x s), for every (x, p) its velocity.
void generators(const std::vector<double>& y, int n, const HTCParams& params, const std::vector<double>& eps,
                std::vector<double>& w) {
  const double g = params.coupling();
  const double nu = params.nu;
  const double lnu = params.huang_rhys_lambda * nu * std::sqrt(2.0);
  w.resize(y.size());
  double sx = 0.0, sy = 0.0;
  for (int i = 1; i <= n; ++i) {
    const std::size_t b = TrajectoryState::base(i);
    sx += y[b];
    sy += y[b + 1];
  }
  w[0] = g * sx;
  w[1] = g * sy;
  w[2] = 0.0;
  for (int i = 1; i <= n; ++i) {
    const std::size_t b = TrajectoryState::base(i);
    w[b + 0] = g * y[0];
    w[b + 1] = g * y[1];
    w[b + 2] = eps[static_cast<std::size_t>(i - 1)] + params.detuning - lnu * y[b + 3];
    w[b + 3] = nu * y[b + 4];
    w[b + 4] = -nu * y[b + 3] + lnu * 0.5 * (1.0 + y[b + 2]);
  }
}

// s <- exp(theta x) s by Rodrigues' formula.
void rotate(const double* theta, const double* s, double* out) {
  const double t2 = theta[0] * theta[0] + theta[1] * theta[1] + theta[2] * theta[2];
  double f1, f2;
  if (t2 < 1e-8) {
    f1 = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    f2 = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  } else {
    const double t = std::sqrt(t2);
    f1 = std::sin(t) / t;
    f2 = (1.0 - std::cos(t)) / t2;
  }
  const double c0 = theta[1] * s[2] - theta[2] * s[1];
  const double c1 = theta[2] * s[0] - theta[0] * s[2];
  const double c2 = theta[0] * s[1] - theta[1] * s[0];
  const double d0 = theta[1] * c2 - theta[2] * c1;
  const double d1 = theta[2] * c0 - theta[0] * c2;
  const double d2 = theta[0] * c1 - theta[1] * c0;
  out[0] = s[0] + f1 * c0 + f2 * d0;
  out[1] = s[1] + f1 * c1 + f2 * d1;
  out[2] = s[2] + f1 * c2 + f2 * d2;
}

// out = exp(theta) y: spins rotated, quadratures translated.
void advance(const std::vector<double>& y, const std::vector<double>& theta, int n, std::vector<double>& out) {
  out.resize(y.size());
  rotate(&theta[0], &y[0], &out[0]);
  for (int i = 1; i <= n; ++i) {
    const std::size_t b = TrajectoryState::base(i);
    rotate(&theta[b], &y[b], &out[b]);
    out[b + 3] = y[b + 3] + theta[b + 3];
    out[b + 4] = y[b + 4] + theta[b + 4];
  }
}

}  // namespace

void trajectory_step(TrajectoryState& st, const HTCParams& params, const std::vector<double>& eps, double dt) {
  thread_local std::vector<double> w1, w2, w3, w4, th, y2, y3, y4, ya;
  const int n = st.n_molecules();
  const std::size_t m = st.y.size();
  th.resize(m);
  generators(st.y, n, params, eps, w1);
  for (std::size_t j = 0; j < m; ++j) th[j] = 0.5 * dt * w1[j];
  advance(st.y, th, n, y2);
  generators(y2, n, params, eps, w2);
  for (std::size_t j = 0; j < m; ++j) th[j] = 0.5 * dt * w2[j];
  advance(st.y, th, n, y3);
  generators(y3, n, params, eps, w3);
  for (std::size_t j = 0; j < m; ++j) th[j] = dt * (w3[j] - 0.5 * w1[j]);
  advance(y2, th, n, y4);
  generators(y4, n, params, eps, w4);
  for (std::size_t j = 0; j < m; ++j) th[j] = dt / 12.0 * (3.0 * w1[j] + 2.0 * w2[j] + 2.0 * w3[j] - w4[j]);
  advance(st.y, th, n, ya);
  for (std::size_t j = 0; j < m; ++j) th[j] = dt / 12.0 * (-w1[j] + 2.0 * w2[j] + 2.0 * w3[j] + 3.0 * w4[j]);
  advance(ya, th, n, st.y);
}

WeylAccumulator::WeylAccumulator(int n_max)
    : n_max_(n_max), sum_(CMatrix::Zero(n_max + 1, n_max + 1)), sum_sq_(RMatrix::Zero(n_max + 1, n_max + 1)) {}

void WeylAccumulator::add(double x, double p) {
  const CMatrix k = wigner_kernels(n_max_, x, p);
  sum_ += k;
  sum_sq_ += k.cwiseAbs2();
  count_ += 1.0;
}

void WeylAccumulator::merge(const WeylAccumulator& o) {
  if (o.n_max_ != n_max_) throw InvalidArgument("WeylAccumulator: cutoff mismatch");
  sum_ += o.sum_;
  sum_sq_ += o.sum_sq_;
  count_ += o.count_;
}

CMatrix WeylAccumulator::raw_estimate() const {
  if (count_ <= 0.0) throw InvalidArgument("empty trajectory ensemble");
  // rho_ab = tr(rho |b><a|) = 2 pi E[W_{|b><a|}] = 2 pi E[conj K_ab]
  return (2.0 * kPi / count_) * sum_.conjugate();
}

RMatrix WeylAccumulator::standard_error() const {
  if (count_ <= 1.0) throw InvalidArgument("standard error needs at least two trajectories");
  const RMatrix mean_sq = sum_sq_ / count_;
  const RMatrix sq_mean = (sum_ / count_).cwiseAbs2();
  return (2.0 * kPi) * ((mean_sq - sq_mean).cwiseMax(0.0) / (count_ - 1.0)).cwiseSqrt();
}

CMatrix WeylAccumulator::reconstruct(double z) const {
  CMatrix est = raw_estimate();
  if (z > 0.0 && count_ > 1.0) {
    const RMatrix se = standard_error();
    for (Index a = 0; a < est.rows(); ++a)
      for (Index b = 0; b < est.cols(); ++b)
        if (std::abs(est(a, b)) < z * se(a, b)) est(a, b) = 0.0;
  }
  return project_to_state(est);
}

HistogramAccumulator::HistogramAccumulator(const GridSpec& grid)
    : grid_(grid), counts_(RMatrix::Zero(grid.nx, grid.np)) {
  make_grid(grid);  // validates the spec
}

void HistogramAccumulator::add(double x, double p) {
  total_ += 1.0;
  const double dx = (grid_.x_max - grid_.x_min) / (grid_.nx - 1);
  const double dp = (grid_.p_max - grid_.p_min) / (grid_.np - 1);
  const long ix = std::lround((x - grid_.x_min) / dx);
  const long ip = std::lround((p - grid_.p_min) / dp);
  if (ix < 0 || ix >= grid_.nx || ip < 0 || ip >= grid_.np) return;
  counts_(ix, ip) += 1.0;
}

void HistogramAccumulator::merge(const HistogramAccumulator& o) {
  if (o.counts_.size() == 0) return;
  if (counts_.size() == 0) {
    *this = o;
    return;
  }
  if (o.counts_.rows() != counts_.rows() || o.counts_.cols() != counts_.cols())
    throw InvalidArgument("HistogramAccumulator: grid mismatch");
  counts_ += o.counts_;
  total_ += o.total_;
}

WignerGrid HistogramAccumulator::estimate(double sigma) const {
  WignerGrid g = make_grid(grid_);
  if (counts_.sum() <= 0.0) throw InvalidArgument("empty trajectory ensemble");
  RMatrix w = counts_;
  if (sigma > 0.0) {
    auto kernel = [&](double h) {
      const int half = std::max(1, static_cast<int>(std::ceil(4.0 * sigma / h)));
      RVector k(2 * half + 1);
      for (int j = -half; j <= half; ++j) k(j + half) = std::exp(-0.5 * (j * h / sigma) * (j * h / sigma));
      return RVector(k / k.sum());
    };
    const RVector kx = kernel(g.dx());
    const RVector kp = kernel(g.dp());
    const Index hx = kx.size() / 2, hp = kp.size() / 2;
    RMatrix t = RMatrix::Zero(w.rows(), w.cols());
    for (Index i = 0; i < w.rows(); ++i)
      for (Index j = -hx; j <= hx; ++j)
        if (i + j >= 0 && i + j < w.rows()) t.row(i) += kx(j + hx) * w.row(i + j);
    RMatrix u = RMatrix::Zero(w.rows(), w.cols());
    for (Index c = 0; c < w.cols(); ++c)
      for (Index j = -hp; j <= hp; ++j)
        if (c + j >= 0 && c + j < w.cols()) u.col(c) += kp(j + hp) * t.col(c + j);
    w = u;
  }
  g.w = w / (w.sum() * g.dx() * g.dp());
  return g;
}

void TrajectorySample::merge(const TrajectorySample& o) {
  count += o.count;
  photon_weight += o.photon_weight;
  for (std::size_t i = 0; i < weyl.size(); ++i) {
    weyl[i].merge(o.weyl[i]);
    MoleculeMoments& m = moments[i];
    const MoleculeMoments& q = o.moments[i];
    m.sx += q.sx;
    m.sy += q.sy;
    m.sz += q.sz;
    m.x += q.x;
    m.p += q.p;
    m.xx += q.xx;
    m.pp += q.pp;
    m.xp += q.xp;
  }
  histogram.merge(o.histogram);
}

MoleculeMoments TrajectorySample::mean_moments(int molecule) const {
  MoleculeMoments m = moments.at(static_cast<std::size_t>(molecule - 1));
  for (double* v : {&m.sx, &m.sy, &m.sz, &m.x, &m.p, &m.xx, &m.pp, &m.xp}) *v /= count;
  return m;
}

SemiclassicalResult evolve_trajectories(const HTCParams& params, const DisorderRealization& realization,
                                        const InitialStateSpec& spec, const SemiclassicalConfig& config) {
  params.validate();
  if (config.n_traj < 1) throw InvalidArgument("n_traj must be at least 1");
  if (config.chunk < 1) throw InvalidArgument("chunk must be at least 1");
  if (!(config.dt >= 0.0)) throw InvalidArgument("dt must be positive");
  const int n = params.n_molecules;
  if (static_cast<int>(realization.epsilons.size()) != n) throw InvalidArgument("realization does not match N");
  if (config.histogram && (config.histogram_molecule < 1 || config.histogram_molecule > n))
    throw InvalidArgument("histogram molecule out of range");
  const double dt = config.dt > 0.0 ? config.dt : params.period() / 800.0;
  std::vector<double> times = config.sample_times;
  if (times.empty()) times = {0.0, params.period()};
  for (std::size_t j = 1; j < times.size(); ++j)
    if (times[j] < times[j - 1]) throw InvalidArgument("sample times must be ascending");

  auto blank = [&](double t) {
    TrajectorySample s;
    s.time = t;
    s.weyl.assign(static_cast<std::size_t>(n), WeylAccumulator(params.n_max_vib));
    s.moments.assign(static_cast<std::size_t>(n), MoleculeMoments{});
    if (config.histogram) s.histogram = HistogramAccumulator(config.grid);
    return s;
  };

  struct ChunkResult {
    std::vector<TrajectorySample> samples;
    double energy_drift = 0.0;
    double spin_drift = 0.0;
  };
  const int n_chunks = (config.n_traj + config.chunk - 1) / config.chunk;
  std::vector<ChunkResult> chunks(static_cast<std::size_t>(n_chunks));
  const std::vector<double>& eps = realization.epsilons;

  parallel_for(n_chunks, config.workers, [&](int c) {
    ChunkResult& out = chunks[static_cast<std::size_t>(c)];
    for (double t : times) out.samples.push_back(blank(t));
    const int first = c * config.chunk;
    const int last = std::min(config.n_traj, first + config.chunk);
    for (int k = first; k < last; ++k) {
      CounterRng rng(stream_key(config.seed, static_cast<std::uint64_t>(k),
                                static_cast<std::uint64_t>(StreamTag::Trajectories)));
      TrajectoryState st = sample_initial(spec, params, rng);
      const double e0 = weyl_energy(st, params, eps);
      std::vector<double> norm0(static_cast<std::size_t>(n + 1));
      auto spin_norm = [&](int i) {
        if (i == 0) return st.a(0) * st.a(0) + st.a(1) * st.a(1) + st.a(2) * st.a(2);
        return st.s(i, 0) * st.s(i, 0) + st.s(i, 1) * st.s(i, 1) + st.s(i, 2) * st.s(i, 2);
      };
      for (int i = 0; i <= n; ++i) norm0[static_cast<std::size_t>(i)] = spin_norm(i);
      double t = 0.0;
      for (std::size_t j = 0; j < times.size(); ++j) {
        const double interval = times[j] - t;
        if (interval > 0.0) {
          const int steps = static_cast<int>(std::ceil(interval / dt - 1e-9));
          const double h = interval / steps;
          for (int s = 0; s < steps; ++s) trajectory_step(st, params, eps, h);
          t = times[j];
        }
        for (double v : st.y)
          if (!std::isfinite(v)) throw NumericalError("trajectory integration produced non-finite values");
        out.energy_drift = std::max(out.energy_drift, std::abs(weyl_energy(st, params, eps) - e0));
        for (int i = 0; i <= n; ++i)
          out.spin_drift = std::max(out.spin_drift, std::abs(spin_norm(i) - norm0[static_cast<std::size_t>(i)]));
        TrajectorySample& smp = out.samples[j];
        smp.count += 1.0;
        smp.photon_weight += 0.5 * (1.0 + st.a(2));
        for (int i = 1; i <= n; ++i) {
          const double x = st.x(i), p = st.p(i);
          smp.weyl[static_cast<std::size_t>(i - 1)].add(x, p);
          MoleculeMoments& m = smp.moments[static_cast<std::size_t>(i - 1)];
          m.sx += st.s(i, 0);
          m.sy += st.s(i, 1);
          m.sz += st.s(i, 2);
          m.x += x;
          m.p += p;
          m.xx += x * x;
          m.pp += p * p;
          m.xp += x * p;
          if (config.histogram && i == config.histogram_molecule) smp.histogram.add(x, p);
        }
      }
    }
  });

  SemiclassicalResult res;
  res.n_traj = config.n_traj;
  res.samples = std::move(chunks[0].samples);
  res.max_energy_drift = chunks[0].energy_drift;
  res.max_spin_drift = chunks[0].spin_drift;
  for (int c = 1; c < n_chunks; ++c) {
    const ChunkResult& ch = chunks[static_cast<std::size_t>(c)];
    for (std::size_t j = 0; j < times.size(); ++j) res.samples[j].merge(ch.samples[j]);
    res.max_energy_drift = std::max(res.max_energy_drift, ch.energy_drift);
    res.max_spin_drift = std::max(res.max_spin_drift, ch.spin_drift);
  }
  return res;
}

}  // namespace htc
