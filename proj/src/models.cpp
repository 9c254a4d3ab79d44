#include "transversal/models.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <sstream>

#include "transversal/errors.hpp"

namespace transversal {

namespace {

constexpr double kEnumerationBudget = 1e7;
constexpr std::uint64_t kAuxLabelTag = 0xa0c5'1abe'1000'0001ULL;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool all_integer(const std::vector<double>& xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return x == std::round(x); });
}

// Inverse of a row-major square matrix by Gauss-Jordan with partial pivoting.
std::vector<double> inverse(std::vector<double> a, int d) {
  std::vector<double> inv(d * d, 0.0);
  for (int i = 0; i < d; ++i) inv[i * d + i] = 1.0;
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int r = c + 1; r < d; ++r)
      if (std::abs(a[r * d + c]) > std::abs(a[piv * d + c])) piv = r;
    if (a[piv * d + c] == 0.0) throw UsageError("lattice basis is singular");
    for (int k = 0; k < d; ++k) {
      std::swap(a[c * d + k], a[piv * d + k]);
      std::swap(inv[c * d + k], inv[piv * d + k]);
    }
    const double p = a[c * d + c];
    for (int k = 0; k < d; ++k) {
      a[c * d + k] /= p;
      inv[c * d + k] /= p;
    }
    for (int r = 0; r < d; ++r) {
      if (r == c) continue;
      const double f = a[r * d + c];
      for (int k = 0; k < d; ++k) {
        a[r * d + k] -= f * a[c * d + k];
        inv[r * d + k] -= f * inv[c * d + k];
      }
    }
  }
  return inv;
}

// Points k * B - offset inside [-R, R]^d for integer row vectors k.
std::vector<double> lattice_points(const LatticeModel& m, const std::vector<double>& offset,
                                   double R) {
  const int d = m.dim;
  const auto inv = inverse(m.basis, d);
  std::vector<long long> lo(d), hi(d);
  double count = 1.0;
  for (int i = 0; i < d; ++i) {
    double centre = 0.0;
    double spread = 0.0;
    for (int j = 0; j < d; ++j) {
      centre += offset[j] * inv[j * d + i];
      spread += R * std::abs(inv[j * d + i]);
    }
    lo[i] = static_cast<long long>(std::floor(centre - spread)) - 1;
    hi[i] = static_cast<long long>(std::ceil(centre + spread)) + 1;
    count *= static_cast<double>(hi[i] - lo[i] + 1);
  }
  if (count > kEnumerationBudget)
    throw ResourceError("lattice enumeration needs " + num(count) + " coefficient vectors at R=" + num(R));
  std::vector<double> out;
  std::vector<long long> k = lo;
  std::vector<double> p(d);
  while (true) {
    bool inside = true;
    for (int j = 0; j < d && inside; ++j) {
      double v = -offset[j];
      for (int i = 0; i < d; ++i) v += static_cast<double>(k[i]) * m.basis[i * d + j];
      p[j] = v;
      inside = std::abs(v) <= R;
    }
    if (inside) out.insert(out.end(), p.begin(), p.end());
    int i = d - 1;
    while (i >= 0 && k[i] == hi[i]) k[i] = lo[i], --i;
    if (i < 0) break;
    ++k[i];
  }
  return out;
}

double frac(double x) { return x - std::floor(x); }

// Return times S_k - t of the suspension orbit of z within [-R, R].
// `extra` adds S_k + shift for visits T^k z in [1 - eps, 1) when set.
std::vector<double> suspension_times(const SuspensionModel& m, double z, double t, double R,
                                     std::optional<double> extra = std::nullopt) {
  std::vector<double> out;
  auto push = [&](double s, double zk) {
    if (std::abs(s - t) <= R) out.push_back(s - t);
    if (extra && m.roof(zk) == 2.0 && std::abs(s + *extra - t) <= R) out.push_back(s + *extra - t);
  };
  double s = 0.0;
  double zk = z;
  while (s - t <= R + 2.0) {
    push(s, zk);
    s += m.roof(zk);
    zk = frac(zk + m.alpha);
  }
  s = 0.0;
  zk = z;
  while (true) {
    zk = frac(zk - m.alpha);
    s -= m.roof(zk);
    if (s - t < -R - 2.0) break;
    push(s, zk);
  }
  return out;
}

std::int64_t draw_index(const std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return it - cumulative.begin();
}

Sample cyclic_sample(const CyclicModel& m, bool palm, Rng& rng) {
  const auto& space = m.system->space;
  const std::int64_t s = draw_index(palm ? m.palm_cdf : m.ambient_cdf, rng);
  return {{static_cast<double>(space.orbit_of(s)), static_cast<double>(space.phase_of(s))},
          Config::cyclic(space.returns(s), space.n)};
}

std::vector<double> poisson_points(const PoissonModel& m, double R, Rng& rng) {
  const double Rs = R + 10.0 / m.rate;
  const double mean = m.rate * std::pow(2.0 * Rs, m.dim);
  const auto count = std::poisson_distribution<long long>(mean)(rng);
  std::vector<double> pts(static_cast<std::size_t>(count) * m.dim);
  for (auto& x : pts) x = rng.uniform(-Rs, Rs);
  return pts;
}

double cut_project_covolume(const CutProjectModel& m) {
  return std::abs(m.basis[0] * m.basis[3] - m.basis[1] * m.basis[2]);
}

}  // namespace

double determinant(std::vector<double> a, int d) {
  double det = 1.0;
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int r = c + 1; r < d; ++r)
      if (std::abs(a[r * d + c]) > std::abs(a[piv * d + c])) piv = r;
    if (a[piv * d + c] == 0.0) return 0.0;
    if (piv != c) {
      for (int k = 0; k < d; ++k) std::swap(a[c * d + k], a[piv * d + k]);
      det = -det;
    }
    det *= a[c * d + c];
    for (int r = c + 1; r < d; ++r) {
      const double f = a[r * d + c] / a[c * d + c];
      for (int k = c; k < d; ++k) a[r * d + k] -= f * a[c * d + k];
    }
  }
  return det;
}

bool looks_irrational(double x) {
  if (!std::isfinite(x)) return false;
  const double target = std::abs(x);
  double rest = target;
  // Convergents p/q of the continued fraction of |x|.
  double p_prev = 1.0, p = std::floor(rest);
  double q_prev = 0.0, q = 1.0;
  for (int step = 0; step < 64; ++step) {
    if (std::abs(target - p / q) <= 1e-9 * std::max(1.0, target)) return false;
    const double f = rest - std::floor(rest);
    if (f == 0.0) return false;
    rest = 1.0 / f;
    const double a = std::floor(rest);
    const double p_next = a * p + p_prev;
    const double q_next = a * q + q_prev;
    if (q_next > 1e4) return true;
    p_prev = p, p = p_next;
    q_prev = q, q = q_next;
  }
  return true;
}

ModelSpec ModelSpec::lattice(std::vector<double> basis, int dim) {
  ModelSpec s{LatticeModel{dim, std::move(basis)}};
  s.validate();
  return s;
}

ModelSpec ModelSpec::cut_project(CutProjectModel m) {
  ModelSpec s{m};
  s.validate();
  return s;
}

ModelSpec ModelSpec::poisson(double rate, int dim) {
  ModelSpec s{PoissonModel{rate, dim}};
  s.validate();
  return s;
}

ModelSpec ModelSpec::suspension(double eps, double alpha) {
  ModelSpec s{SuspensionModel{eps, alpha}};
  s.validate();
  return s;
}

ModelSpec ModelSpec::extension(ModelSpec inner) {
  ModelSpec s{ExtensionModel{std::make_shared<const ModelSpec>(std::move(inner))}};
  s.validate();
  return s;
}

ModelSpec ModelSpec::cyclic(oracle::CyclicSystem system) {
  CyclicModel m{std::make_shared<const oracle::CyclicSystem>(std::move(system)), {}, {}};
  const auto palm = oracle::exact_transverse(*m.system);
  double a = 0.0;
  double p = 0.0;
  for (std::int64_t st = 0; st < m.system->space.size(); ++st) {
    m.ambient_cdf.push_back(a += m.system->mu.mass[st].get_d());
    m.palm_cdf.push_back(p += palm.mass[st].get_d());
  }
  ModelSpec s{std::move(m)};
  s.validate();
  return s;
}

std::string ModelSpec::kind() const {
  static constexpr const char* names[] = {"lattice",    "cutproject", "poisson",
                                          "suspension", "extension",  "cyclic"};
  return names[variant.index()];
}

std::string ModelSpec::describe() const {
  return std::visit(
      overloaded{
          [](const LatticeModel& m) {
            std::string s = "lattice(dim=" + std::to_string(m.dim) + ",basis=[";
            for (std::size_t i = 0; i < m.basis.size(); ++i) s += (i ? "," : "") + num(m.basis[i]);
            return s + "])";
          },
          [](const CutProjectModel& m) {
            return "cutproject(basis=[" + num(m.basis[0]) + "," + num(m.basis[1]) + "," +
                   num(m.basis[2]) + "," + num(m.basis[3]) + "],window=[" + num(m.w_lo) + "," +
                   num(m.w_hi) + "])";
          },
          [](const PoissonModel& m) {
            return "poisson(rate=" + num(m.rate) + ",dim=" + std::to_string(m.dim) + ")";
          },
          [](const SuspensionModel& m) {
            return "suspension(eps=" + num(m.eps) + ",alpha=" + num(m.alpha) + ")";
          },
          [](const ExtensionModel& m) { return "extension(" + m.inner->describe() + ")"; },
          [](const CyclicModel& m) { return "cyclic(" + m.system->describe() + ")"; },
      },
      variant);
}

Group ModelSpec::group() const {
  return std::visit(overloaded{
                        [](const LatticeModel& m) { return Group::real(m.dim); },
                        [](const CutProjectModel&) { return Group::real(1); },
                        [](const PoissonModel& m) { return Group::real(m.dim); },
                        [](const SuspensionModel&) { return Group::real(1); },
                        [](const ExtensionModel& m) { return m.inner->group(); },
                        [](const CyclicModel& m) { return Group::cyclic(m.system->space.n); },
                    },
                    variant);
}

void ModelSpec::validate() const {
  std::visit(
      overloaded{
          [](const LatticeModel& m) {
            if (m.dim < 1) throw UsageError("lattice: dim must be >= 1");
            if (m.basis.size() != static_cast<std::size_t>(m.dim * m.dim))
              throw UsageError("lattice: basis must have dim*dim entries");
            for (double b : m.basis)
              if (!std::isfinite(b)) throw UsageError("lattice: basis entries must be finite");
            if (determinant(m.basis, m.dim) == 0.0) throw UsageError("lattice: basis is singular");
          },
          [](const CutProjectModel& m) {
            for (double b : m.basis)
              if (!std::isfinite(b)) throw UsageError("cutproject: basis entries must be finite");
            if (!(m.w_lo < m.w_hi))
              throw UsageError("cutproject: window must satisfy w_lo < w_hi (got [" + num(m.w_lo) +
                               ", " + num(m.w_hi) + "])");
            if (cut_project_covolume(m) == 0.0) throw UsageError("cutproject: basis is singular");
            const double g1 = m.basis[0], h1 = m.basis[1], g2 = m.basis[2], h2 = m.basis[3];
            if (g1 == 0.0 || g2 == 0.0 || !looks_irrational(g2 / g1))
              throw UsageError("cutproject: basis: projection to G is not injective");
            if (h1 == 0.0 || h2 == 0.0 || !looks_irrational(h2 / h1))
              throw UsageError("cutproject: basis: projection to H is not dense");
          },
          [](const PoissonModel& m) {
            if (!(m.rate > 0.0) || !std::isfinite(m.rate)) throw UsageError("poisson: rate must be positive");
            if (m.dim < 1) throw UsageError("poisson: dim must be >= 1");
          },
          [](const SuspensionModel& m) {
            if (!(m.eps > 0.0 && m.eps < 1.0)) throw UsageError("suspension: eps must lie in (0, 1)");
            if (!(m.alpha > 0.0 && m.alpha < 1.0) || !looks_irrational(m.alpha))
              throw UsageError("suspension: alpha must be an irrational number in (0, 1)");
          },
          [](const ExtensionModel& m) {
            if (!m.inner) throw UsageError("extension: missing inner model");
            m.inner->validate();
          },
          [](const CyclicModel& m) {
            if (!m.system) throw UsageError("cyclic: missing system");
            m.system->validate();
          },
      },
      variant);
}

std::vector<double> strip_points(const CutProjectModel& m, double g_lo, double g_hi, double h_lo,
                                 double h_hi) {
  const double g1 = m.basis[0], h1 = m.basis[1], g2 = m.basis[2], h2 = m.basis[3];
  const double det = g1 * h2 - h1 * g2;
  // (m, n) = (G, H) B^{-1}; bound m over the corners of the box.
  double m_lo = std::numeric_limits<double>::infinity();
  double m_hi = -m_lo;
  for (double G : {g_lo, g_hi})
    for (double H : {h_lo, h_hi}) {
      const double mm = (G * h2 - H * g2) / det;
      m_lo = std::min(m_lo, mm);
      m_hi = std::max(m_hi, mm);
    }
  const double span = m_hi - m_lo;
  if (span > kEnumerationBudget)
    throw ResourceError("cut-and-project strip enumeration spans " + num(span) +
                        " lattice rows (G-window [" + num(g_lo) + ", " + num(g_hi) + "])");
  auto n_range = [](double lo, double hi, double base, double coef) {
    double a = (lo - base) / coef;
    double b = (hi - base) / coef;
    if (a > b) std::swap(a, b);
    return std::pair{a, b};
  };
  std::vector<double> out;
  const auto first = static_cast<long long>(std::floor(m_lo)) - 1;
  const auto last = static_cast<long long>(std::ceil(m_hi)) + 1;
  for (long long mi = first; mi <= last; ++mi) {
    const double md = static_cast<double>(mi);
    auto [a1, b1] = n_range(g_lo, g_hi, md * g1, g2);
    auto [a2, b2] = n_range(h_lo, h_hi, md * h1, h2);
    const double a = std::max(a1, a2);
    const double b = std::min(b1, b2);
    if (a > b + 1.0) continue;
    for (auto ni = static_cast<long long>(std::floor(a)) - 1; ni <= static_cast<long long>(std::ceil(b)) + 1; ++ni) {
      const double nd = static_cast<double>(ni);
      const double G = md * g1 + nd * g2;
      const double H = md * h1 + nd * h2;
      if (G >= g_lo && G <= g_hi && H >= h_lo && H <= h_hi) out.push_back(G);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

AmbientSample sample_ambient(const ModelSpec& spec, double R, Rng& rng) {
  if (!(R > 0.0)) throw UsageError("window radius R must be positive");
  return std::visit(
      overloaded{
          [&](const LatticeModel& m) -> Sample {
            std::vector<double> theta(m.dim), u(m.dim, 0.0);
            for (auto& t : theta) t = rng.uniform();
            for (int i = 0; i < m.dim; ++i)
              for (int j = 0; j < m.dim; ++j) u[j] += theta[i] * m.basis[i * m.dim + j];
            return {u, Config::real(lattice_points(m, u, R), m.dim, Window{R}, false)};
          },
          [&](const CutProjectModel& m) -> Sample {
            const double a = rng.uniform();
            const double b = rng.uniform();
            const double s = a * m.basis[0] + b * m.basis[2];
            const double t = a * m.basis[1] + b * m.basis[3];
            auto pts = strip_points(m, s - R, s + R, t - m.w_hi, t - m.w_lo);
            for (auto& p : pts) p -= s;
            return {{s, t}, Config::real1d(std::move(pts), R, false)};
          },
          [&](const PoissonModel& m) -> Sample {
            return {{}, Config::real(poisson_points(m, R, rng), m.dim, Window{R}, false)};
          },
          [&](const SuspensionModel& m) -> Sample {
            double z;
            if (rng.uniform() * (1.0 + m.eps) < 1.0)
              z = rng.uniform();
            else
              z = rng.uniform(1.0 - m.eps, 1.0);
            const double t = rng.uniform(0.0, m.roof(z));
            return {{z, t}, Config::real1d(suspension_times(m, z, t, R), R, false)};
          },
          [&](const ExtensionModel& m) -> Sample {
            Sample s = sample_ambient(*m.inner, R, rng);
            s.label.push_back(rng.fork(kAuxLabelTag).uniform());
            return s;
          },
          [&](const CyclicModel& m) -> Sample { return cyclic_sample(m, false, rng); },
      },
      spec.variant);
}

PalmSample sample_palm(const ModelSpec& spec, double R, Rng& rng) {
  if (!(R > 0.0)) throw UsageError("window radius R must be positive");
  return std::visit(
      overloaded{
          [&](const LatticeModel& m) -> Sample {
            const std::vector<double> zero(m.dim, 0.0);
            return {{}, Config::real(lattice_points(m, zero, R), m.dim, Window{R}, all_integer(m.basis))};
          },
          [&](const CutProjectModel& m) -> Sample {
            const double w = rng.uniform(m.w_lo, m.w_hi);
            return {{w}, Config::real1d(strip_points(m, -R, R, w - m.w_hi, w - m.w_lo), R, false)};
          },
          [&](const PoissonModel& m) -> Sample {
            auto pts = poisson_points(m, R, rng);
            pts.insert(pts.end(), m.dim, 0.0);
            return {{}, Config::real(std::move(pts), m.dim, Window{R}, false)};
          },
          [&](const SuspensionModel& m) -> Sample {
            const double z = rng.uniform();
            return {{z}, Config::real1d(suspension_times(m, z, 0.0, R), R, true)};
          },
          [&](const ExtensionModel& m) -> Sample {
            Sample s = sample_palm(*m.inner, R, rng);
            s.label.push_back(rng.fork(kAuxLabelTag).uniform());
            return s;
          },
          [&](const CyclicModel& m) -> Sample { return cyclic_sample(m, true, rng); },
      },
      spec.variant);
}

PalmSample sample_palm_enlarged(const SuspensionModel& m, double R, Rng& rng) {
  // Base sheet has transverse mass 1/(1+eps), upper sheet eps/(1+eps).
  if (rng.uniform() * (1.0 + m.eps) < 1.0) {
    const double z = rng.uniform();
    return {{z, 0.0}, Config::real1d(suspension_times(m, z, 0.0, R, 1.0), R, true)};
  }
  const double z = rng.uniform(1.0 - m.eps, 1.0);
  // Seen from height 1 the base returns sit at S_k - 1 and the upper sheet at S_k.
  return {{z, 1.0}, Config::real1d(suspension_times(m, z, 1.0, R, 1.0), R, true)};
}

AnalyticValues analytic_values(const ModelSpec& spec) {
  return std::visit(
      overloaded{
          [](const LatticeModel& m) {
            AnalyticValues v;
            const double iota = 1.0 / std::abs(determinant(m.basis, m.dim));
            v.intensity = iota;
            for (int r = 1; r <= 4; ++r) v.covolume[r] = std::pow(iota, r - 1);
            v.periodic = true;
            return v;
          },
          [](const CutProjectModel& m) {
            AnalyticValues v;
            v.intensity = (m.w_hi - m.w_lo) / cut_project_covolume(m);
            v.covolume[1] = 1.0;
            v.periodic = false;
            return v;
          },
          [](const PoissonModel& m) {
            AnalyticValues v;
            v.intensity = m.rate;
            v.covolume[1] = 1.0;
            for (int r = 2; r <= 4; ++r) v.covolume[r] = std::numeric_limits<double>::infinity();
            v.periodic = false;
            return v;
          },
          [](const SuspensionModel& m) {
            AnalyticValues v;
            v.intensity = 1.0 / (1.0 + m.eps);
            v.covolume[1] = 1.0;
            v.covolume_upper = 1.0;
            v.periodic = false;
            return v;
          },
          [](const ExtensionModel& m) { return analytic_values(*m.inner); },
          [](const CyclicModel& m) {
            AnalyticValues v;
            v.intensity = oracle::exact_intensity(*m.system).get_d();
            for (int r = 1; r <= 3; ++r) {
              try {
                v.covolume[r] = oracle::exact_covolume(*m.system, r).direct.get_d();
              } catch (const ResourceError&) {
                break;
              }
            }
            v.periodic = oracle::coset_predicate(m.system->space);
            return v;
          },
      },
      spec.variant);
}

AnalyticValues analytic_values_enlarged(const SuspensionModel&) {
  AnalyticValues v;
  v.intensity = 1.0;
  for (int r = 1; r <= 4; ++r) v.covolume[r] = 1.0;
  v.periodic = true;
  return v;
}

LambdaProbe lambda_probe(const ModelSpec& spec, int k, std::size_t n_samples, double R,
                         const Rng& rng) {
  if (k < 1) throw UsageError("lambda probe: k must be >= 1");
  if (n_samples < 1) throw UsageError("lambda probe: need at least one sample");
  const Group group = spec.group();
  LambdaProbe out;
  out.samples = n_samples;

  if (group.is_cyclic()) {
    const std::int64_t n = group.order;
    std::vector<char> pool(n, 0);
    for (std::size_t i = 0; i < n_samples; ++i) {
      Rng r = rng.fork(i);
      for (auto g : sample_palm(spec, R, r).returns.residues()) pool[g] = pool[mod_floor(-g, n)] = 1;
    }
    std::vector<char> sums = pool;
    for (int j = 1; j < k; ++j) {
      std::vector<char> next(n, 0);
      for (std::int64_t a = 0; a < n; ++a)
        for (std::int64_t b = 0; b < n; ++b)
          if (sums[a] && pool[b]) next[mod_floor(a + b, n)] = 1;
      sums = std::move(next);
    }
    out.pooled = static_cast<std::size_t>(std::count(pool.begin(), pool.end(), 1));
    for (std::int64_t g = 1; g < n; ++g)
      if (sums[g]) out.gap = std::min(out.gap, static_cast<double>(cyclic_distance(g, 0, n)));
    return out;
  }

  const int d = group.dim;
  std::vector<double> flat;
  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng r = rng.fork(i);
    const auto& c = sample_palm(spec, R, r).returns.coords();
    flat.insert(flat.end(), c.begin(), c.end());
    for (double x : c) flat.push_back(-x);
  }
  const Config pool = Config::real(std::move(flat), d, Window{R}, false);
  Config sums = pool;
  for (int j = 1; j < k; ++j) {
    if (static_cast<double>(sums.size()) * static_cast<double>(pool.size()) > 5e7)
      throw ResourceError("lambda probe: sum set too large at k=" + std::to_string(j + 1));
    std::vector<double> next;
    for (std::size_t a = 0; a < sums.size(); ++a)
      for (std::size_t b = 0; b < pool.size(); ++b)
        for (int c = 0; c < d; ++c) next.push_back(sums.point(a)[c] + pool.point(b)[c]);
    sums = Config::real(std::move(next), d, Window{R}, false);
  }
  out.pooled = pool.size();
  for (std::size_t i = 0; i < sums.size(); ++i) {
    double norm2 = 0.0;
    for (double x : sums.point(i)) norm2 += x * x;
    if (norm2 > kMatchTolerance * kMatchTolerance) out.gap = std::min(out.gap, std::sqrt(norm2));
  }
  return out;
}

}  // namespace transversal
