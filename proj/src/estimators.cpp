#include "transversal/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "transversal/errors.hpp"
#include "transversal/parallel.hpp"

namespace transversal {

namespace {

constexpr std::uint64_t kIntensityStream = 0x1111;
constexpr std::uint64_t kKacStream = 0x2222;
constexpr std::uint64_t kEnlargedStream = 0x3333;

struct Flagged {
  double value = 0.0;
  bool truncated = false;
};

Estimate finish(const std::vector<Flagged>& per_sample, double scale, double R,
                std::optional<double> K) {
  std::vector<double> values(per_sample.size());
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < per_sample.size(); ++i) {
    values[i] = per_sample[i].value;
    flagged += per_sample[i].truncated ? 1 : 0;
  }
  const SampleStats s = summarize(values);
  Estimate e;
  e.value = scale * s.mean;
  e.std_error = scale * s.std_error;
  e.n = per_sample.size();
  e.R = R;
  e.K = K;
  e.truncated_fraction = static_cast<double>(flagged) / static_cast<double>(per_sample.size());
  e.is_lower_bound = flagged > 0;
  return e;
}

const CyclicModel* as_cyclic(const ModelSpec& spec) {
  const ModelSpec* s = &spec;
  while (auto* ext = std::get_if<ExtensionModel>(&s->variant)) s = ext->inner.get();
  return std::get_if<CyclicModel>(&s->variant);
}

void require_samples(std::size_t n) {
  if (n < 2) throw UsageError("need at least 2 samples, got " + std::to_string(n));
}

double box_measure(double radius, int dim) { return std::pow(2.0 * radius, dim); }

Estimate exact_estimate(double value, std::size_t n, double R, std::optional<double> K) {
  Estimate e;
  e.value = value;
  e.n = n;
  e.R = R;
  e.K = K;
  e.exact = true;
  return e;
}

// Exact enumeration on finite models, with double weights.
double cyclic_intensity(const oracle::CyclicSystem& sys) {
  const auto& sp = sys.space;
  double total = 0.0;
  for (std::int64_t x = 0; x < sp.size(); ++x)
    total += sys.mu.mass[x].get_d() * static_cast<double>(sp.returns(x).size());
  return total / static_cast<double>(sp.n);
}

double cyclic_kac(const oracle::CyclicSystem& sys, int r) {
  const auto& sp = sys.space;
  const auto palm = oracle::exact_transverse(sys);
  const auto ys = sp.cross_states();
  std::vector<std::size_t> idx(r, 0);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    std::vector<std::int64_t> common = sp.returns(ys[idx[0]]);
    w *= palm.mass[ys[idx[0]]].get_d();
    for (int i = 1; i < r; ++i) {
      w *= palm.mass[ys[idx[i]]].get_d();
      const auto other = sp.returns(ys[idx[i]]);
      std::vector<std::int64_t> next;
      std::set_intersection(common.begin(), common.end(), other.begin(), other.end(),
                            std::back_inserter(next));
      common = std::move(next);
    }
    total += w * cell_at_identity(Config::cyclic(common, sp.n)).measure;
    int i = r - 1;
    while (i >= 0 && ++idx[i] == ys.size()) idx[i--] = 0;
    if (i < 0) break;
  }
  return total;
}

double cyclic_alt(const oracle::CyclicSystem& sys) {
  const auto& sp = sys.space;
  double total = 0.0;
  for (std::int64_t x = 0; x < sp.size(); ++x) {
    const Config yx = Config::cyclic(sp.returns(x), sp.n);
    for (std::int64_t z = 0; z < sp.size(); ++z) {
      const Config yz = Config::cyclic(sp.returns(z), sp.n);
      const double count = static_cast<double>(difference_set(yx, yz, Window{}).size());
      total += sys.mu.mass[x].get_d() * sys.mu.mass[z].get_d() * count;
    }
  }
  return total / static_cast<double>(sp.n);
}

double norm_of(std::span<const double> p) {
  double s = 0.0;
  for (double x : p) s += x * x;
  return std::sqrt(s);
}

// |(a - b) ∩ K| and the same count using only points of b inside the
// interior radius, in one sorted pass on R^1.
std::pair<std::size_t, std::size_t> count_differences(const Config& a, const Config& b, double K,
                                                      double interior) {
  if (a.group().dim != 1)
    return {difference_set(a, b, Window{K}).size(),
            difference_set(a, b.restricted(interior), Window{K}).size()};
  const bool exact = a.exact() && b.exact();
  const double tol = exact ? 0.0 : kMatchTolerance;
  const auto& qs = b.coords();
  std::vector<std::pair<double, bool>> diffs;
  for (double p : a.coords()) {
    auto first = std::lower_bound(qs.begin(), qs.end(), p - K);
    for (auto it = first; it != qs.end() && *it <= p + K; ++it)
      diffs.emplace_back(p - *it, std::abs(*it) <= interior);
  }
  std::sort(diffs.begin(), diffs.end());
  std::size_t full = 0;
  std::size_t inner = 0;
  std::size_t i = 0;
  while (i < diffs.size()) {
    const double rep = diffs[i].first;
    bool any_inner = false;
    for (; i < diffs.size() && diffs[i].first - rep <= tol; ++i) any_inner = any_inner || diffs[i].second;
    ++full;
    inner += any_inner ? 1 : 0;
  }
  return {full, inner};
}

using PalmSampler = std::function<PalmSample(Rng&)>;

Estimate kac_with_sampler(const PalmSampler& sampler, double iota, int r, std::size_t n, double R,
                          const Rng& rng, const EstimatorOptions& opts) {
  auto per_sample = parallel_map<Flagged>(n, opts.threads, [&](std::size_t i) {
    Rng s = rng.fork(i);
    Config common = sampler(s).returns;
    for (int j = 1; j < r; ++j) common = intersect(common, sampler(s).returns);
    if (!common.contains_identity())
      throw InvariantViolation("intersection of Palm return sets lost the identity");
    const auto cell = cell_at_identity(common, &s, opts.voronoi);
    return Flagged{cell.measure, cell.truncated};
  });
  return finish(per_sample, std::pow(iota, r), R, std::nullopt);
}

double weight_value(const TestFunction& f, const Config& c, std::size_t at) {
  switch (f.weight) {
    case TestFunction::Weight::One:
      return 1.0;
    case TestFunction::Weight::Count: {
      const auto g = c.point(at);
      double count = 0.0;
      if (c.group().dim == 1) {
        const auto& xs = c.coords();
        auto lo = std::lower_bound(xs.begin(), xs.end(), g[0] - f.b);
        auto hi = std::upper_bound(xs.begin(), xs.end(), g[0] + f.b);
        return static_cast<double>(hi - lo);
      }
      for (std::size_t i = 0; i < c.size(); ++i) {
        bool inside = true;
        for (std::size_t k = 0; k < g.size() && inside; ++k) inside = std::abs(c.point(i)[k] - g[k]) <= f.b;
        count += inside ? 1.0 : 0.0;
      }
      return count;
    }
    case TestFunction::Weight::Gap: {
      const auto& xs = c.coords();
      if (at + 1 < xs.size()) return std::min(xs[at + 1] - xs[at], f.b);
      return f.b;
    }
  }
  return 0.0;
}

double bump(const TestFunction& f, double norm) { return std::max(0.0, 1.0 - norm / f.a); }

}  // namespace

double z_score(double a, double se_a, double b, double se_b) {
  const double se = std::sqrt(se_a * se_a + se_b * se_b);
  const double diff = a - b;
  if (se == 0.0) {
    if (diff == 0.0) return 0.0;
    return diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }
  return diff / se;
}

Estimate estimate_intensity(const ModelSpec& spec, double K_radius, std::size_t n, const Rng& rng,
                            const EstimatorOptions& opts) {
  require_samples(n);
  if (!(K_radius > 0.0)) throw UsageError("intensity: K radius must be positive");
  if (const auto* cyc = as_cyclic(spec))
    return exact_estimate(cyclic_intensity(*cyc->system), n, K_radius, K_radius);
  const int d = spec.group().dim;
  const double volume = box_measure(K_radius, d);
  auto per_sample = parallel_map<Flagged>(n, opts.threads, [&](std::size_t i) {
    Rng s = rng.fork(i);
    const auto sample = sample_ambient(spec, K_radius, s);
    return Flagged{static_cast<double>(sample.returns.size()), false};
  });
  return finish(per_sample, 1.0 / volume, K_radius, K_radius);
}

Estimate estimate_covolume_kac(const ModelSpec& spec, int r, std::size_t n, double R,
                               const Rng& rng, const EstimatorOptions& opts) {
  require_samples(n);
  if (r < 1) throw UsageError("kac: order r must be >= 1");
  if (const auto* cyc = as_cyclic(spec)) return exact_estimate(cyclic_kac(*cyc->system, r), n, R, std::nullopt);

  const auto analytic = analytic_values(spec);
  std::optional<Estimate> iota_est;
  double iota;
  if (analytic.intensity && !opts.empirical_intensity) {
    iota = *analytic.intensity;
  } else {
    iota_est = estimate_intensity(spec, R, n, rng.fork(kIntensityStream), opts);
    iota = iota_est->value;
  }
  const PalmSampler sampler = [&](Rng& s) { return sample_palm(spec, R, s); };
  Estimate e = kac_with_sampler(sampler, iota, r, n, R, rng.fork(kKacStream), opts);
  if (iota_est) {
    // Delta method for iota^r * mean.
    const double mean = e.value / std::pow(iota, r);
    const double d_iota = r * std::pow(iota, r - 1) * mean * iota_est->std_error;
    e.std_error = std::sqrt(e.std_error * e.std_error + d_iota * d_iota);
  }
  return e;
}

Estimate estimate_covolume_alt(const ModelSpec& spec, std::size_t n, double K_radius, double R,
                               const Rng& rng, const EstimatorOptions& opts) {
  require_samples(n);
  if (const auto* cyc = as_cyclic(spec)) return exact_estimate(cyclic_alt(*cyc->system), n, R, K_radius);
  if (!(K_radius > 0.0) || !(K_radius < R))
    throw UsageError("alt: need 0 < K < R (got K=" + std::to_string(K_radius) + ", R=" + std::to_string(R) + ")");
  const int d = spec.group().dim;
  const double volume = box_measure(K_radius, d);
  auto per_sample = parallel_map<Flagged>(n, opts.threads, [&](std::size_t i) {
    Rng s = rng.fork(i);
    const Config yx = sample_ambient(spec, R, s).returns;
    const Config yz = sample_ambient(spec, R, s).returns;
    const auto [full, inner] = count_differences(yx, yz, K_radius, R - K_radius);
    return Flagged{static_cast<double>(full), full != inner};
  });
  return finish(per_sample, 1.0 / volume, R, K_radius);
}

std::string TestFunction::id() const {
  auto fmt = [](double x) {
    const auto i = static_cast<long long>(x);
    return static_cast<double>(i) == x ? std::to_string(i) : std::to_string(x);
  };
  switch (weight) {
    case Weight::One:
      return "phi" + fmt(a) + ".one";
    case Weight::Count:
      return "phi" + fmt(a) + ".count" + fmt(b);
    case Weight::Gap:
      return "phi" + fmt(a) + ".gap" + fmt(b);
  }
  return {};
}

TestFunction TestFunction::parse(const std::string& id) {
  const auto dot = id.find('.');
  if (id.rfind("phi", 0) != 0 || dot == std::string::npos)
    throw UsageError("test function id must look like phi<a>.<one|count<b>|gap<b>>, got '" + id + "'");
  TestFunction f;
  try {
    f.a = std::stod(id.substr(3, dot - 3));
    const std::string w = id.substr(dot + 1);
    if (w == "one") {
      f.weight = Weight::One;
    } else if (w.rfind("count", 0) == 0) {
      f.weight = Weight::Count;
      f.b = std::stod(w.substr(5));
    } else if (w.rfind("gap", 0) == 0) {
      f.weight = Weight::Gap;
      f.b = std::stod(w.substr(3));
    } else {
      throw UsageError("unknown weight '" + w + "' in test function id '" + id + "'");
    }
  } catch (const std::logic_error&) {
    throw UsageError("malformed test function id '" + id + "'");
  }
  if (!(f.a > 0.0) || f.b < 0.0 || (f.weight != Weight::One && !(f.b > 0.0)))
    throw UsageError("test function '" + id + "' needs a > 0 and b > 0");
  return f;
}

std::vector<TestFunction> builtin_test_functions() {
  std::vector<TestFunction> out;
  for (double a : {1.0, 2.0, 5.0, 8.0}) {
    out.push_back({a, TestFunction::Weight::One, 0.0});
    out.push_back({a, TestFunction::Weight::Count, 2.0});
    out.push_back({a, TestFunction::Weight::Count, 10.0});
    out.push_back({a, TestFunction::Weight::Gap, 1.0});
    out.push_back({a, TestFunction::Weight::Gap, 5.0});
  }
  return out;
}

MeckeReport mecke_check(const ModelSpec& spec, const TestFunction& f, std::size_t n, double R,
                        const Rng& rng, const EstimatorOptions& opts) {
  require_samples(n);
  const Group group = spec.group();
  if (group.is_cyclic()) throw UsageError("mecke: the statistical checker runs on R^d models; use the oracle for Z_n");
  if (f.reach() > R / 2.0)
    throw UsageError("mecke: test function " + f.id() + " reaches " + std::to_string(f.reach()) +
                     ", more than R/2 = " + std::to_string(R / 2.0));
  if (f.weight == TestFunction::Weight::Gap && group.dim != 1)
    throw UsageError("mecke: gap weights are defined on R^1 only");

  const auto analytic = analytic_values(spec);
  double iota;
  if (analytic.intensity && !opts.empirical_intensity)
    iota = *analytic.intensity;
  else
    iota = estimate_intensity(spec, R, n, rng.fork(kIntensityStream), opts).value;

  // Side 0: sum_g f(-g, shift of y by g); side 1: sum_g f(g, y).
  auto side = [&](int which) {
    const Rng stream = rng.fork(which);
    auto per_sample = parallel_map<Flagged>(n, opts.threads, [&](std::size_t i) {
      Rng s = stream.fork(i);
      const Config c = sample_palm(spec, R, s).returns;
      const std::size_t id = c.identity_index();
      const double at_identity = which == 1 ? weight_value(f, c, id) : 0.0;
      double total = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) {
        const double phi = bump(f, norm_of(c.point(k)));
        if (phi == 0.0) continue;
        total += phi * (which == 0 ? weight_value(f, c, k) : at_identity);
      }
      return Flagged{total, false};
    });
    return finish(per_sample, iota, R, f.reach());
  };
  MeckeReport rep;
  rep.lhs = side(0);
  rep.rhs = side(1);
  rep.z_score = std::abs(z_score(rep.lhs.value, rep.lhs.std_error, rep.rhs.value, rep.rhs.std_error));
  rep.test_function_id = f.id();
  return rep;
}

InequalityReport inequality_report(const ModelSpec& spec, int r_max, std::size_t n, double R,
                                   const Rng& rng, const EstimatorOptions& opts) {
  if (r_max < 2) throw UsageError("inequality: r_max must be >= 2");
  InequalityReport rep;
  rep.intensity = estimate_intensity(spec, R / 2.0, n, rng.fork(kIntensityStream), opts);
  for (int r = 1; r <= r_max; ++r)
    rep.covolume.push_back(estimate_covolume_kac(spec, r, n, R, rng.fork(kKacStream + r), opts));
  for (int r = 2; r <= r_max; ++r) {
    const Estimate& prev = rep.covolume[r - 2];
    InequalityRow row;
    row.r = r;
    row.covolume = rep.covolume[r - 1];
    row.bound = rep.intensity.value * prev.value;
    const double a = rep.intensity.value * prev.std_error;
    const double b = prev.value * rep.intensity.std_error;
    row.bound_error = std::sqrt(a * a + b * b);
    row.margin_z = z_score(row.covolume.value, row.covolume.std_error, row.bound, row.bound_error);
    rep.rows.push_back(row);
  }
  return rep;
}

MonotonicityReport monotonicity_report(const ModelSpec& spec, std::size_t n, double R,
                                       const Rng& rng, const EstimatorOptions& opts) {
  const ModelSpec* s = &spec;
  while (auto* ext = std::get_if<ExtensionModel>(&s->variant)) s = ext->inner.get();
  const auto* susp = std::get_if<SuspensionModel>(&s->variant);
  if (susp == nullptr) throw UsageError("monotonicity report needs a suspension model, got " + spec.kind());
  require_samples(n);

  MonotonicityReport rep;
  rep.covolume_base = estimate_covolume_kac(spec, 2, n, R, rng.fork(kKacStream), opts);
  rep.intensity_base = *analytic_values(spec).intensity;
  rep.intensity_enlarged = *analytic_values_enlarged(*susp).intensity;
  if (opts.empirical_intensity) {
    rep.intensity_base = estimate_intensity(spec, R, n, rng.fork(kIntensityStream), opts).value;
    // The enlarged cross section returns at every integer time of the flow.
    rep.intensity_enlarged = 1.0;
  }
  const PalmSampler enlarged = [&](Rng& r) { return sample_palm_enlarged(*susp, R, r); };
  rep.covolume_enlarged =
      kac_with_sampler(enlarged, rep.intensity_enlarged, 2, n, R, rng.fork(kEnlargedStream), opts);
  return rep;
}

std::string sweep_verdict(const std::vector<Estimate>& seq) {
  if (seq.size() < 2) return "undetermined";
  bool diverging = true;
  for (std::size_t i = 1; i < seq.size(); ++i)
    diverging = diverging && seq[i].value >= 1.5 * seq[i - 1].value && seq[i - 1].value > 0.0;
  if (diverging) return "diverging";
  const Estimate& a = seq[seq.size() - 2];
  const Estimate& b = seq.back();
  if (std::abs(z_score(a.value, a.std_error, b.value, b.std_error)) <= 3.0) return "stable";
  return "undetermined";
}

}  // namespace transversal
