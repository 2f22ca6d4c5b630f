#include "krylov/trace_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace krylov {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

TraceEstimate summarize(const std::vector<double>& vals, const std::vector<char>& ok, Index m) {
  TraceEstimate out;
  double sum = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (!ok[i]) {
      ++out.dropped;
      continue;
    }
    sum += vals[i];
    ++out.m_used;
  }
  out.flagged = 100 * out.dropped > m;
  if (out.m_used == 0) {
    out.estimate = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.estimate = sum / static_cast<double>(out.m_used);
  if (out.m_used >= 2) {
    double ss = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (ok[i]) ss += (vals[i] - out.estimate) * (vals[i] - out.estimate);
    }
    const double var = ss / static_cast<double>(out.m_used - 1);
    out.std_error = std::sqrt(var / static_cast<double>(out.m_used));
  }
  return out;
}

TraceEstimate probe_average(Index d, Index m, const ProbeSampler& sampler, int threads,
                            const std::function<double(const Vector&)>& sample) {
  if (m < 1) throw std::invalid_argument("trace estimate: m must be at least 1");
  std::vector<double> vals(static_cast<std::size_t>(m), 0.0);
  std::vector<char> ok(static_cast<std::size_t>(m), 1);
  parallel_for(m, threads, [&](Index i) {
    try {
      vals[i] = sample(sampler.probe(i, d));
    } catch (const FunctionDomainError&) {
      ok[i] = 0;
    }
  });
  return summarize(vals, ok, m);
}

}  // namespace

Vector ProbeSampler::probe(Index i, Index d) const {
  if (d < 1) throw std::invalid_argument("ProbeSampler: dimension must be positive");
  std::mt19937_64 gen(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i))));
  Vector v(d);
  if (distribution == ProbeDistribution::Rademacher) {
    const double s = 1.0 / std::sqrt(static_cast<double>(d));
    for (Index j = 0; j < d; ++j) v[j] = (gen() >> 63) ? s : -s;
    return v;
  }
  std::normal_distribution<double> normal;
  double nrm = 0.0;
  while (!(nrm > 0.0)) {
    for (Index j = 0; j < d; ++j) v[j] = normal(gen);
    nrm = v.norm();
  }
  return v / nrm;
}

TraceEstimate hutchinson_trace(const QuadraticForm& qf, Index d, Index m, const ProbeSampler& sampler,
                               int threads) {
  return probe_average(d, m, sampler, threads, qf);
}

TraceEstimate slq_trace(const LinearOperator& A, const MatrixFunction& f, Index k, Index m,
                        const ProbeSampler& sampler, int threads) {
  return probe_average(A.dim(), m, sampler, threads,
                       [&](const Vector& b) { return lanczos_qf(A, b, f, k, ReorthMode::None); });
}

TraceEstimate control_variate_trace(const QuadraticForm& qf_A, double atilde_trace, const QuadraticForm& qf_Atilde,
                                    Index d, Index m, const ProbeSampler& sampler, int threads) {
  TraceEstimate out = probe_average(d, m, sampler, threads,
                                    [&](const Vector& b) { return qf_A(b) - qf_Atilde(b); });
  out.estimate += atilde_trace / static_cast<double>(d);
  return out;
}

DiscreteMeasure slq_density(const LinearOperator& A, Index k, Index m, const ProbeSampler& sampler,
                            ReorthMode mode, int threads) {
  if (m < 1) throw std::invalid_argument("slq_density: m must be at least 1");
  if (k < 1) throw std::invalid_argument("slq_density: k must be at least 1");
  std::vector<DiscreteMeasure> parts(static_cast<std::size_t>(m));
  parallel_for(m, threads, [&](Index i) {
    const Vector b = sampler.probe(i, A.dim());
    KrylovDecomposition dec = lanczos(A, b, k, mode);
    parts[i] = gauss_quadrature(dec.T, dec.b_norm * dec.b_norm / static_cast<double>(m));
  });
  return DiscreteMeasure::merge(parts);
}

Vector kpm_moments(const LinearOperator& A, const Vector& b, Index k, double a, double bb, KpmCoeffMethod method,
                   ReorthMode mode) {
  if (k < 1) throw std::invalid_argument("kpm_moments: k must be at least 1");
  if (!(bb > a)) throw InvalidInterval("kpm_moments: empty interval");
  const Index n = 2 * k;
  Vector mu(n);
  const double c = (a + bb) / (bb - a), s = 2.0 / (bb - a);

  if (method == KpmCoeffMethod::ExplicitRecurrence) {
    auto mapped = [&](const Vector& v) -> Vector { return s * A.apply(v) - c * v; };
    Vector v0 = b;
    mu[0] = b.dot(v0);
    if (n == 1) return mu;
    Vector v1 = mapped(b);
    mu[1] = b.dot(v1);
    for (Index j = 2; j < n; ++j) {
      Vector v2 = 2.0 * mapped(v1) - v0;
      mu[j] = b.dot(v2);
      v0 = std::move(v1);
      v1 = std::move(v2);
    }
    return mu;
  }

  // Gaussian quadrature with k nodes is exact for T_n, n ≤ 2k − 1.
  KrylovDecomposition dec = lanczos(A, b, k, mode);
  const TridiagEig eig = sym_tridiag_eig(dec.T);
  const double mass = dec.b_norm * dec.b_norm;
  mu.setZero();
  for (Index i = 0; i < eig.eigenvalues.size(); ++i) {
    const double w = mass * eig.eigenvectors(0, i) * eig.eigenvectors(0, i);
    const double t = s * eig.eigenvalues[i] - c;
    double p0 = 1.0, p1 = t;
    mu[0] += w;
    if (n > 1) mu[1] += w * t;
    for (Index j = 2; j < n; ++j) {
      const double p2 = 2.0 * t * p1 - p0;
      mu[j] += w * p2;
      p0 = p1;
      p1 = p2;
    }
  }
  return mu;
}

KpmDensity kpm_density(const LinearOperator& A, Index k, Index m, const ProbeSampler& sampler,
                       const KpmOptions& opts) {
  if (m < 1) throw std::invalid_argument("kpm_density: m must be at least 1");
  if (k < 1) throw std::invalid_argument("kpm_density: k must be at least 1");

  // Ritz extremes from probe 0 locate the spectrum.
  const Vector b0 = sampler.probe(0, A.dim());
  const Index ritz_steps = std::min<Index>(2 * k, A.dim());
  const Vector ritz = sym_tridiag_eigenvalues(lanczos(A, b0, ritz_steps, ReorthMode::None).T);
  const double rmin = ritz.minCoeff(), rmax = ritz.maxCoeff();

  KpmDensity out;
  if (opts.interval) {
    out.a = opts.interval->first;
    out.b = opts.interval->second;
    if (!(out.b > out.a)) throw InvalidInterval("kpm_density: empty interval");
    const double slack = 1e-8 * (out.b - out.a);
    if (rmin < out.a - slack || rmax > out.b + slack) {
      throw SpectrumOutsideInterval("kpm_density: Ritz values [" + std::to_string(rmin) + ", " +
                                    std::to_string(rmax) + "] leave the interval [" + std::to_string(out.a) +
                                    ", " + std::to_string(out.b) + "]");
    }
  } else {
    const double span = rmax - rmin;
    const double pad = span > 0.0 ? 0.05 * span : 0.5 * std::max(1.0, std::abs(rmax));
    out.a = rmin - pad;
    out.b = rmax + pad;
  }

  std::vector<Vector> per(static_cast<std::size_t>(m));
  parallel_for(m, opts.threads, [&](Index i) {
    per[i] = kpm_moments(A, sampler.probe(i, A.dim()), k, out.a, out.b, opts.method, opts.mode);
  });
  out.moments = Vector::Zero(2 * k);
  for (const Vector& v : per) out.moments += v;
  out.moments /= static_cast<double>(m);

  out.coefficients = out.moments;
  if (opts.damping == KpmDamping::Jackson) out.coefficients = out.moments.cwiseProduct(jackson_damping(k).rho);
  return out;
}

double KpmDensity::density(double x) const {
  const double t = map(x);
  if (!(t > -1.0 && t < 1.0)) return 0.0;
  double s = coefficients[0];
  double p0 = 1.0, p1 = t;
  for (Index n = 1; n < coefficients.size(); ++n) {
    s += 2.0 * coefficients[n] * p1;
    const double p2 = 2.0 * t * p1 - p0;
    p0 = p1;
    p1 = p2;
  }
  const double v = 1.0 / (kPi * std::sqrt(1.0 - t * t));
  return 2.0 / (b - a) * v * s;
}

double KpmDensity::cdf(double x) const {
  const double t = map(x);
  if (t <= -1.0) return 0.0;
  if (t >= 1.0) return coefficients[0];
  const double theta = std::acos(t);
  double F = coefficients[0] * (kPi - theta) / kPi;
  for (Index n = 1; n < coefficients.size(); ++n) {
    const double dn = static_cast<double>(n);
    F -= 2.0 * coefficients[n] * std::sin(dn * theta) / (dn * kPi);
  }
  return F;
}

double KpmDensity::integrate(const ScalarFn& g, Index n) const {
  if (n < 1) throw std::invalid_argument("KpmDensity::integrate: n must be positive");
  double total = 0.0;
  for (Index j = 0; j < n; ++j) {
    const double theta = kPi * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
    const double t = std::cos(theta);
    double s = coefficients[0];
    for (Index m = 1; m < coefficients.size(); ++m) s += 2.0 * coefficients[m] * std::cos(static_cast<double>(m) * theta);
    total += g(a + 0.5 * (b - a) * (t + 1.0)) * s;
  }
  return total / static_cast<double>(n);
}

double density_cdf(const DensityApprox& approx, double x) {
  if (const auto* mu = std::get_if<DiscreteMeasure>(&approx)) return mu->cdf(x);
  return std::get<KpmDensity>(approx).cdf(x);
}

}  // namespace krylov
