#include "krylov/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "krylov/krylov.hpp"

namespace krylov {

namespace {
constexpr double kMergeRel = 1e-12;
constexpr double kPi = 3.14159265358979323846;
}  // namespace

DiscreteMeasure::DiscreteMeasure(const Vector& nodes, const Vector& weights) {
  if (nodes.size() != weights.size()) throw InvalidMeasure("measure: nodes and weights differ in length");
  const Index n = nodes.size();
  if (n == 0) return;
  if (!nodes.allFinite() || !weights.allFinite()) throw InvalidMeasure("measure: non-finite node or weight");
  if (weights.minCoeff() < 0.0) throw InvalidMeasure("measure: negative weight");

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return nodes[a] < nodes[b]; });
  const double span = nodes[order.back()] - nodes[order.front()];
  // When every node sits at rounding distance from one value the span alone
  // is meaningless, so the magnitude of the nodes also sets the scale.
  const double tol = kMergeRel * std::max(span, nodes.cwiseAbs().maxCoeff());

  std::vector<double> xs, ws;
  std::vector<double> wx;  // Σ w·x per merged group, for the weighted mean
  double first_of_group = 0.0;
  for (Index idx : order) {
    double x = nodes[idx], w = weights[idx];
    if (!xs.empty() && x - first_of_group <= tol) {
      ws.back() += w;
      wx.back() += w * x;
      continue;
    }
    first_of_group = x;
    xs.push_back(x);
    ws.push_back(w);
    wx.push_back(w * x);
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ws[i] > 0.0) xs[i] = std::clamp(wx[i] / ws[i], xs[i], xs[i] + tol);
  }
  nodes_ = Eigen::Map<Vector>(xs.data(), static_cast<Index>(xs.size()));
  weights_ = Eigen::Map<Vector>(ws.data(), static_cast<Index>(ws.size()));
  mass_ = weights_.sum();
}

double DiscreteMeasure::cdf(double x) const {
  double s = 0.0;
  for (Index i = 0; i < nodes_.size() && nodes_[i] <= x; ++i) s += weights_[i];
  return s;
}

double DiscreteMeasure::cdf_left(double x) const {
  double s = 0.0;
  for (Index i = 0; i < nodes_.size() && nodes_[i] < x; ++i) s += weights_[i];
  return s;
}

double DiscreteMeasure::integrate(const ScalarFn& f) const {
  double s = 0.0;
  for (Index i = 0; i < nodes_.size(); ++i) s += weights_[i] * f(nodes_[i]);
  return s;
}

double DiscreteMeasure::moment(int j) const {
  return integrate([j](double x) { return std::pow(x, j); });
}

DiscreteMeasure DiscreteMeasure::scaled(double c) const {
  DiscreteMeasure out = *this;
  out.weights_ *= c;
  out.mass_ *= c;
  return out;
}

DiscreteMeasure DiscreteMeasure::eigenvector_density(const Vector& eigenvalues, const Matrix& eigenvectors,
                                                     const Vector& b) {
  Vector proj = eigenvectors.transpose() * b;
  return DiscreteMeasure(eigenvalues, proj.array().square().matrix());
}

DiscreteMeasure DiscreteMeasure::spectral_density(const Vector& eigenvalues) {
  const Index d = eigenvalues.size();
  return DiscreteMeasure(eigenvalues, Vector::Constant(d, 1.0 / static_cast<double>(d)));
}

DiscreteMeasure DiscreteMeasure::merge(const std::vector<DiscreteMeasure>& parts) {
  Index total = 0;
  for (const auto& p : parts) total += p.size();
  Vector x(total), w(total);
  Index o = 0;
  for (const auto& p : parts) {
    x.segment(o, p.size()) = p.nodes();
    w.segment(o, p.size()) = p.weights();
    o += p.size();
  }
  return DiscreteMeasure(x, w);
}

double cheb_eval(ChebKind kind, int n, double x) {
  if (n < 0) throw std::invalid_argument("cheb_eval: negative degree");
  if (n == 0) return 1.0;
  double p0 = 1.0;
  double p1 = kind == ChebKind::T ? x : 2.0 * x;
  for (int j = 2; j <= n; ++j) {
    double p2 = 2.0 * x * p1 - p0;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double ChebyshevExpansion::operator()(double x) const {
  const Index n = coefficients.size();
  if (n == 0) return 0.0;
  const double t = map(x);
  double b1 = 0.0, b2 = 0.0;
  for (Index j = n - 1; j >= 1; --j) {
    double b0 = 2.0 * coefficients[j] + 2.0 * t * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return coefficients[0] + t * b1 - b2;
}

ChebyshevExpansion cheb_approximant(const ScalarFn& f, int degree, double a, double b) {
  if (degree < 0) throw std::invalid_argument("cheb_approximant: negative degree");
  if (!(b > a)) throw std::invalid_argument("cheb_approximant: empty interval");
  const int N = 2 * (degree + 1);
  std::vector<double> theta(N), fv(N);
  for (int j = 0; j < N; ++j) {
    theta[j] = kPi * (j + 0.5) / N;
    double x = a + 0.5 * (b - a) * (std::cos(theta[j]) + 1.0);
    fv[j] = f(x);
    if (!std::isfinite(fv[j])) throw NonFiniteSample("cheb_approximant: f is not finite at x = " + std::to_string(x));
  }
  ChebyshevExpansion out;
  out.a = a;
  out.b = b;
  out.coefficients.resize(degree + 1);
  for (int n = 0; n <= degree; ++n) {
    double s = 0.0;
    for (int j = 0; j < N; ++j) s += fv[j] * std::cos(n * theta[j]);
    out.coefficients[n] = s / N;
  }
  return out;
}

SymTridiagonal stieltjes(const DiscreteMeasure& measure, Index k) {
  if (k < 1) throw std::invalid_argument("stieltjes: k must be at least 1");
  if (!(measure.total_mass() > 0.0)) throw InsufficientSupport("stieltjes: measure has zero mass");
  Index support = 0;
  for (Index i = 0; i < measure.size(); ++i) support += measure.weights()[i] > 0.0 ? 1 : 0;
  if (k > support) {
    throw InsufficientSupport("stieltjes: k = " + std::to_string(k) + " exceeds support size " +
                              std::to_string(support));
  }
  LinearOperator D = LinearOperator::diagonal(measure.nodes());
  Vector start = (measure.weights() / measure.total_mass()).cwiseSqrt();
  KrylovDecomposition dec = lanczos(D, start, k, ReorthMode::Full);
  if (dec.steps() < k) {
    throw InsufficientSupport("stieltjes: numerical support ends after " + std::to_string(dec.steps()) + " steps");
  }
  return dec.T;
}

DiscreteMeasure gauss_quadrature(const SymTridiagonal& M, double total_mass) {
  TridiagEig eig = sym_tridiag_eig(M);
  Vector w = total_mass * eig.eigenvectors.row(0).transpose().array().square();
  return DiscreteMeasure(eig.eigenvalues, w);
}

Vector orthonormal_polys(const SymTridiagonal& M, double x) {
  const Index k = M.size();
  Vector p(k);
  if (k == 0) return p;
  p[0] = 1.0;
  if (k > 1) p[1] = (x - M.alphas[0]) / M.betas[0];
  for (Index n = 1; n + 1 < k; ++n) {
    p[n + 1] = ((x - M.alphas[n]) * p[n] - M.betas[n - 1] * p[n - 1]) / M.betas[n];
  }
  return p;
}

Vector modified_moments(const DiscreteMeasure& measure, const PolyBasis& basis, Index count) {
  if (measure.size() == 0) throw InvalidMeasure("modified_moments: empty measure");
  if (!(basis.b > basis.a)) throw std::invalid_argument("modified_moments: empty interval");
  Vector m = Vector::Zero(count);
  for (Index i = 0; i < measure.size(); ++i) {
    const double t = (2.0 * measure.nodes()[i] - basis.a - basis.b) / (basis.b - basis.a);
    const double w = measure.weights()[i];
    double q0 = 1.0, q1 = t;
    for (Index j = 0; j < count; ++j) {
      if (basis.kind == PolyBasis::Kind::Monomial) {
        m[j] += w * std::pow(t, static_cast<double>(j));
        continue;
      }
      m[j] += w * q0;
      double q2 = 2.0 * t * q1 - q0;
      q0 = q1;
      q1 = q2;
    }
  }
  return m;
}

JacksonWeights jackson_damping(Index k) {
  if (k < 1) throw std::invalid_argument("jackson_damping: k must be at least 1");
  const double N = 2.0 * static_cast<double>(k) + 1.0;
  const double cot = 1.0 / std::tan(kPi / N);
  JacksonWeights out;
  out.rho.resize(2 * k);
  for (Index n = 0; n < 2 * k; ++n) {
    const double arg = static_cast<double>(n) * kPi / N;
    out.rho[n] = ((N - static_cast<double>(n)) * std::cos(arg) + std::sin(arg) * cot) / N;
  }
  return out;
}

double wasserstein(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2) {
  if (std::abs(mu1.total_mass() - mu2.total_mass()) > 1e-8) {
    throw MassMismatch("wasserstein: total masses differ (" + std::to_string(mu1.total_mass()) + " vs " +
                       std::to_string(mu2.total_mass()) + ")");
  }
  const Vector &x1 = mu1.nodes(), &x2 = mu2.nodes();
  const Vector &w1 = mu1.weights(), &w2 = mu2.weights();
  Index i = 0, j = 0;
  double F1 = 0.0, F2 = 0.0, dist = 0.0;
  bool started = false;
  double last = 0.0;
  while (i < x1.size() || j < x2.size()) {
    double x;
    if (j >= x2.size() || (i < x1.size() && x1[i] <= x2[j])) {
      x = x1[i];
    } else {
      x = x2[j];
    }
    if (started) dist += std::abs(F1 - F2) * (x - last);
    while (i < x1.size() && x1[i] == x) F1 += w1[i++];
    while (j < x2.size() && x2[j] == x) F2 += w2[j++];
    last = x;
    started = true;
  }
  return dist;
}

CdfReport cdf_compare(const DiscreteMeasure& mu, const DiscreteMeasure& quad, double tol) {
  CdfReport rep;
  const double mass = std::max(mu.total_mass(), quad.total_mass());
  const double mtol = tol * (mass > 0.0 ? mass : 1.0);
  for (Index i = 0; i < quad.size(); ++i) {
    const double th = quad.nodes()[i];
    const double M = mu.cdf(th);
    const bool ok = quad.cdf_left(th) <= M + mtol && M <= quad.cdf(th) + mtol;
    rep.straddle.push_back(ok);
    if (!ok) ++rep.violations;
  }

  std::vector<double> grid(mu.nodes().data(), mu.nodes().data() + mu.size());
  grid.insert(grid.end(), quad.nodes().data(), quad.nodes().data() + quad.size());
  std::sort(grid.begin(), grid.end());
  if (grid.empty()) return rep;
  const double span = grid.back() - grid.front();
  const double eps = kMergeRel * (span > 0.0 ? span : 1.0);
  int last_sign = 0;
  double prev = -std::numeric_limits<double>::infinity();
  for (double x : grid) {
    if (x - prev <= eps) continue;
    prev = x;
    // Evaluate just past any cluster of nearly coincident nodes.
    double probe = x + eps;
    double D = mu.cdf(probe) - quad.cdf(probe);
    int s = D > mtol ? 1 : (D < -mtol ? -1 : 0);
    if (s != 0) {
      if (last_sign != 0 && s != last_sign) ++rep.sign_changes;
      last_sign = s;
    }
  }
  return rep;
}

}  // namespace krylov
