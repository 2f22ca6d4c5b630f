#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "krylov/cli.hpp"

namespace krylov {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Splits "a, b(c, d), e" at commas that are not nested inside parentheses.
std::vector<std::string> split_top(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (depth < 0) throw InvalidSpec("unbalanced parentheses in '" + s + "'");
    if (ch == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
      continue;
    }
    cur += ch;
  }
  if (depth != 0) throw InvalidSpec("unbalanced parentheses in '" + s + "'");
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw InvalidSpec(what + ": '" + s + "' is not a number");
  }
  if (pos != s.size()) throw InvalidSpec(what + ": '" + s + "' is not a number");
  return v;
}

Index to_index(const std::string& s, const std::string& what) {
  const double v = to_double(s, what);
  if (v != std::floor(v) || v < 0) throw InvalidSpec(what + ": '" + s + "' is not a nonnegative integer");
  return static_cast<Index>(v);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Vector linspace(Index n, double lo, double hi) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

}  // namespace

MatrixSpec parse_matrix_spec(const std::string& text_in) {
  const std::string text = trim(text_in);
  const auto open = text.find('(');
  if (open == std::string::npos || text.back() != ')') {
    throw InvalidSpec("matrix spec must look like kind(args): '" + text + "'");
  }
  const std::string kind = trim(text.substr(0, open));
  const std::vector<std::string> args = split_top(text.substr(open + 1, text.size() - open - 2));

  MatrixSpec spec;
  std::map<std::string, std::string> named;
  std::vector<std::string> positional;
  for (const std::string& a : args) {
    const auto eq = a.find('=');
    const auto paren = a.find('(');
    if (eq != std::string::npos && (paren == std::string::npos || eq < paren)) {
      const std::string key = trim(a.substr(0, eq));
      if (named.count(key)) throw InvalidSpec("duplicate key '" + key + "' in matrix spec");
      named[key] = trim(a.substr(eq + 1));
    } else {
      positional.push_back(a);
    }
  }
  if (auto it = named.find("rotation_seed"); it != named.end()) {
    spec.rotation_seed = static_cast<std::uint64_t>(to_index(it->second, "rotation_seed"));
    named.erase(it);
  }

  auto take = [&](const std::string& key) -> std::string {
    auto it = named.find(key);
    if (it == named.end()) throw InvalidSpec(kind + ": missing key '" + key + "'");
    std::string v = it->second;
    named.erase(it);
    return v;
  };
  auto take_or = [&](const std::string& key, double dflt) {
    return named.count(key) ? to_double(take(key), key) : dflt;
  };

  if (kind == "eigenvalues") {
    ExplicitEigenvalues e;
    for (const auto& p : positional) e.values.push_back(to_double(p, "eigenvalues"));
    if (e.values.empty()) throw InvalidSpec("eigenvalues: empty list");
    positional.clear();
    spec.kind = e;
  } else if (kind == "graded") {
    GradedSpectrum g;
    g.d = to_index(take("d"), "d");
    g.lambda_min = to_double(take("lambda_min"), "lambda_min");
    g.lambda_max = to_double(take("lambda_max"), "lambda_max");
    g.rho = take_or("rho", 0.9);
    spec.kind = g;
  } else if (kind == "two_interval") {
    TwoIntervalSpectrum t;
    t.d = to_index(take("d"), "d");
    t.a = to_double(take("a"), "a");
    t.b = to_double(take("b"), "b");
    t.c = to_double(take("c"), "c");
    t.d2 = to_double(take("d2"), "d2");
    spec.kind = t;
  } else if (kind == "cluster") {
    ClusterPerturbed c;
    c.base = std::make_shared<MatrixSpec>(parse_matrix_spec(take("base")));
    c.cluster_size = to_index(take("size"), "size");
    c.cluster_width = to_double(take("width"), "width");
    spec.kind = c;
  } else if (kind == "mm") {
    if (positional.size() != 1) throw InvalidSpec("mm: expected exactly one path");
    spec.kind = MatrixMarketFile{positional.front()};
    positional.clear();
  } else {
    throw InvalidSpec("unknown matrix kind '" + kind + "'");
  }
  if (!positional.empty()) throw InvalidSpec(kind + ": unexpected positional argument '" + positional.front() + "'");
  if (!named.empty()) throw InvalidSpec(kind + ": unknown key '" + named.begin()->first + "'");
  // Validate eagerly so that configs fail before any work starts.
  if (!std::holds_alternative<MatrixMarketFile>(spec.kind)) spec_spectrum(spec);
  return spec;
}

std::string format_matrix_spec(const MatrixSpec& spec) {
  std::string s;
  std::string extra = spec.rotation_seed ? ", rotation_seed=" + std::to_string(*spec.rotation_seed) : "";
  if (const auto* e = std::get_if<ExplicitEigenvalues>(&spec.kind)) {
    s = "eigenvalues(";
    for (std::size_t i = 0; i < e->values.size(); ++i) s += (i ? ", " : "") + fmt(e->values[i]);
    return s + extra + ")";
  }
  if (const auto* g = std::get_if<GradedSpectrum>(&spec.kind)) {
    return "graded(d=" + std::to_string(g->d) + ", lambda_min=" + fmt(g->lambda_min) +
           ", lambda_max=" + fmt(g->lambda_max) + ", rho=" + fmt(g->rho) + extra + ")";
  }
  if (const auto* t = std::get_if<TwoIntervalSpectrum>(&spec.kind)) {
    return "two_interval(d=" + std::to_string(t->d) + ", a=" + fmt(t->a) + ", b=" + fmt(t->b) + ", c=" + fmt(t->c) +
           ", d2=" + fmt(t->d2) + extra + ")";
  }
  if (const auto* c = std::get_if<ClusterPerturbed>(&spec.kind)) {
    return "cluster(base=" + format_matrix_spec(*c->base) + ", size=" + std::to_string(c->cluster_size) +
           ", width=" + fmt(c->cluster_width) + extra + ")";
  }
  return "mm(" + std::get<MatrixMarketFile>(spec.kind).path + extra + ")";
}

std::optional<Vector> spec_spectrum(const MatrixSpec& spec) {
  Vector lam;
  if (const auto* e = std::get_if<ExplicitEigenvalues>(&spec.kind)) {
    lam = Eigen::Map<const Vector>(e->values.data(), static_cast<Index>(e->values.size()));
  } else if (const auto* g = std::get_if<GradedSpectrum>(&spec.kind)) {
    if (g->d < 2) throw InvalidSpec("graded: d must be at least 2");
    if (!(g->lambda_max > g->lambda_min)) throw InvalidSpec("graded: need lambda_min < lambda_max");
    if (!(g->rho > 0.0 && g->rho <= 1.0)) throw InvalidSpec("graded: rho must lie in (0, 1]");
    lam.resize(g->d);
    const double dm1 = static_cast<double>(g->d - 1);
    for (Index i = 1; i <= g->d; ++i) {
      lam[i - 1] = g->lambda_min + static_cast<double>(i - 1) / dm1 * (g->lambda_max - g->lambda_min) *
                                       std::pow(g->rho, static_cast<double>(g->d - i));
    }
  } else if (const auto* t = std::get_if<TwoIntervalSpectrum>(&spec.kind)) {
    if (t->d < 2) throw InvalidSpec("two_interval: d must be at least 2");
    if (!(t->a <= t->b && t->b < t->c && t->c <= t->d2)) throw InvalidSpec("two_interval: need a <= b < c <= d2");
    const Index n1 = t->d / 2;
    lam.resize(t->d);
    lam.head(n1) = linspace(n1, t->a, t->b);
    lam.tail(t->d - n1) = linspace(t->d - n1, t->c, t->d2);
  } else if (const auto* c = std::get_if<ClusterPerturbed>(&spec.kind)) {
    if (!c->base) throw InvalidSpec("cluster: missing base spectrum");
    if (c->cluster_size < 1) throw InvalidSpec("cluster: size must be at least 1");
    if (!(c->cluster_width >= 0.0)) throw InvalidSpec("cluster: width must be nonnegative");
    auto base = spec_spectrum(*c->base);
    if (!base) throw InvalidSpec("cluster: base must have a known spectrum");
    const Index cs = c->cluster_size;
    lam.resize(base->size() * cs);
    for (Index i = 0; i < base->size(); ++i) {
      for (Index j = 0; j < cs; ++j) {
        const double off = cs == 1 ? 0.0 : c->cluster_width * (static_cast<double>(j) / static_cast<double>(cs - 1) - 0.5);
        lam[i * cs + j] = (*base)[i] + off;
      }
    }
  } else {
    return std::nullopt;
  }
  if (lam.size() == 0) throw InvalidSpec("matrix spec: empty spectrum");
  if (!lam.allFinite()) throw InvalidSpec("matrix spec: non-finite eigenvalue");
  std::sort(lam.data(), lam.data() + lam.size());
  return lam;
}

Matrix random_orthogonal(Index d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Matrix G(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) G(i, j) = normal(gen);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(d, d);
  // Fix column signs by diag(R) so the distribution is Haar.
  const Matrix& R = qr.matrixQR();
  for (Index j = 0; j < d; ++j)
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  return Q;
}

GeneratedOperator generate_operator(const MatrixSpec& spec) {
  if (const auto* f = std::get_if<MatrixMarketFile>(&spec.kind)) {
    LoadedMatrix lm = load_matrix_market(f->path);
    GeneratedOperator out{lm.op(), std::nullopt, lm.warnings};
    if (spec.rotation_seed) {
      const Matrix V = random_orthogonal(out.op.dim(), *spec.rotation_seed);
      Matrix A = V * out.op.to_dense() * V.transpose();
      out.op = LinearOperator::dense(0.5 * (A + A.transpose()));
    }
    return out;
  }
  Vector lam = *spec_spectrum(spec);
  GeneratedOperator out{LinearOperator::diagonal(lam), lam, {}};
  if (spec.rotation_seed) {
    const Matrix V = random_orthogonal(lam.size(), *spec.rotation_seed);
    Matrix A = V * lam.asDiagonal() * V.transpose();
    out.op = LinearOperator::dense(0.5 * (A + A.transpose()));
  }
  return out;
}

}  // namespace krylov
