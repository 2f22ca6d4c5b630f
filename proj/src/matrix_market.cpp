#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "krylov/cli.hpp"

namespace krylov {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

LinearOperator LoadedMatrix::op() const {
  std::shared_ptr<const CsrMatrix> A = matrix;
  return LinearOperator(A->rows(), [A](const Vector& x, Vector& y) { y.noalias() = *A * x; });
}

LoadedMatrix load_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open Matrix Market file '" + path + "'");

  std::string line;
  bool symmetric_tag = false;
  bool have_size = false;
  Index rows = 0, cols = 0, nnz = 0, entries = 0;
  std::size_t lineno = 0;
  std::vector<Eigen::Triplet<double>> trip;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.rfind("%%MatrixMarket", 0) == 0) {
      std::istringstream hs(lower(line));
      std::string banner, object, format, field, symmetry;
      hs >> banner >> object >> format >> field >> symmetry;
      if (object != "matrix" || format != "coordinate") {
        throw ParseError(path + ": only 'matrix coordinate' files are supported");
      }
      if (field != "real" && field != "integer") throw ParseError(path + ": field '" + field + "' is not supported");
      if (symmetry == "symmetric") {
        symmetric_tag = true;
      } else if (symmetry != "general") {
        throw ParseError(path + ": symmetry '" + symmetry + "' is not supported");
      }
      continue;
    }
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '%') continue;

    std::istringstream ls(line);
    if (!have_size) {
      if (!(ls >> rows >> cols >> nnz) || rows < 1 || cols < 1 || nnz < 0) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": bad size line");
      }
      if (rows != cols) throw ParseError(path + ": matrix is not square");
      have_size = true;
      trip.reserve(static_cast<std::size_t>(symmetric_tag ? 2 * nnz : nnz));
      continue;
    }
    Index i = 0, j = 0;
    double v = 0.0;
    std::string rest;
    if (!(ls >> i >> j >> v) || (ls >> rest)) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": bad entry line");
    }
    if (i < 1 || j < 1 || i > rows || j > cols) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": index out of range");
    }
    if (!std::isfinite(v)) throw ParseError(path + ":" + std::to_string(lineno) + ": non-finite value");
    if (++entries > nnz) throw ParseError(path + ": more entries than declared");
    trip.emplace_back(i - 1, j - 1, v);
    if (symmetric_tag && i != j) trip.emplace_back(j - 1, i - 1, v);
  }
  if (!have_size) throw ParseError(path + ": missing size line");

  if (entries != nnz) throw ParseError(path + ": expected " + std::to_string(nnz) + " entries");

  auto A = std::make_shared<CsrMatrix>(rows, cols);
  A->setFromTriplets(trip.begin(), trip.end());
  A->makeCompressed();

  LoadedMatrix out;
  if (!symmetric_tag) {
    CsrMatrix At = A->transpose();
    const double scale = A->coeffs().size() ? A->coeffs().cwiseAbs().maxCoeff() : 0.0;
    CsrMatrix D = *A - At;
    const double asym = D.coeffs().size() ? D.coeffs().cwiseAbs().maxCoeff() : 0.0;
    if (asym > 1e-12 * scale) {
      throw NotSymmetric(path + ": max |A − Aᵀ| = " + std::to_string(asym) + " exceeds 1e-12 relative");
    }
    if (asym > 0.0) {
      *A = 0.5 * (*A + At);
      out.warnings.push_back(path + ": nearly symmetric input symmetrized as (A + Aᵀ)/2");
    }
  }
  out.matrix = A;
  return out;
}

}  // namespace krylov
