#include "bdcalc/toeplitz.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

namespace bdcalc {

ProjectionTriple::ProjectionTriple(CMat pi0_, CMat pi1_, CMat a_, double tol)
    : pi0(std::move(pi0_)), pi1(std::move(pi1_)), a(std::move(a_)) {
  if (pi0.rows() != pi0.cols() || pi1.rows() != pi1.cols())
    throw std::invalid_argument("ProjectionTriple: projections must be square");
  if (a.rows() != pi1.rows() || a.cols() != pi0.rows())
    throw std::invalid_argument("ProjectionTriple: shape of a vs projections");
  const double s0 = std::max(1.0, pi0.norm());
  const double s1 = std::max(1.0, pi1.norm());
  if ((pi0 * pi0 - pi0).norm() > tol * s0 ||
      (pi1 * pi1 - pi1).norm() > tol * s1)
    throw std::invalid_argument("ProjectionTriple: pi_j not idempotent");
  const double sa = std::max(1.0, a.norm());
  const CMat id0 = CMat::Identity(pi0.rows(), pi0.rows());
  const CMat id1 = CMat::Identity(pi1.rows(), pi1.rows());
  if ((a * (id0 - pi0)).norm() > tol * sa ||
      ((id1 - pi1) * a).norm() > tol * sa)
    throw std::invalid_argument(
        "ProjectionTriple: a(1-pi0) = (1-pi1)a = 0 violated");
}

CMat gap_operator(const ProjectionTriple& t) {
  const CMat id0 = CMat::Identity(t.pi0.rows(), t.pi0.rows());
  const CMat c = id0 - t.pi0;
  return t.a.adjoint() * t.a + c.adjoint() * c;
}

bool gap_invertible(const ProjectionTriple& t, double rank_tol) {
  const CMat a0 = gap_operator(t);
  Eigen::JacobiSVD<CMat> svd(a0);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1) > rank_tol * sv(0);
}

CMat left_parametrix(const ProjectionTriple& t) {
  const CMat a0 = gap_operator(t);
  Eigen::FullPivLU<CMat> lu(a0);
  if (!lu.isInvertible())
    throw NonEllipticError(
        "left_parametrix: gap operator singular (restriction not bijective)");
  return t.pi0 * lu.solve(t.a.adjoint() * t.pi1);
}

CMat right_parametrix(const ProjectionTriple& t) {
  ProjectionTriple adj(t.pi1.adjoint(), t.pi0.adjoint(), t.a.adjoint());
  return left_parametrix(adj).adjoint();
}

namespace {

// Orthonormal basis of the column space of p, rank by singular value
// threshold; ties at the threshold are reported, never silently dropped.
CMat range_basis(const CMat& p, double rank_tol, int* rank_out) {
  Eigen::JacobiSVD<CMat> svd(p, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double cut = rank_tol * sv(0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > 0.2 * cut && sv(i) <= 5.0 * cut)
      throw RankDeficiencyError(
          "range_basis: singular value within a factor 5 of the rank "
          "threshold; rank decision ambiguous",
          r, -1);
  if (rank_out) *rank_out = r;
  return svd.matrixU().leftCols(r);
}

}  // namespace

CMat toeplitz_invert(const ProjectionTriple& t, double rank_tol) {
  int r0 = 0, r1 = 0;
  const CMat x0 = range_basis(t.pi0, rank_tol, &r0);
  const CMat x1 = range_basis(t.pi1, rank_tol, &r1);
  if (r0 != r1)
    throw RankDeficiencyError(
        "toeplitz_invert: rank of pi0 and pi1 differ; restriction cannot be "
        "bijective",
        r0, r1);
  // coordinates of the restriction im pi0 -> im pi1
  const CMat ahat = x1.adjoint() * (t.a * x0);
  Eigen::JacobiSVD<CMat> svd(ahat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (r0 > 0 && sv(sv.size() - 1) <= rank_tol * sv(0)) {
    int rr = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > rank_tol * sv(0)) ++rr;
    throw RankDeficiencyError(
        "toeplitz_invert: restriction numerically rank deficient", rr, r0);
  }
  const CMat ahat_inv = svd.solve(CMat::Identity(r1, r1));
  return x0 * ahat_inv * x1.adjoint() * t.pi1;
}

CMat random_idempotent(int dim, int rank, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  while (true) {
    CMat x(dim, rank), y(rank, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < rank; ++j) x(i, j) = Complex(g(rng), g(rng));
    for (int i = 0; i < rank; ++i)
      for (int j = 0; j < dim; ++j) y(i, j) = Complex(g(rng), g(rng));
    const CMat yx = y * x;
    Eigen::FullPivLU<CMat> lu(yx);
    if (!lu.isInvertible()) continue;
    Eigen::JacobiSVD<CMat> svd(yx);
    if (svd.singularValues()(rank - 1) < 1e-3 * svd.singularValues()(0))
      continue;
    // keep the idempotent itself moderately conditioned: the angle between
    // range and kernel controls residual amplification downstream
    CMat p = x * lu.solve(y);
    if (p.norm() > 20.0) continue;
    return p;
  }
}

ProjectionTriple random_triple(int dim, int rank, std::mt19937_64& rng,
                               int defect) {
  std::normal_distribution<double> g(0.0, 1.0);
  const CMat pi0 = random_idempotent(dim, rank, rng);
  const CMat pi1 = random_idempotent(dim, rank, rng);

  // bases of the ranges to steer the restriction's rank exactly
  Eigen::JacobiSVD<CMat> s0(pi0, Eigen::ComputeThinU);
  Eigen::JacobiSVD<CMat> s1(pi1, Eigen::ComputeThinU);
  const CMat x0 = s0.matrixU().leftCols(rank);
  const CMat x1 = s1.matrixU().leftCols(rank);

  CMat core(rank, rank);
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < rank; ++j) core(i, j) = Complex(g(rng), g(rng));
  for (int d = 0; d < defect && d < rank; ++d)
    core.row(rank - 1 - d).setZero();

  const CMat a = x1 * core * x0.adjoint() * pi0;
  return ProjectionTriple(pi0, pi1, a);
}

}  // namespace bdcalc
