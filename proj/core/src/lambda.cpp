#include "trgnss/lambda.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>

#include "trgnss/error.hpp"

namespace trgnss {

namespace {

// Q = L' diag(D) L with L unit lower triangular.
void ld_factorize(const Eigen::MatrixXd& q, Eigen::MatrixXd& l, Eigen::VectorXd& d) {
  const int n = static_cast<int>(q.rows());
  Eigen::MatrixXd a = 0.5 * (q + q.transpose());
  l.setZero(n, n);
  d.resize(n);
  for (int i = n - 1; i >= 0; --i) {
    d(i) = a(i, i);
    if (!(d(i) > 0.0)) {
      throw Error(ErrorCode::NotPositiveDefinite, "ambiguity covariance is not positive definite");
    }
    const double s = std::sqrt(d(i));
    for (int j = 0; j <= i; ++j) l(i, j) = a(i, j) / s;
    for (int j = 0; j < i; ++j) {
      for (int k = 0; k <= j; ++k) a(j, k) -= l(i, k) * l(i, j);
    }
    for (int j = 0; j <= i; ++j) l(i, j) /= l(i, i);
  }
}

double round_half_up(double v) { return std::floor(v + 0.5); }
double sign_of(double v) { return v <= 0.0 ? -1.0 : 1.0; }

void integer_gauss(Eigen::MatrixXd& l, Eigen::MatrixXd& z, int i, int j) {
  const double mu = round_half_up(l(i, j));
  if (mu == 0.0) return;
  const int n = static_cast<int>(l.rows());
  for (int k = i; k < n; ++k) l(k, j) -= mu * l(k, i);
  for (int k = 0; k < n; ++k) z(k, j) -= mu * z(k, i);
}

void permute(Eigen::MatrixXd& l, Eigen::VectorXd& d, int j, double del, Eigen::MatrixXd& z) {
  const int n = static_cast<int>(l.rows());
  const double eta = d(j) / del;
  const double lam = d(j + 1) * l(j + 1, j) / del;
  d(j) = eta * d(j + 1);
  d(j + 1) = del;
  for (int k = 0; k < j; ++k) {
    const double a0 = l(j, k), a1 = l(j + 1, k);
    l(j, k) = -l(j + 1, j) * a0 + a1;
    l(j + 1, k) = eta * a0 + lam * a1;
  }
  l(j + 1, j) = lam;
  for (int k = j + 2; k < n; ++k) std::swap(l(k, j), l(k, j + 1));
  for (int k = 0; k < n; ++k) std::swap(z(k, j), z(k, j + 1));
}

void reduce(Eigen::MatrixXd& l, Eigen::VectorXd& d, Eigen::MatrixXd& z) {
  const int n = static_cast<int>(l.rows());
  int j = n - 2, k = n - 2;
  while (j >= 0) {
    if (j <= k) {
      for (int i = j + 1; i < n; ++i) integer_gauss(l, z, i, j);
    }
    const double del = d(j) + l(j + 1, j) * l(j + 1, j) * d(j + 1);
    if (del + 1e-6 < d(j + 1)) {
      permute(l, d, j, del, z);
      k = j;
      j = n - 2;
    } else {
      --j;
    }
  }
}

struct Candidates {
  Eigen::MatrixXd z;  // columns are candidates, sorted by distance
  Eigen::Vector2d distance;
  int count = 0;
};

// Depth-first enumeration with shrinking ellipsoid; keeps the two best candidates.
Candidates search(const Eigen::MatrixXd& l, const Eigen::VectorXd& d, const Eigen::VectorXd& zs) {
  const int n = static_cast<int>(l.rows());
  constexpr int kCandidates = 2;
  constexpr long kLoopMax = 10'000'000;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd dist(n), zb(n), z(n), step(n);
  Candidates out;
  out.z.setZero(n, kCandidates);
  out.distance.setConstant(std::numeric_limits<double>::infinity());

  double maxdist = std::numeric_limits<double>::infinity();
  int imax = 0;
  int k = n - 1;
  dist(k) = 0.0;
  zb(k) = zs(k);
  z(k) = round_half_up(zb(k));
  double y = zb(k) - z(k);
  step(k) = sign_of(y);

  for (long c = 0; c < kLoopMax; ++c) {
    const double newdist = dist(k) + y * y / d(k);
    if (newdist < maxdist) {
      if (k != 0) {
        dist(--k) = newdist;
        for (int i = 0; i <= k; ++i) s(k, i) = s(k + 1, i) + (z(k + 1) - zb(k + 1)) * l(k + 1, i);
        zb(k) = zs(k) + s(k, k);
        z(k) = round_half_up(zb(k));
        y = zb(k) - z(k);
        step(k) = sign_of(y);
      } else {
        if (out.count < kCandidates) {
          if (out.count == 0 || newdist > out.distance(imax)) imax = out.count;
          out.z.col(out.count) = z;
          out.distance(out.count) = newdist;
          ++out.count;
        } else {
          if (newdist < out.distance(imax)) {
            out.z.col(imax) = z;
            out.distance(imax) = newdist;
            imax = out.distance(0) < out.distance(1) ? 1 : 0;
          }
        }
        if (out.count == kCandidates) maxdist = out.distance(imax);
        z(0) += step(0);
        y = zb(0) - z(0);
        step(0) = -step(0) - sign_of(step(0));
      }
    } else {
      if (k == n - 1) break;
      ++k;
      z(k) += step(k);
      y = zb(k) - z(k);
      step(k) = -step(k) - sign_of(step(k));
    }
  }
  if (out.count == kCandidates && out.distance(1) < out.distance(0)) {
    std::swap(out.distance(0), out.distance(1));
    out.z.col(0).swap(out.z.col(1));
  }
  return out;
}

Eigen::VectorXi to_integers(const Eigen::VectorXd& v) {
  Eigen::VectorXi out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = static_cast<int>(std::lround(v(i)));
  return out;
}

}  // namespace

Eigen::MatrixXd lambda_decorrelation(const Eigen::MatrixXd& covariance) {
  const int n = static_cast<int>(covariance.rows());
  Eigen::MatrixXd l;
  Eigen::VectorXd d;
  ld_factorize(covariance, l, d);
  Eigen::MatrixXd z = Eigen::MatrixXd::Identity(n, n);
  reduce(l, d, z);
  return z;
}

AmbiguityResolution lambda_resolve(const AmbiguityProblem& problem, double ratio_threshold) {
  const int n = static_cast<int>(problem.float_values.size());
  if (n < 1 || problem.covariance.rows() != n || problem.covariance.cols() != n) {
    throw Error(ErrorCode::InvalidArgument, "ambiguity problem dimension mismatch");
  }
  Eigen::MatrixXd l;
  Eigen::VectorXd d;
  ld_factorize(problem.covariance, l, d);
  Eigen::MatrixXd z = Eigen::MatrixXd::Identity(n, n);
  reduce(l, d, z);

  const Eigen::VectorXd zs = z.transpose() * problem.float_values;
  const Candidates found = search(l, d, zs);
  if (found.count == 0) {
    throw Error(ErrorCode::NoConvergence, "integer search exhausted its loop budget");
  }

  // Back-transform: a = Z'^-1 z. Z is unimodular so the solve is exact up to rounding.
  const Eigen::MatrixXd zt = z.transpose();
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(zt);
  AmbiguityResolution out;
  out.integers = to_integers(lu.solve(found.z.col(0)));
  out.best_distance = found.distance(0);
  if (found.count > 1) {
    out.second_best = to_integers(lu.solve(found.z.col(1)));
    out.second_distance = found.distance(1);
  } else {
    out.second_best = out.integers;
    out.second_distance = found.distance(0);
  }
  if (out.best_distance > 0.0) {
    out.ratio = std::min(out.second_distance / out.best_distance, kMaxAmbiguityRatio);
  } else {
    out.ratio = kMaxAmbiguityRatio;
  }
  out.accepted = out.ratio >= ratio_threshold;
  return out;
}

}  // namespace trgnss
