#include "innermpi/sdp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace innermpi {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::PrimalInfeasible: return "primal-infeasible";
    case SolveStatus::DualInfeasible: return "dual-infeasible";
    case SolveStatus::MaxIter: return "max-iter";
    case SolveStatus::NumericalTrouble: return "numerical-trouble";
  }
  return "unknown";
}

MatrixXd SdpSolution::gram_block(const SdpProblem& problem, int b) const {
  const int d = problem.psd_blocks.at(b);
  MatrixXd Q(d, d);
  int id = problem.block_offset(b);
  for (int r = 0; r < d; ++r) {
    for (int c = r; c < d; ++c, ++id) {
      Q(r, c) = x.at(id);
      Q(c, r) = x.at(id);
    }
  }
  return Q;
}

namespace {

// Dense view of the original problem: rows scaled to unit norm, PSD data in
// full symmetric vec form (column-major n*n per block).
struct DenseProblem {
  int m = 0;
  int nf = 0;
  int nl = 0;
  std::vector<int> dims;
  std::vector<int> cone_offset;  // offset of each PSD block in the cone vector
  int ncone = 0;                 // nl + sum n_b^2
  MatrixXd Af;                   // m x nf
  MatrixXd Ac;                   // m x ncone
  VectorXd b;
  VectorXd cf;
  VectorXd cc;
  VectorXd row_scale;
};

DenseProblem densify(const SdpProblem& p) {
  DenseProblem d;
  d.m = static_cast<int>(p.rows.size());
  d.nf = p.free_count;
  d.nl = p.nonneg_count;
  d.dims = p.psd_blocks;
  d.ncone = d.nl;
  for (int n : d.dims) {
    d.cone_offset.push_back(d.ncone);
    d.ncone += n * n;
  }
  // Map SdpProblem variable -> (is_free, position(s) in the cone vector).
  const int nv = p.variable_count();
  std::vector<int> pos1(nv, -1), pos2(nv, -1);
  std::vector<double> weight(nv, 1.0);
  for (int v = 0; v < nv; ++v) {
    if (v < d.nf) {
      pos1[v] = v;
    } else if (v < d.nf + d.nl) {
      pos1[v] = v - d.nf;
    }
  }
  for (int blk = 0; blk < static_cast<int>(d.dims.size()); ++blk) {
    const int n = d.dims[blk];
    int id = p.block_offset(blk);
    for (int r = 0; r < n; ++r) {
      for (int c = r; c < n; ++c, ++id) {
        pos1[id] = d.cone_offset[blk] + c * n + r;
        pos2[id] = d.cone_offset[blk] + r * n + c;
        weight[id] = r == c ? 1.0 : 0.5;
      }
    }
  }
  auto scatter = [&](int v, double value, auto&& free_target, auto&& cone_target) {
    if (v < d.nf) {
      free_target(pos1[v]) += value;
    } else if (v < d.nf + d.nl) {
      cone_target(pos1[v]) += value;
    } else if (pos1[v] == pos2[v]) {
      cone_target(pos1[v]) += value;
    } else {
      cone_target(pos1[v]) += weight[v] * value;
      cone_target(pos2[v]) += weight[v] * value;
    }
  };
  d.Af = MatrixXd::Zero(d.m, d.nf);
  d.Ac = MatrixXd::Zero(d.m, d.ncone);
  d.b = VectorXd::Zero(d.m);
  for (int i = 0; i < d.m; ++i) {
    for (const auto& e : p.rows[i].entries) {
      scatter(
          e.var, e.value, [&](int j) -> double& { return d.Af(i, j); }, [&](int j) -> double& { return d.Ac(i, j); });
    }
    d.b(i) = p.rows[i].rhs;
  }
  d.cf = VectorXd::Zero(d.nf);
  d.cc = VectorXd::Zero(d.ncone);
  for (const auto& e : p.objective) {
    scatter(
        e.var, e.value, [&](int j) -> double& { return d.cf(j); }, [&](int j) -> double& { return d.cc(j); });
  }
  d.row_scale = VectorXd::Ones(d.m);
  for (int i = 0; i < d.m; ++i) {
    const double norm = std::sqrt(d.Af.row(i).squaredNorm() + d.Ac.row(i).squaredNorm());
    if (norm > 0.0) d.row_scale(i) = 1.0 / norm;
  }
  d.Af = d.row_scale.asDiagonal() * d.Af;
  d.Ac = d.row_scale.asDiagonal() * d.Ac;
  d.b = d.row_scale.asDiagonal() * d.b;
  return d;
}

// Conic problem without free variables, produced by orthogonal row
// transformations of the dense problem.
struct ReducedProblem {
  MatrixXd A;  // m x ncone
  VectorXd b;
  VectorXd c;
  double offset = 0.0;
  // y_scaled_rows = y_free + T * y_reduced
  VectorXd y_free;
  MatrixXd T;
  // Free-variable recovery: x_f = P * [R11^{-1} Q1'(b - Ac x_c); 0]
  MatrixXd Q1;
  MatrixXd R11;
  Eigen::VectorXi perm;
  int free_rank = 0;
  bool inconsistent = false;       // rows contradict each other
  bool free_unbounded = false;     // c_f not in the row space of A_f'
  std::string message;
};

ReducedProblem reduce(const DenseProblem& d) {
  ReducedProblem r;
  const int m = d.m;
  MatrixXd Q2;
  VectorXd yf = VectorXd::Zero(m);
  if (d.nf > 0 && m > 0) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(d.Af);
    qr.setThreshold(1e-11);
    const int rank = static_cast<int>(qr.rank());
    MatrixXd Q = qr.householderQ();
    r.Q1 = Q.leftCols(rank);
    Q2 = Q.rightCols(m - rank);
    MatrixXd R = qr.matrixR().topLeftCorner(rank, d.nf).template triangularView<Eigen::Upper>();
    r.R11 = R.leftCols(rank);
    r.perm = qr.colsPermutation().indices();
    r.free_rank = rank;
    // A_f' y = c_f with y = Q1 t:  R' t = P' c_f.
    VectorXd pc(d.nf);
    for (int j = 0; j < d.nf; ++j) pc(j) = d.cf(r.perm(j));
    VectorXd t = VectorXd::Zero(rank);
    if (rank > 0) t = r.R11.transpose().triangularView<Eigen::Lower>().solve(pc.head(rank));
    const double mismatch = (R.transpose() * t - pc).norm();
    if (mismatch > 1e-9 * (1.0 + d.cf.norm())) {
      r.free_unbounded = true;
      r.message = "objective has a component along free directions that no row constrains";
    }
    yf = r.Q1 * t;
  } else if (d.nf > 0) {
    r.perm = Eigen::VectorXi::LinSpaced(d.nf, 0, d.nf - 1);
    if (d.cf.norm() > 0.0) {
      r.free_unbounded = true;
      r.message = "objective depends on unconstrained free variables";
    }
  } else {
    Q2 = MatrixXd::Identity(m, m);
  }
  MatrixXd A1 = Q2.transpose() * d.Ac;
  VectorXd b1 = Q2.transpose() * d.b;
  r.c = d.cc - d.Ac.transpose() * yf;
  r.offset = d.b.dot(yf);
  r.y_free = yf;

  // Drop dependent rows; the part of b outside the row space must vanish.
  const int m1 = static_cast<int>(A1.rows());
  if (m1 > 0) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(A1);
    qr.setThreshold(1e-11);
    const int rank = static_cast<int>(qr.rank());
    MatrixXd Q = qr.householderQ();
    VectorXd bq = Q.transpose() * b1;
    if (rank < m1 && bq.tail(m1 - rank).norm() > 1e-9 * (1.0 + d.b.norm())) {
      r.inconsistent = true;
      r.message = "equality rows are inconsistent";
    }
    MatrixXd Qr = Q.leftCols(rank);
    r.A = Qr.transpose() * A1;
    r.b = bq.head(rank);
    r.T = Q2 * Qr;
  } else {
    r.A = MatrixXd::Zero(0, d.ncone);
    r.b = VectorXd::Zero(0);
    r.T = MatrixXd::Zero(m, 0);
  }
  return r;
}

VectorXd recover_free(const DenseProblem& d, const ReducedProblem& r, const VectorXd& xc) {
  VectorXd xf = VectorXd::Zero(d.nf);
  if (d.nf == 0 || r.free_rank == 0) return xf;
  VectorXd rhs = r.Q1.transpose() * (d.b - d.Ac * xc);
  VectorXd z = r.R11.topLeftCorner(r.free_rank, r.free_rank).triangularView<Eigen::Upper>().solve(rhs);
  for (int j = 0; j < r.free_rank; ++j) xf(r.perm(j)) = z(j);
  return xf;
}

template <class R>
using Mat = Eigen::Matrix<R, Eigen::Dynamic, Eigen::Dynamic>;
template <class R>
using Vec = Eigen::Matrix<R, Eigen::Dynamic, 1>;

template <class R>
Mat<R> sym(const Mat<R>& M) {
  return R(0.5) * (M + M.transpose());
}

// Largest step t with V + t dV PSD (capped at 1e30).
template <class R>
R max_psd_step(const Mat<R>& V, const Mat<R>& dV) {
  Eigen::LLT<Mat<R>> llt(V);
  if (llt.info() != Eigen::Success) return R(0);
  const Mat<R> L = llt.matrixL();
  Mat<R> S = L.template triangularView<Eigen::Lower>().solve(dV);
  S = L.template triangularView<Eigen::Lower>().solve(S.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Mat<R>> es(sym<R>(S), Eigen::EigenvaluesOnly);
  const R lmin = es.eigenvalues().minCoeff();
  return lmin >= R(0) ? R(1e30) : R(-1) / lmin;
}

template <class R>
R max_linear_step(const Vec<R>& v, const Vec<R>& dv) {
  R t(1e30);
  for (int i = 0; i < v.size(); ++i) {
    if (dv(i) < R(0)) t = std::min(t, -v(i) / dv(i));
  }
  return t;
}

template <class R>
struct Iterate {
  std::vector<Mat<R>> X, Z;
  Vec<R> xl, zl, y;
};

// Iterate of the reduced problem in unscaled double precision.
struct ConeSolution {
  std::vector<MatrixXd> X, Z;
  VectorXd xl, zl, y;
};

template <class R>
class ConicIpm {
 public:
  ConicIpm(const ReducedProblem& r, const DenseProblem& d, const SolverOptions& opt)
      : dims_(d.dims), cone_offset_(d.cone_offset), nl_(d.nl), opt_(opt) {
    Mat<R> A = r.A.cast<R>();
    b_ = r.b.cast<R>();
    c_ = r.c.cast<R>();
    m_ = static_cast<int>(A.rows());
    bscale_ = std::max(R(1), b_.norm());
    cscale_ = std::max(R(1), c_.norm());
    b_ /= bscale_;
    c_ /= cscale_;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      const int n = dims_[k];
      blockA_.push_back(A.middleCols(cone_offset_[k], n * n).transpose());  // n^2 x m
      blockC_.push_back(Eigen::Map<const Mat<R>>(c_.data() + cone_offset_[k], n, n));
    }
    linA_ = A.leftCols(nl_).transpose();  // nl x m
    linC_ = c_.head(nl_);
    if (m_ > 0) gram_.compute(A * A.transpose());
    nu_ = nl_;
    for (int n : dims_) nu_ += n;
  }

  R bscale() const { return bscale_; }
  R cscale() const { return cscale_; }

  Iterate<R> initial_point() const {
    using std::abs;
    Iterate<R> it;
    it.y = Vec<R>::Zero(m_);
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      const int n = dims_[k];
      using std::sqrt;
      const R sn = sqrt(R(n));
      R xi = std::max(R(10), sn), eta = std::max(R(10), sn);
      for (int j = 0; j < m_; ++j) {
        const R an = blockA_[k].col(j).norm();
        xi = std::max(xi, sn * (R(1) + R(abs(b_(j)))) / (R(1) + an));
        eta = std::max(eta, an);
      }
      eta = std::max(eta, blockC_[k].norm());
      it.X.push_back(xi * Mat<R>::Identity(n, n));
      it.Z.push_back(eta * Mat<R>::Identity(n, n));
    }
    R xi(10), eta(10);
    for (int j = 0; j < m_ && nl_ > 0; ++j) {
      const R an = linA_.col(j).norm();
      xi = std::max(xi, (R(1) + R(abs(b_(j)))) / (R(1) + an));
      eta = std::max(eta, an);
    }
    if (nl_ > 0) eta = std::max(eta, linC_.norm());
    it.xl = Vec<R>::Constant(nl_, xi);
    it.zl = Vec<R>::Constant(nl_, eta);
    return it;
  }

  Vec<R> apply_A(const std::vector<Mat<R>>& X, const Vec<R>& xl) const {
    Vec<R> r = Vec<R>::Zero(m_);
    if (nl_ > 0) r += linA_.transpose() * xl;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      r += blockA_[k].transpose() * Eigen::Map<const Vec<R>>(X[k].data(), X[k].size());
    }
    return r;
  }

  Mat<R> adjoint_block(std::size_t k, const Vec<R>& y) const {
    const int n = dims_[k];
    const Vec<R> v = blockA_[k] * y;
    return sym<R>(Eigen::Map<const Mat<R>>(v.data(), n, n));
  }

  struct Residuals {
    Vec<R> rp;
    std::vector<Mat<R>> Rd;
    Vec<R> rdl;
    R mu = 0, pobj = 0, dobj = 0;
    double relp = 0, reld = 0;
  };

  Residuals residuals(const Iterate<R>& it) const {
    Residuals r;
    r.rp = b_ - apply_A(it.X, it.xl);
    R dnorm2 = 0, cnorm2 = linC_.squaredNorm(), xz = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      r.Rd.push_back(blockC_[k] - adjoint_block(k, it.y) - it.Z[k]);
      dnorm2 += r.Rd.back().squaredNorm();
      cnorm2 += blockC_[k].squaredNorm();
      xz += it.X[k].cwiseProduct(it.Z[k]).sum();
      r.pobj += blockC_[k].cwiseProduct(it.X[k]).sum();
    }
    if (nl_ > 0) {
      r.rdl = linC_ - linA_ * it.y - it.zl;
      dnorm2 += r.rdl.squaredNorm();
      xz += it.xl.dot(it.zl);
      r.pobj += linC_.dot(it.xl);
    } else {
      r.rdl = Vec<R>::Zero(0);
    }
    r.dobj = b_.dot(it.y);
    r.mu = xz / R(std::max(1, nu_));
    r.relp = static_cast<double>(r.rp.norm() / (R(1) + b_.norm()));
    using std::sqrt;
    r.reld = static_cast<double>(R(sqrt(dnorm2)) / (R(1) + R(sqrt(cnorm2))));
    return r;
  }

  // Farkas-type checks on the current iterate.
  bool certifies_primal_infeasible(const Iterate<R>& it) const {
    const R by = b_.dot(it.y);
    if (!(by > R(0))) return false;
    const Vec<R> yt = it.y / by;
    R worst = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      Eigen::SelfAdjointEigenSolver<Mat<R>> es(-adjoint_block(k, yt), Eigen::EigenvaluesOnly);
      worst = std::min(worst, es.eigenvalues().minCoeff());
    }
    if (nl_ > 0) worst = std::min(worst, R((-(linA_ * yt)).minCoeff()));
    return worst >= R(-opt_.feas_tol);
  }

  bool certifies_dual_infeasible(const Iterate<R>& it) const {
    R cx = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) cx += blockC_[k].cwiseProduct(it.X[k]).sum();
    if (nl_ > 0) cx += linC_.dot(it.xl);
    if (!(cx < R(0))) return false;
    return apply_A(it.X, it.xl).norm() / (-cx) <= R(opt_.feas_tol);
  }

  struct Direction {
    Vec<R> dy;
    std::vector<Mat<R>> dX, dZ;
    Vec<R> dxl, dzl;
  };

  // Factorizes the Schur complement M_ij = tr(A_i X A_j Z^-1) (+ linear part).
  bool factor(const Iterate<R>& it) {
    Zinv_.clear();
    left_.clear();
    right_.clear();
    Mat<R> M = Mat<R>::Zero(m_, m_);
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      const int n = dims_[k];
      Eigen::LLT<Mat<R>> llt(it.Z[k]);
      if (llt.info() != Eigen::Success) return false;
      Zinv_.push_back(sym<R>(llt.solve(Mat<R>::Identity(n, n))));
      left_.push_back(it.X[k]);
      right_.push_back(Zinv_.back());
      Mat<R> G(n * n, m_);
      Mat<R> tmp(n, n);
      for (int j = 0; j < m_; ++j) {
        Eigen::Map<const Mat<R>> Aj(blockA_[k].col(j).data(), n, n);
        tmp.noalias() = left_.back() * Aj;
        Eigen::Map<Mat<R>>(G.col(j).data(), n, n).noalias() = tmp * right_.back();
      }
      M.noalias() += blockA_[k].transpose() * G;
    }
    if (nl_ > 0) {
      const Vec<R> dgl = it.xl.cwiseQuotient(it.zl);
      M.noalias() += linA_.transpose() * dgl.asDiagonal() * linA_;
    }
    M = sym<R>(M);
    R reg = 0;
    const R diag_max = m_ > 0 ? R(M.diagonal().maxCoeff()) : R(1);
    for (int attempt = 0; attempt < 4; ++attempt) {
      Mat<R> Mr = M;
      if (reg > R(0)) Mr.diagonal().array() += reg;
      schur_.compute(Mr);
      if (schur_.info() == Eigen::Success) return true;
      reg = reg == R(0) ? R(1e-14) * std::max(R(1), diag_max) : reg * R(100);
    }
    return false;
  }

  // Search direction for target sigma*mu, with the second-order term of a
  // predictor when given. dy is refined against the exact primal map.
  Direction direction(const Iterate<R>& it, const Residuals& r, R sigma_mu, const Direction* predictor) const {
    Vec<R> h = r.rp;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      const Mat<R>& Zi = Zinv_[k];
      Mat<R> Hk = sigma_mu * Zi - it.X[k] - left_[k] * r.Rd[k] * right_[k];
      if (predictor) Hk -= predictor->dX[k] * predictor->dZ[k] * Zi;
      h -= blockA_[k].transpose() * Eigen::Map<const Vec<R>>(Hk.data(), Hk.size());
    }
    Vec<R> dgl;
    if (nl_ > 0) {
      dgl = it.xl.cwiseQuotient(it.zl);
      Vec<R> hl = sigma_mu * it.zl.cwiseInverse() - it.xl - dgl.cwiseProduct(r.rdl);
      if (predictor) hl -= predictor->dxl.cwiseProduct(predictor->dzl).cwiseQuotient(it.zl);
      h -= linA_.transpose() * hl;
    }
    Direction d;
    d.dy = m_ > 0 ? Vec<R>(schur_.solve(h)) : Vec<R>::Zero(0);
    auto expand = [&]() {
      d.dX.clear();
      d.dZ.clear();
      for (std::size_t k = 0; k < dims_.size(); ++k) {
        Mat<R> dZ = r.Rd[k] - adjoint_block(k, d.dy);
        Mat<R> dX = sigma_mu * Zinv_[k] - it.X[k] - left_[k] * dZ * right_[k];
        if (predictor) dX -= predictor->dX[k] * predictor->dZ[k] * Zinv_[k];
        d.dX.push_back(sym<R>(dX));
        d.dZ.push_back(sym<R>(dZ));
      }
      if (nl_ > 0) {
        d.dzl = r.rdl - linA_ * d.dy;
        d.dxl = sigma_mu * it.zl.cwiseInverse() - it.xl - dgl.cwiseProduct(d.dzl);
        if (predictor) d.dxl -= predictor->dxl.cwiseProduct(predictor->dzl).cwiseQuotient(it.zl);
      }
    };
    expand();
    // A(dX(dy)) is affine in dy with derivative M.
    if (m_ > 0) {
      R last = std::numeric_limits<R>::infinity();
      for (int pass = 0; pass < 3; ++pass) {
        const Vec<R> miss = r.rp - apply_A(d.dX, d.dxl);
        const R norm = miss.norm();
        if (!(norm < R(0.5) * last) || norm <= R(1e-15) * (R(1) + r.rp.norm())) break;
        last = norm;
        const Vec<R> prev = d.dy;
        d.dy += schur_.solve(miss);
        expand();
        if (!d.dy.allFinite()) {
          d.dy = prev;
          expand();
          break;
        }
      }
      // Remaining miss: least-norm correction so that A dX = rp holds.
      const Vec<R> miss = r.rp - apply_A(d.dX, d.dxl);
      const Vec<R> z = gram_.solve(miss);
      for (std::size_t k = 0; k < dims_.size(); ++k) d.dX[k] += adjoint_block(k, z);
      if (nl_ > 0) d.dxl += linA_ * z;
    }
    return d;
  }

  std::pair<R, R> step_lengths(const Iterate<R>& it, const Direction& d) const {
    R ap(1e30), ad(1e30);
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      ap = std::min(ap, max_psd_step<R>(it.X[k], d.dX[k]));
      ad = std::min(ad, max_psd_step<R>(it.Z[k], d.dZ[k]));
    }
    if (nl_ > 0) {
      ap = std::min(ap, max_linear_step<R>(it.xl, d.dxl));
      ad = std::min(ad, max_linear_step<R>(it.zl, d.dzl));
    }
    return {ap, ad};
  }

  R complementarity_after(const Iterate<R>& it, const Direction& d, R ap, R ad) const {
    R s = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      s += (it.X[k] + ap * d.dX[k]).cwiseProduct(it.Z[k] + ad * d.dZ[k]).sum();
    }
    if (nl_ > 0) s += (it.xl + ap * d.dxl).dot(it.zl + ad * d.dzl);
    return s / R(std::max(1, nu_));
  }

  // min over cones of lambda_min(X^1/2 Z X^1/2) / mu; 1 on the central path.
  R centrality(const Iterate<R>& it) const {
    R xz = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) xz += it.X[k].cwiseProduct(it.Z[k]).sum();
    if (nl_ > 0) xz += it.xl.dot(it.zl);
    const R mu = xz / R(std::max(1, nu_));
    if (!(mu > R(0))) return R(0);
    R worst = std::numeric_limits<R>::infinity();
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      Eigen::LLT<Mat<R>> llt(it.X[k]);
      if (llt.info() != Eigen::Success) return R(0);
      const Mat<R> L = llt.matrixL();
      Eigen::SelfAdjointEigenSolver<Mat<R>> es(sym<R>(L.transpose() * it.Z[k] * L), Eigen::EigenvaluesOnly);
      worst = std::min(worst, R(es.eigenvalues().minCoeff()));
    }
    if (nl_ > 0) worst = std::min(worst, R(it.xl.cwiseProduct(it.zl).minCoeff()));
    return worst / mu;
  }

  static void apply(Iterate<R>& it, const Direction& d, R ap, R ad) {
    for (std::size_t k = 0; k < it.X.size(); ++k) {
      it.X[k] = sym<R>(it.X[k] + ap * d.dX[k]);
      it.Z[k] = sym<R>(it.Z[k] + ad * d.dZ[k]);
    }
    if (it.xl.size() > 0) {
      it.xl += ap * d.dxl;
      it.zl += ad * d.dzl;
    }
    if (it.y.size() > 0) it.y += ad * d.dy;
  }

  ConeSolution unscale(const Iterate<R>& it) const {
    ConeSolution s;
    for (std::size_t k = 0; k < it.X.size(); ++k) {
      s.X.push_back((it.X[k] * bscale_).template cast<double>());
      s.Z.push_back((it.Z[k] * cscale_).template cast<double>());
    }
    s.xl = (it.xl * bscale_).template cast<double>();
    s.zl = (it.zl * cscale_).template cast<double>();
    s.y = (it.y * cscale_).template cast<double>();
    return s;
  }

  Vec<R> rp_of(const Iterate<R>& it) const { return b_ - apply_A(it.X, it.xl); }

 private:
  Vec<R> b_, c_;
  std::vector<int> dims_;
  std::vector<int> cone_offset_;
  int nl_;
  SolverOptions opt_;
  int m_ = 0;
  int nu_ = 0;
  R bscale_ = 1, cscale_ = 1;
  std::vector<Mat<R>> blockA_;
  std::vector<Mat<R>> blockC_;
  Mat<R> linA_;
  Vec<R> linC_;
  std::vector<Mat<R>> Zinv_;
  std::vector<Mat<R>> left_, right_;
  Eigen::LLT<Mat<R>> schur_;
  Eigen::LLT<Mat<R>> gram_;  // A A'
};

// Fraction of the distance to the cone boundary taken per step, and the
// neighborhood width; more aggressive settings stall on the ill-posed
// high-order tightenings.
constexpr double kStepFraction = 0.9;
constexpr double kCentrality = 1e-2;
// Stalled runs within this merit of the tolerances are continued in long double.
constexpr double kEscalationMerit = 1e3;

struct IpmOutcome {
  SolveStatus status = SolveStatus::MaxIter;
  ConeSolution best;
  double merit = std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::string message;
};

template <class R>
struct IpmStage {
  IpmOutcome outcome;
  Iterate<R> best;
};

template <class To, class From>
Iterate<To> convert(const Iterate<From>& it) {
  Iterate<To> out;
  for (const auto& X : it.X) out.X.push_back(X.template cast<To>());
  for (const auto& Z : it.Z) out.Z.push_back(Z.template cast<To>());
  out.xl = it.xl.template cast<To>();
  out.zl = it.zl.template cast<To>();
  out.y = it.y.template cast<To>();
  return out;
}

// Runs the path-following loop for at most budget iterations, from start
// when given. accept() decides whether an iterate meets the tolerances on
// the original problem.
template <class R>
IpmStage<R> run_ipm(const ReducedProblem& r, const DenseProblem& d, const SolverOptions& opt,
                    const std::function<bool(const ConeSolution&)>& accept, const Iterate<R>* start, int budget) {
  ConicIpm<R> ipm(r, d, opt);
  Iterate<R> it = start ? *start : ipm.initial_point();
  Iterate<R> best = it;
  IpmOutcome out;
  const R scale = ipm.bscale() * ipm.cscale();
  int stalls = 0;
  int best_iter = 0;
  int iter = 0;
  for (; iter < budget; ++iter) {
    const auto res = ipm.residuals(it);
    const double pobj = static_cast<double>(res.pobj * scale) + r.offset;
    const double dobj = static_cast<double>(res.dobj * scale) + r.offset;
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    const double merit = std::max({res.relp / opt.feas_tol, res.reld / opt.feas_tol, gap / opt.gap_tol});
    if (opt.verbose) {
      std::fprintf(stderr, "%3d pobj %+.10e dobj %+.10e relp %.2e reld %.2e gap %.2e mu %.2e\n", iter, pobj, dobj,
                   res.relp, res.reld, gap, static_cast<double>(res.mu));
    }
    if (merit < out.merit) {
      out.merit = merit;
      best = it;
      best_iter = iter;
    } else if (iter - best_iter >= 8 && out.merit < 1e3) {
      out.status = SolveStatus::NumericalTrouble;
      out.message = "no further progress";
      break;
    }
    if (merit <= 1.0) {
      ConeSolution cs = ipm.unscale(it);
      if (accept(cs)) {
        out.status = SolveStatus::Optimal;
        out.best = std::move(cs);
        out.iterations = iter;
        return {std::move(out), std::move(it)};
      }
    }
    if (ipm.certifies_primal_infeasible(it)) {
      out.status = SolveStatus::PrimalInfeasible;
      out.message = "dual ray certifies primal infeasibility";
      best = it;
      break;
    }
    if (ipm.certifies_dual_infeasible(it)) {
      out.status = SolveStatus::DualInfeasible;
      out.message = "primal ray certifies dual infeasibility";
      best = it;
      break;
    }
    if (!ipm.factor(it)) {
      out.status = SolveStatus::NumericalTrouble;
      out.message = "Schur complement factorization failed";
      break;
    }
    const auto pred = ipm.direction(it, res, R(0), nullptr);
    auto [ap_aff, ad_aff] = ipm.step_lengths(it, pred);
    ap_aff = std::min(R(1), ap_aff);
    ad_aff = std::min(R(1), ad_aff);
    const R mu_aff = ipm.complementarity_after(it, pred, ap_aff, ad_aff);
    const R ratio = res.mu > R(0) ? std::clamp(R(mu_aff / res.mu), R(0), R(1)) : R(0);
    R sigma = ratio * ratio * ratio;
    // Keep some centrality while the iterate is still far from feasible.
    if (std::max(res.relp, res.reld) > 1e-3) sigma = std::max(sigma, R(0.1) * std::min(R(1), ap_aff * ad_aff + R(0.1)));
    auto corr = ipm.direction(it, res, sigma * res.mu, &pred);
    auto [ap, ad] = ipm.step_lengths(it, corr);
    if (std::min(ap, ad) < R(0.1)) {
      // Short corrected step: fall back to a centering step without the
      // second-order term when that moves further.
      auto centering = ipm.direction(it, res, std::max(sigma, R(0.5)) * res.mu, nullptr);
      const auto [cp, cd] = ipm.step_lengths(it, centering);
      if (std::min(cp, cd) > std::min(ap, ad)) {
        corr = std::move(centering);
        ap = cp;
        ad = cd;
      }
    }
    ap = std::min(R(1), R(kStepFraction) * ap);
    ad = std::min(R(1), R(kStepFraction) * ad);
    // Stay in the wide neighborhood lambda_min(XZ) >= theta mu.
    for (int back = 0; back < 20; ++back) {
      Iterate<R> trial = it;
      ConicIpm<R>::apply(trial, corr, ap, ad);
      if (ipm.centrality(trial) >= R(kCentrality)) break;
      ap *= R(0.8);
      ad *= R(0.8);
    }
    if (opt.verbose) {
      const R miss = (res.rp - ipm.apply_A(corr.dX, corr.dxl)).norm() / (R(1) + res.rp.norm());
      std::fprintf(stderr, "    sigma %.2e ap %.3f ad %.3f newton-miss %.2e centrality %.2e\n", static_cast<double>(sigma),
                   static_cast<double>(ap), static_cast<double>(ad), static_cast<double>(miss),
                   static_cast<double>(ipm.centrality(it)));
    }
    ConicIpm<R>::apply(it, corr, ap, ad);
    stalls = (ap < R(1e-6) && ad < R(1e-6)) ? stalls + 1 : 0;
    if (stalls >= 3) {
      out.status = SolveStatus::NumericalTrouble;
      out.message = "step lengths collapsed";
      break;
    }
  }
  if (out.status == SolveStatus::MaxIter) out.message = "iteration limit reached";
  out.best = ipm.unscale(best);
  out.iterations = iter;
  return {std::move(out), std::move(best)};
}

// Residuals and objectives measured on the original (unscaled) problem.
void evaluate_original(const SdpProblem& p, const DenseProblem& d, SdpSolution& s,
                       const std::vector<MatrixXd>& Zb, const VectorXd& zl) {
  double r2 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    double a = -p.rows[i].rhs;
    for (const auto& e : p.rows[i].entries) a += e.value * s.x[e.var];
    r2 += a * a;
    b2 += p.rows[i].rhs * p.rows[i].rhs;
  }
  s.primal_residual = std::sqrt(r2) / (1.0 + std::sqrt(b2));
  s.primal_objective = p.objective_constant;
  for (const auto& e : p.objective) s.primal_objective += e.value * s.x[e.var];
  s.dual_objective = p.objective_constant;
  for (std::size_t i = 0; i < p.rows.size(); ++i) s.dual_objective += p.rows[i].rhs * s.y[i];

  // c - A'y - z over every variable (z = 0 for free ones).
  std::vector<double> slack(p.variable_count(), 0.0);
  std::vector<double> cost(p.variable_count(), 0.0);
  for (const auto& e : p.objective) cost[e.var] += e.value;
  for (int v = 0; v < p.variable_count(); ++v) slack[v] = cost[v];
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    for (const auto& e : p.rows[i].entries) slack[e.var] -= e.value * s.y[i];
  }
  double d2 = 0.0, c2 = 0.0;
  for (int v = 0; v < p.variable_count(); ++v) {
    double zv = 0.0;
    if (v >= d.nf && v < d.nf + d.nl) {
      zv = zl(v - d.nf);
    } else if (v >= d.nf + d.nl) {
      const VarInfo info = p.variable(v);
      // Off-diagonal Gram variables pair with 2 Z_rc in the inner product.
      zv = (info.row == info.col ? 1.0 : 2.0) * Zb[info.block](info.row, info.col);
    }
    const double res = slack[v] - zv;
    d2 += res * res;
    c2 += cost[v] * cost[v];
  }
  s.dual_residual = std::sqrt(d2) / (1.0 + std::sqrt(c2));
  s.relative_gap = std::abs(s.primal_objective - s.dual_objective) / (1.0 + std::abs(s.primal_objective));
}


}  // namespace

SdpSolution InteriorPointBackend::solve(const SdpProblem& problem, const SolverOptions& opt) const {
  problem.validate();
  if (problem.variable_count() == 0) throw std::invalid_argument("solve: structurally empty problem");

  const DenseProblem d = densify(problem);
  const ReducedProblem r = reduce(d);

  SdpSolution sol;
  sol.x.assign(problem.variable_count(), 0.0);
  sol.y.assign(problem.rows.size(), 0.0);
  for (int n : d.dims) sol.dual_slack.push_back(MatrixXd::Zero(n, n));
  if (r.inconsistent) {
    sol.status = SolveStatus::PrimalInfeasible;
    sol.message = r.message;
    return sol;
  }
  if (r.free_unbounded) {
    sol.status = SolveStatus::DualInfeasible;
    sol.message = r.message;
    return sol;
  }

  auto finalize = [&](const ConeSolution& cs) {
    SdpSolution s = sol;
    VectorXd xc(d.ncone);
    xc.head(d.nl) = cs.xl;
    for (std::size_t k = 0; k < d.dims.size(); ++k) {
      xc.segment(d.cone_offset[k], cs.X[k].size()) = Eigen::Map<const VectorXd>(cs.X[k].data(), cs.X[k].size());
    }
    const VectorXd xf = recover_free(d, r, xc);
    for (int j = 0; j < d.nf; ++j) s.x[j] = xf(j);
    for (int j = 0; j < d.nl; ++j) s.x[d.nf + j] = cs.xl(j);
    for (std::size_t k = 0; k < d.dims.size(); ++k) {
      const int n = d.dims[k];
      const MatrixXd& X = cs.X[k];
      int id = problem.block_offset(static_cast<int>(k));
      for (int a = 0; a < n; ++a) {
        for (int c = a; c < n; ++c, ++id) s.x[id] = 0.5 * (X(a, c) + X(c, a));
      }
      s.dual_slack[k] = cs.Z[k];
    }
    const VectorXd y = d.row_scale.cwiseProduct(r.y_free + r.T * cs.y);
    for (int i = 0; i < d.m; ++i) s.y[i] = y(i);
    evaluate_original(problem, d, s, s.dual_slack, cs.zl);
    return s;
  };
  auto meets_tolerances = [&](const SdpSolution& s) {
    return s.primal_residual <= opt.feas_tol && s.dual_residual <= opt.feas_tol &&
           std::abs(s.primal_objective - s.dual_objective) <= opt.gap_tol * (1.0 + std::abs(s.primal_objective));
  };
  auto accept = [&](const ConeSolution& cs) { return meets_tolerances(finalize(cs)); };

  // Double precision first. A run that stalls close to the tolerances is
  // continued from its best iterate in long double, since the Newton
  // systems near the end can be too ill-conditioned for double.
  auto escalate = [&](const IpmOutcome& o) {
    return (o.status == SolveStatus::MaxIter || o.status == SolveStatus::NumericalTrouble) &&
           o.merit < kEscalationMerit;
  };
  auto stage0 = run_ipm<double>(r, d, opt, accept, nullptr, opt.max_iter);
  IpmOutcome out = stage0.outcome;
  int used = out.iterations;
  auto merge = [&](IpmOutcome next) {
    used += next.iterations;
    const bool decisive = next.status != SolveStatus::NumericalTrouble && next.status != SolveStatus::MaxIter;
    if (decisive || next.merit < out.merit) out = std::move(next);
    out.iterations = used;
  };
  if (escalate(out) && used < opt.max_iter) {
    const auto start = convert<long double>(stage0.best);
    merge(run_ipm<long double>(r, d, opt, accept, &start, opt.max_iter - used).outcome);
  }
  SdpSolution result = finalize(out.best);
  result.status = out.status;
  result.iterations = out.iterations;
  result.message = out.message;
  return result;
}

SdpSolution solve(const SdpProblem& problem, const SolverOptions& options) {
  return InteriorPointBackend().solve(problem, options);
}

SolutionCheck check_solution(const SdpProblem& problem, const SdpSolution& solution) {
  SolutionCheck c;
  double r2 = 0.0, b2 = 0.0;
  for (const auto& row : problem.rows) {
    double a = -row.rhs;
    for (const auto& e : row.entries) a += e.value * solution.x.at(e.var);
    c.max_row_residual = std::max(c.max_row_residual, std::abs(a));
    r2 += a * a;
    b2 += row.rhs * row.rhs;
  }
  c.relative_row_residual = std::sqrt(r2) / (1.0 + std::sqrt(b2));
  c.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int b = 0; b < static_cast<int>(problem.psd_blocks.size()); ++b) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(solution.gram_block(problem, b), Eigen::EigenvaluesOnly);
    c.min_block_eigenvalues.push_back(es.eigenvalues().minCoeff());
    c.min_eigenvalue = std::min(c.min_eigenvalue, c.min_block_eigenvalues.back());
  }
  c.min_nonneg = std::numeric_limits<double>::infinity();
  for (int j = 0; j < problem.nonneg_count; ++j) c.min_nonneg = std::min(c.min_nonneg, solution.x.at(problem.free_count + j));
  c.primal_objective = problem.objective_constant;
  for (const auto& e : problem.objective) c.primal_objective += e.value * solution.x.at(e.var);
  return c;
}

}  // namespace innermpi
