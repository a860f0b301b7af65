#include "rpop/sdp.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace rpop {

double AffineScalar::evaluate(const Eigen::VectorXd& u) const {
  double r = constant;
  for (const auto& [i, c] : terms) r += c * u[i];
  return r;
}

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::PrimalInfeasible: return "primal_infeasible";
    case SdpStatus::DualInfeasible: return "dual_infeasible";
    case SdpStatus::Indeterminate: return "indeterminate";
  }
  return "unknown";
}

std::string SdpProblem::describe() const {
  std::ostringstream os;
  os << "sdp: " << num_scalars << " scalars, " << blocks.size() << " psd blocks (dims";
  for (const auto& b : blocks) os << " " << b.dim;
  os << "), " << zero_constraints.size() << " zero constraints";
  if (normalization) os << ", u[" << *normalization << "] = 1";
  return os.str();
}

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

int svec_len(int n) { return n * (n + 1) / 2; }

Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& v, int n) {
  Eigen::MatrixXd M(n, n);
  int idx = 0;
  for (int c = 0; c < n; ++c) {
    M(c, c) = v[idx++];
    for (int r = c + 1; r < n; ++r) {
      const double w = v[idx++] / kSqrt2;
      M(r, c) = w;
      M(c, r) = w;
    }
  }
  return M;
}

void svec_into(const Eigen::MatrixXd& M, Eigen::Ref<Eigen::VectorXd> out) {
  const int n = static_cast<int>(M.rows());
  int idx = 0;
  for (int c = 0; c < n; ++c) {
    out[idx++] = M(c, c);
    for (int r = c + 1; r < n; ++r) out[idx++] = kSqrt2 * 0.5 * (M(r, c) + M(c, r));
  }
}

// Jordan product inverse against a diagonal scaling point:
// (L_lambda^{-1} D)_{ij} = 2 D_ij / (lambda_i + lambda_j).
Eigen::MatrixXd jordan_solve(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& D) {
  const int n = static_cast<int>(lambda.size());
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out(i, j) = 2.0 * D(i, j) / (lambda[i] + lambda[j]);
  }
  return out;
}

struct BlockScaling {
  Eigen::MatrixXd R;     // W z = R' Z R, W^{-T} s = R^{-1} S R^{-T}
  Eigen::MatrixXd Rinv;
  Eigen::VectorXd lambda;  // shared scaled point (diagonal)
};

struct Internal {
  int m = 0;  // scalars
  int p = 0;  // equality rows
  int S = 0;  // stacked svec length
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  double obj_const = 0.0;
  Eigen::VectorXd h;
  Eigen::MatrixXd G;  // S x m, column i = -svec(F_ji) stacked over blocks
  std::vector<int> dim;
  std::vector<int> offset;
  double theta = 1.0;  // 1 + max |data entry|, for scale-free certificate tests
};

Internal build_internal(const SdpProblem& prob, const SdpTolerances& opts) {
  if (prob.num_scalars <= 0) throw std::invalid_argument("solve_sdp: no decision scalars");
  Internal in;
  in.m = prob.num_scalars;
  int total_dim = 0;
  for (const auto& blk : prob.blocks) {
    if (blk.dim <= 0) throw std::invalid_argument("solve_sdp: block with nonpositive dimension");
    total_dim += blk.dim;
  }
  if (total_dim > opts.max_total_block_dim) {
    std::ostringstream os;
    os << "solve_sdp: total block dimension " << total_dim << " exceeds cap "
       << opts.max_total_block_dim;
    throw std::invalid_argument(os.str());
  }

  in.p = static_cast<int>(prob.zero_constraints.size()) + (prob.normalization ? 1 : 0);
  in.A = Eigen::MatrixXd::Zero(in.p, in.m);
  in.b = Eigen::VectorXd::Zero(in.p);
  for (int r = 0; r < static_cast<int>(prob.zero_constraints.size()); ++r) {
    const auto& zc = prob.zero_constraints[r];
    for (const auto& [i, v] : zc.terms) {
      if (i < 0 || i >= in.m) throw std::invalid_argument("solve_sdp: constraint scalar index out of range");
      in.A(r, i) += v;
    }
    in.b[r] = -zc.constant;
  }
  if (prob.normalization) {
    const int idx = *prob.normalization;
    if (idx < 0 || idx >= in.m) throw std::invalid_argument("solve_sdp: normalization index out of range");
    in.A(in.p - 1, idx) = 1.0;
    in.b[in.p - 1] = 1.0;
  }

  in.c = Eigen::VectorXd::Zero(in.m);
  for (const auto& [i, v] : prob.objective.terms) {
    if (i < 0 || i >= in.m) throw std::invalid_argument("solve_sdp: objective scalar index out of range");
    in.c[i] += v;
  }
  in.obj_const = prob.objective.constant;

  in.dim.reserve(prob.blocks.size());
  in.offset.reserve(prob.blocks.size());
  for (const auto& blk : prob.blocks) {
    in.offset.push_back(in.S);
    in.dim.push_back(blk.dim);
    in.S += svec_len(blk.dim);
  }
  in.h = Eigen::VectorXd::Zero(in.S);
  in.G = Eigen::MatrixXd::Zero(in.S, in.m);

  auto svec_pos = [](int n, int r, int c) {  // requires r >= c
    return c * n - c * (c - 1) / 2 + (r - c);
  };
  for (size_t j = 0; j < prob.blocks.size(); ++j) {
    const auto& blk = prob.blocks[j];
    const int n = blk.dim;
    const int off = in.offset[j];
    auto place = [&](const MatrixEntry& e, auto&& sink) {
      int r = e.row, cc = e.col;
      if (r < cc) std::swap(r, cc);
      if (cc < 0 || r >= n) throw std::invalid_argument("solve_sdp: block entry out of range");
      sink(off + svec_pos(n, r, cc), (r == cc) ? e.value : kSqrt2 * e.value);
    };
    for (const auto& e : blk.constant) place(e, [&](int k, double v) { in.h[k] += v; });
    if (static_cast<int>(blk.terms.size()) > in.m)
      throw std::invalid_argument("solve_sdp: more block terms than scalars");
    for (int i = 0; i < static_cast<int>(blk.terms.size()); ++i) {
      for (const auto& e : blk.terms[i]) place(e, [&](int k, double v) { in.G(k, i) -= v; });
    }
  }

  double maxabs = 0.0;
  maxabs = std::max(maxabs, in.A.size() ? in.A.cwiseAbs().maxCoeff() : 0.0);
  maxabs = std::max(maxabs, in.G.size() ? in.G.cwiseAbs().maxCoeff() : 0.0);
  in.theta = 1.0 + maxabs;
  return in;
}

// Primal cone violation of a candidate point: most negative eigenvalue over
// the blocks, normalized like the equality residual.
double cone_violation(const SdpProblem& prob, const Eigen::VectorXd& u) {
  double worst = 0.0;
  for (const auto& blk : prob.blocks) {
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(blk.dim, blk.dim);
    auto add = [&](const MatrixEntry& e, double scale) {
      F(e.row, e.col) += scale * e.value;
      if (e.row != e.col) F(e.col, e.row) += scale * e.value;
    };
    for (const auto& e : blk.constant) add(e, 1.0);
    for (int i = 0; i < static_cast<int>(blk.terms.size()); ++i) {
      for (const auto& e : blk.terms[i]) add(e, u[i]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F, Eigen::EigenvaluesOnly);
    worst = std::max(worst, std::max(0.0, -es.eigenvalues().minCoeff()));
  }
  return worst;
}

struct KktFactors {
  Eigen::LLT<Eigen::MatrixXd> lltN;
  Eigen::MatrixXd NiAt;  // N^{-1} A'
  Eigen::LLT<Eigen::MatrixXd> lltS;
  double reg = 0.0;
};

// Factor [N A'; A 0] with N = Gs'Gs via a Schur complement on the equality
// rows.  Static regularization keeps the factorization alive when G lacks
// full column rank or A has dependent rows.
bool factor_kkt(const Eigen::MatrixXd& Gs, const Eigen::MatrixXd& A, KktFactors& f) {
  const int m = static_cast<int>(Gs.cols());
  Eigen::MatrixXd N(m, m);
  N.setZero();
  N.selfadjointView<Eigen::Lower>().rankUpdate(Gs.transpose());
  const double scale = std::max(1.0, N.diagonal().maxCoeff());
  double reg = 1e-12 * scale;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::MatrixXd Nr = N.selfadjointView<Eigen::Lower>();
    Nr.diagonal().array() += reg;
    f.lltN.compute(Nr);
    if (f.lltN.info() == Eigen::Success) {
      if (A.rows() == 0) {
        f.reg = reg;
        return true;
      }
      f.NiAt = f.lltN.solve(A.transpose());
      Eigen::MatrixXd Seq = A * f.NiAt;
      Seq.diagonal().array() += reg;
      f.lltS.compute(Seq);
      if (f.lltS.info() == Eigen::Success) {
        f.reg = reg;
        return true;
      }
    }
    reg *= 100.0;
  }
  return false;
}

// Solve [N A'; A 0] [x; y] = [r1; r2] with one refinement pass.
void solve_kkt(const KktFactors& f, const Eigen::MatrixXd& Gs, const Eigen::MatrixXd& A,
               const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, Eigen::VectorXd& x,
               Eigen::VectorXd& y) {
  auto solve_once = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& d,
                        Eigen::VectorXd& xo, Eigen::VectorXd& yo) {
    if (A.rows() == 0) {
      xo = f.lltN.solve(a);
      yo.resize(0);
      return;
    }
    const Eigen::VectorXd x0 = f.lltN.solve(a);
    yo = f.lltS.solve(A * x0 - d);
    xo = x0 - f.NiAt * yo;
  };
  solve_once(r1, r2, x, y);
  // one step of iterative refinement against the unregularized system
  Eigen::VectorXd res1 = r1 - Gs.transpose() * (Gs * x);
  if (A.rows() > 0) res1 -= A.transpose() * y;
  Eigen::VectorXd res2 = A.rows() > 0 ? Eigen::VectorXd(r2 - A * x) : Eigen::VectorXd();
  Eigen::VectorXd dx, dy;
  solve_once(res1, res2, dx, dy);
  x += dx;
  if (A.rows() > 0) y += dy;
}

struct Iterate {
  Eigen::VectorXd x, y, z, s;
  double tau = 1.0, kappa = 1.0;
};

}  // namespace

SdpResiduals recompute_residuals(const SdpProblem& prob, const Eigen::VectorXd& primal,
                                 double dual_objective) {
  SdpResiduals res;
  double eq_sq = 0.0, bnorm_sq = 0.0;
  for (const auto& zc : prob.zero_constraints) {
    const double v = zc.evaluate(primal);
    eq_sq += v * v;
    bnorm_sq += zc.constant * zc.constant;
  }
  if (prob.normalization) {
    const double v = primal[*prob.normalization] - 1.0;
    eq_sq += v * v;
    bnorm_sq += 1.0;
  }
  const double eq_res = std::sqrt(eq_sq) / (1.0 + std::sqrt(bnorm_sq));
  res.primal = std::max(eq_res, cone_violation(prob, primal));
  res.dual = 0.0;  // not recomputable from the primal vector alone
  const double pobj = prob.objective.evaluate(primal);
  res.gap = std::abs(pobj - dual_objective) / (1.0 + std::abs(pobj) + std::abs(dual_objective));
  return res;
}

CertificateCheck verify_infeasibility_certificate(const SdpProblem& prob,
                                                  const InfeasibilityCertificate& cert,
                                                  double cert_tol) {
  CertificateCheck out;
  const int p = static_cast<int>(prob.zero_constraints.size()) + (prob.normalization ? 1 : 0);
  if (cert.eq_dual.size() != p || cert.block_dual.size() != prob.blocks.size()) return out;

  double norm_sq = cert.eq_dual.squaredNorm();
  for (const auto& Z : cert.block_dual) norm_sq += Z.squaredNorm();
  if (!(norm_sq > 0.0)) return out;
  const double scale = 1.0 / std::sqrt(norm_sq);

  double theta = 1.0;
  // b'y + h'z, and A'y + G'z componentwise, rebuilt from the problem data
  Eigen::VectorXd atres = Eigen::VectorXd::Zero(prob.num_scalars);
  double gap = 0.0;
  for (int r = 0; r < static_cast<int>(prob.zero_constraints.size()); ++r) {
    const auto& zc = prob.zero_constraints[r];
    const double yr = cert.eq_dual[r] * scale;
    gap += (-zc.constant) * yr;
    for (const auto& [i, v] : zc.terms) {
      atres[i] += v * yr;
      theta = std::max(theta, 1.0 + std::abs(v));
    }
  }
  if (prob.normalization) {
    const double yr = cert.eq_dual[p - 1] * scale;
    gap += yr;
    atres[*prob.normalization] += yr;
  }
  double min_eig = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < prob.blocks.size(); ++j) {
    const auto& blk = prob.blocks[j];
    Eigen::MatrixXd Z = 0.5 * (cert.block_dual[j] + cert.block_dual[j].transpose()) * scale;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Z, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    auto inner = [&](const std::vector<MatrixEntry>& entries) {
      double acc = 0.0;
      for (const auto& e : entries) {
        acc += (e.row == e.col ? 1.0 : 2.0) * e.value * Z(e.row, e.col);
        theta = std::max(theta, 1.0 + std::abs(e.value));
      }
      return acc;
    };
    gap += inner(blk.constant);
    for (int i = 0; i < static_cast<int>(blk.terms.size()); ++i) {
      // G column is -svec(F_ji): A'y + G'z = A'y - <F_ji, Z_j>
      atres[i] -= inner(blk.terms[i]);
    }
  }
  out.violation = -gap;
  out.residual = atres.lpNorm<Eigen::Infinity>() / theta;
  out.min_eigenvalue = prob.blocks.empty() ? 0.0 : min_eig;
  out.valid = out.violation >= cert_tol && out.residual <= cert_tol &&
              out.min_eigenvalue >= -cert_tol;
  return out;
}

SdpSolution solve_sdp(const SdpProblem& prob, const SdpTolerances& opts) {
  const Internal in = build_internal(prob, opts);
  const int m = in.m, p = in.p, S = in.S;
  const int nblocks = static_cast<int>(in.dim.size());
  const double nu = [&] {
    double d = 1.0;  // tau-kappa pair
    for (int dn : in.dim) d += dn;
    return d;
  }();

  SdpSolution sol;
  sol.primal_objective = std::numeric_limits<double>::quiet_NaN();
  sol.dual_objective = std::numeric_limits<double>::quiet_NaN();

  Iterate it;
  it.x = Eigen::VectorXd::Zero(m);
  it.y = Eigen::VectorXd::Zero(p);
  it.z = Eigen::VectorXd::Zero(S);
  it.s = Eigen::VectorXd::Zero(S);
  for (int j = 0; j < nblocks; ++j) {
    int idx = in.offset[j];
    for (int c = 0; c < in.dim[j]; ++c) {
      it.s[idx] = 1.0;
      it.z[idx] = 1.0;
      idx += in.dim[j] - c;
    }
  }

  const double bnorm = 1.0 + in.b.norm();
  const double hnorm = 1.0 + in.h.norm();
  const double cnorm = 1.0 + in.c.norm();
  double mu0 = (it.s.dot(it.z) + it.tau * it.kappa) / nu;

  Eigen::MatrixXd Gs(S, m);
  Eigen::VectorXd hs(S), ws(S), d_s(S), dzs(S), dss(S), dzs_aff(S), dss_aff(S);
  std::vector<BlockScaling> scal(nblocks);

  double best_merit = std::numeric_limits<double>::infinity();
  Iterate best = it;
  std::string stop_reason = "max iterations reached";

  auto finish_indeterminate = [&](const std::string& why) {
    const Iterate& bi = best_merit < std::numeric_limits<double>::infinity() ? best : it;
    sol.status = SdpStatus::Indeterminate;
    if (bi.tau > 1e-300) {
      sol.primal = bi.x / bi.tau;
      sol.primal_objective = in.c.dot(sol.primal) + in.obj_const;
      sol.dual_objective = -(in.b.dot(bi.y) + in.h.dot(bi.z)) / bi.tau + in.obj_const;
      sol.residuals = recompute_residuals(prob, sol.primal, sol.dual_objective);
    }
    std::ostringstream os;
    os << why << "; candidates: optimal (best merit " << best_merit << "), infeasible (tau/kappa "
       << bi.tau << "/" << bi.kappa << ")";
    sol.message = os.str();
    return sol;
  };

  for (int iter = 0; iter <= opts.max_iterations; ++iter) {
    // residuals of the self-dual model
    Eigen::VectorXd r_x = in.G.transpose() * it.z + in.c * it.tau;  // A'y + G'z + c tau
    if (p > 0) r_x += in.A.transpose() * it.y;
    Eigen::VectorXd r_y = p > 0 ? Eigen::VectorXd(in.A * it.x - in.b * it.tau) : Eigen::VectorXd();
    Eigen::VectorXd r_z = in.G * it.x + it.s - in.h * it.tau;
    const double r_tau = it.kappa + in.c.dot(it.x) + in.h.dot(it.z) + (p > 0 ? in.b.dot(it.y) : 0.0);
    const double mu = (it.s.dot(it.z) + it.tau * it.kappa) / nu;

    // scaled (tau-normalized) optimality measures
    const double pobj = in.c.dot(it.x) / it.tau + in.obj_const;
    const double dobj = -(in.h.dot(it.z) + (p > 0 ? in.b.dot(it.y) : 0.0)) / it.tau + in.obj_const;
    const double pres = std::max(p > 0 ? r_y.norm() / (bnorm * it.tau) : 0.0,
                                 r_z.norm() / (hnorm * it.tau));
    const double dres = r_x.norm() / (cnorm * it.tau);
    const double sz_gap = it.s.dot(it.z) / (it.tau * it.tau);
    const double relgap =
        std::min(sz_gap, std::abs(pobj - dobj)) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double merit = pres + dres + relgap;
    sol.merit_history.push_back(merit);
    sol.iterations = iter;
    if (merit < best_merit) {
      best_merit = merit;
      best = it;
    }

    if (pres <= opts.feas_tol && dres <= opts.feas_tol && relgap <= opts.gap_tol) {
      sol.status = SdpStatus::Optimal;
      sol.primal = it.x / it.tau;
      sol.primal_objective = pobj;
      sol.dual_objective = dobj;
      sol.residuals = recompute_residuals(prob, sol.primal, dobj);
      sol.residuals.dual = dres;
      return sol;
    }

    // infeasibility detection on the homogeneous ray
    const double pin_gap = (p > 0 ? in.b.dot(it.y) : 0.0) + in.h.dot(it.z);
    const bool ray_dominant = it.tau <= 1e-2 * it.kappa || mu <= 1e-8 * mu0;
    if (pin_gap < 0.0 && ray_dominant) {
      Eigen::VectorXd atres = in.G.transpose() * it.z;
      if (p > 0) atres += in.A.transpose() * it.y;
      if (atres.lpNorm<Eigen::Infinity>() / (-pin_gap) <= opts.cert_tol * in.theta) {
        InfeasibilityCertificate cert;
        cert.eq_dual = it.y / (-pin_gap);
        cert.block_dual.resize(nblocks);
        for (int j = 0; j < nblocks; ++j) {
          cert.block_dual[j] =
              smat(it.z.segment(in.offset[j], svec_len(in.dim[j])), in.dim[j]) / (-pin_gap);
        }
        const auto check = verify_infeasibility_certificate(prob, cert, opts.cert_tol);
        if (check.valid) {
          sol.status = SdpStatus::PrimalInfeasible;
          sol.certificate = std::move(cert);
          sol.residuals = {0.0, 0.0, 0.0};
          sol.message = "primal infeasible: improving ray with violation " +
                        std::to_string(check.violation);
          return sol;
        }
      }
    }
    const double dual_gap = in.c.dot(it.x);
    if (dual_gap < 0.0 && ray_dominant) {
      const double eqn = p > 0 ? (in.A * it.x).lpNorm<Eigen::Infinity>() : 0.0;
      const double conen = (in.G * it.x + it.s).lpNorm<Eigen::Infinity>();
      if (std::max(eqn, conen) / (-dual_gap) <= opts.cert_tol * in.theta) {
        sol.status = SdpStatus::DualInfeasible;
        sol.improving_ray = it.x / (-dual_gap);
        sol.residuals = {0.0, 0.0, 0.0};
        sol.message = "dual infeasible: objective improving ray (primal unbounded)";
        return sol;
      }
    }

    if (iter == opts.max_iterations) break;

    // Nesterov-Todd scaling per block
    bool scaling_ok = true;
    for (int j = 0; j < nblocks; ++j) {
      const int n = in.dim[j], off = in.offset[j], len = svec_len(n);
      Eigen::LLT<Eigen::MatrixXd> lltS(smat(it.s.segment(off, len), n));
      Eigen::LLT<Eigen::MatrixXd> lltZ(smat(it.z.segment(off, len), n));
      if (lltS.info() != Eigen::Success || lltZ.info() != Eigen::Success) {
        scaling_ok = false;
        break;
      }
      const Eigen::MatrixXd Ls = lltS.matrixL();
      const Eigen::MatrixXd Lz = lltZ.matrixL();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(Lz.transpose() * Ls,
                                            Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Eigen::VectorXd sig = svd.singularValues();
      if (sig.minCoeff() <= 0.0) {
        scaling_ok = false;
        break;
      }
      const Eigen::VectorXd isq = sig.cwiseSqrt().cwiseInverse();
      scal[j].R = Ls * svd.matrixV() * isq.asDiagonal();
      scal[j].Rinv = isq.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
      scal[j].lambda = sig;
    }
    if (!scaling_ok) return finish_indeterminate("scaling breakdown (iterate left the cone)");

    // scaled data: Gs = W^{-T} G, hs = W^{-T} h
    Gs.setZero();
    for (int j = 0; j < nblocks; ++j) {
      const int n = in.dim[j], off = in.offset[j], len = svec_len(n);
      const auto& blk = prob.blocks[j];
      const Eigen::MatrixXd& Ri = scal[j].Rinv;
      Eigen::MatrixXd T(n, n);
      for (int i = 0; i < static_cast<int>(blk.terms.size()); ++i) {
        if (blk.terms[i].empty()) continue;
        T.setZero();
        for (const auto& e : blk.terms[i]) {
          const double w = (e.row == e.col) ? 0.5 * e.value : e.value;
          T.noalias() += (-w) * (Ri.col(e.row) * Ri.col(e.col).transpose());
        }
        T = Eigen::MatrixXd(T + T.transpose());
        svec_into(T, Gs.col(i).segment(off, len));
      }
      svec_into(Ri * smat(in.h.segment(off, len), n) * Ri.transpose(), hs.segment(off, len));
    }

    KktFactors kkt;
    if (!factor_kkt(Gs, in.A, kkt)) return finish_indeterminate("kkt factorization breakdown");

    Eigen::VectorXd x1, y1;
    solve_kkt(kkt, Gs, in.A, Eigen::VectorXd(-in.c + Gs.transpose() * hs), in.b, x1, y1);
    const Eigen::VectorXd Gsx1 = Gs * x1;
    const double denom = in.c.dot(x1) + (p > 0 ? in.b.dot(y1) : 0.0) + hs.dot(Gsx1 - hs) -
                         it.kappa / it.tau;
    if (!(denom < 0.0) || !std::isfinite(denom)) {
      return finish_indeterminate("degenerate tau system");
    }

    auto compute_direction = [&](double eta, double sigma_mu, bool corrector, double d_kappa,
                                 Eigen::VectorXd& dx, Eigen::VectorXd& dy, double& dtau,
                                 double& dkap) {
      // d_s = -lambda o lambda [- corrector] + sigma mu e, assembled per block
      for (int j = 0; j < nblocks; ++j) {
        const int n = in.dim[j], off = in.offset[j], len = svec_len(n);
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
        D.diagonal() = -scal[j].lambda.array().square();
        D.diagonal().array() += sigma_mu;
        if (corrector) {
          const Eigen::MatrixXd U = smat(dss_aff.segment(off, len), n);
          const Eigen::MatrixXd V = smat(dzs_aff.segment(off, len), n);
          D -= 0.5 * (U * V + V * U);
        }
        // ws = eta * W^{-T} r_z + L_lambda^{-1} d_s
        const Eigen::MatrixXd Rz =
            scal[j].Rinv * smat(r_z.segment(off, len), n) * scal[j].Rinv.transpose();
        svec_into(eta * Rz + jordan_solve(scal[j].lambda, D), ws.segment(off, len));
        svec_into(D, d_s.segment(off, len));
      }
      Eigen::VectorXd x2, y2;
      solve_kkt(kkt, Gs, in.A, Eigen::VectorXd(-eta * r_x - Gs.transpose() * ws),
                p > 0 ? Eigen::VectorXd(-eta * r_y) : Eigen::VectorXd(), x2, y2);
      const double numer = in.c.dot(x2) + (p > 0 ? in.b.dot(y2) : 0.0) +
                           hs.dot(Gs * x2 + ws) + d_kappa / it.tau + eta * r_tau;
      dtau = -numer / denom;
      dx = x2 + dtau * x1;
      dy = p > 0 ? Eigen::VectorXd(y2 + dtau * y1) : Eigen::VectorXd();
      dzs = Gs * dx - hs * dtau + ws;
      for (int j = 0; j < nblocks; ++j) {
        const int n = in.dim[j], off = in.offset[j], len = svec_len(n);
        const Eigen::MatrixXd D = smat(d_s.segment(off, len), n);
        svec_into(jordan_solve(scal[j].lambda, D) - smat(dzs.segment(off, len), n),
                  dss.segment(off, len));
      }
      dkap = (d_kappa - it.kappa * dtau) / it.tau;
    };

    auto max_step = [&](const Eigen::VectorXd& dssv, const Eigen::VectorXd& dzsv, double dtau,
                        double dkap) {
      double alpha = 1.0 / opts.step_fraction;  // so the capped step can reach 1
      for (int j = 0; j < nblocks; ++j) {
        const int n = in.dim[j], off = in.offset[j], len = svec_len(n);
        const Eigen::VectorXd il = scal[j].lambda.cwiseSqrt().cwiseInverse();
        for (const Eigen::VectorXd* d : {&dssv, &dzsv}) {
          const Eigen::MatrixXd E =
              il.asDiagonal() * smat(d->segment(off, len), n) * il.asDiagonal();
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E, Eigen::EigenvaluesOnly);
          const double emin = es.eigenvalues().minCoeff();
          if (emin < 0.0) alpha = std::min(alpha, -1.0 / emin);
        }
      }
      if (dtau < 0.0) alpha = std::min(alpha, -it.tau / dtau);
      if (dkap < 0.0) alpha = std::min(alpha, -it.kappa / dkap);
      return alpha;
    };

    // predictor (affine) direction
    Eigen::VectorXd dx, dy;
    double dtau = 0.0, dkap = 0.0;
    compute_direction(1.0, 0.0, false, -it.tau * it.kappa, dx, dy, dtau, dkap);
    dss_aff = dss;
    dzs_aff = dzs;
    const double dtau_aff = dtau, dkap_aff = dkap;
    const double alpha_aff = std::min(1.0, opts.step_fraction * max_step(dss, dzs, dtau, dkap));
    double gap_aff = (it.tau + alpha_aff * dtau) * (it.kappa + alpha_aff * dkap);
    for (int j = 0; j < nblocks; ++j) {
      const int n = in.dim[j], off = in.offset[j], len = svec_len(n);
      const Eigen::VectorXd ls = it.s.segment(off, len), lz = it.z.segment(off, len);
      // scaled inner product: <lambda + a*dss, lambda + a*dzs>
      Eigen::VectorXd lam(len);
      lam.setZero();
      int idx = 0;
      for (int c2 = 0; c2 < n; ++c2) {
        lam[idx] = scal[j].lambda[c2];
        idx += n - c2;
      }
      gap_aff += (lam + alpha_aff * dss_aff.segment(off, len))
                     .dot(lam + alpha_aff * dzs_aff.segment(off, len));
    }
    const double sigma = std::pow(std::clamp(gap_aff / (mu * nu), 0.0, 1.0), 3.0);

    // corrector (combined) direction
    compute_direction(1.0 - sigma, sigma * mu, true,
                      -it.tau * it.kappa - dtau_aff * dkap_aff + sigma * mu, dx, dy, dtau, dkap);
    const double alpha = std::min(1.0, opts.step_fraction * max_step(dss, dzs, dtau, dkap));
    if (!std::isfinite(alpha) || alpha < 1e-10) {
      return finish_indeterminate("step length collapsed");
    }

    it.x += alpha * dx;
    if (p > 0) it.y += alpha * dy;
    for (int j = 0; j < nblocks; ++j) {
      const int n = in.dim[j], off = in.offset[j], len = svec_len(n);
      const Eigen::MatrixXd Ds =
          scal[j].R * smat(dss.segment(off, len), n) * scal[j].R.transpose();
      const Eigen::MatrixXd Dz =
          scal[j].Rinv.transpose() * smat(dzs.segment(off, len), n) * scal[j].Rinv;
      Eigen::VectorXd tmp(len);
      svec_into(Ds, tmp);
      it.s.segment(off, len) += alpha * tmp;
      svec_into(Dz, tmp);
      it.z.segment(off, len) += alpha * tmp;
    }
    it.tau += alpha * dtau;
    it.kappa += alpha * dkap;
    if (!(it.tau > 0.0) || !(it.kappa >= 0.0) || !std::isfinite(it.tau)) {
      return finish_indeterminate("tau/kappa left the positive orthant");
    }
  }

  return finish_indeterminate(stop_reason);
}

}  // namespace rpop
