#include "rpop/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace rpop {
namespace {

constexpr double kValidResidual = 1e-6;   // residual for a valid CARE solution
constexpr double kDivergedNorm = 1e12;
constexpr int kStagnationWindow = 50;
constexpr double kStagnationRel = 1e-14;

Eigen::MatrixXd hamiltonian(const CareProblem& care) {
  const int n = care.n;
  Eigen::MatrixXd H(2 * n, 2 * n);
  H << care.A, -care.R, -care.Q, -care.A.transpose();
  return H;
}

// Shared stagnation bookkeeping over a residual history.
bool stagnated(const std::vector<double>& hist) {
  const int sz = static_cast<int>(hist.size());
  if (sz < kStagnationWindow + 1) return false;
  const double last = hist[sz - 1];
  if (last <= kValidResidual) return false;
  for (int i = sz - kStagnationWindow; i < sz; ++i) {
    if (std::abs(hist[i] - hist[i - 1]) >= kStagnationRel * std::abs(hist[i])) return false;
  }
  return true;
}

}  // namespace

std::string to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::Newton: return "newton";
    case BaselineMethod::MatrixSign: return "matrix_sign";
    case BaselineMethod::Sda: return "sda";
    case BaselineMethod::Schur: return "schur";
  }
  return "unknown";
}

Eigen::MatrixXd lyapunov_solve(const Eigen::MatrixXd& F, const Eigen::MatrixXd& S) {
  const int n = static_cast<int>(F.rows());
  if (F.cols() != n || S.rows() != n || S.cols() != n) {
    throw std::invalid_argument("lyapunov_solve: dimension mismatch");
  }
  // vec(F'Z) = (I (x) F') vec Z, vec(ZF) = (F' (x) I) vec Z (column-major)
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n * n, n * n);
  for (int j = 0; j < n; ++j) {
    K.block(j * n, j * n, n, n) += F.transpose();
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) K(j * n + i, k * n + i) += F(j, k);
    }
  }
  Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(S.data(), n * n);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (!lu.isInvertible()) throw std::runtime_error("lyapunov_solve: singular Lyapunov operator");
  const Eigen::VectorXd zv = lu.solve(rhs);
  Eigen::MatrixXd Z = Eigen::Map<const Eigen::MatrixXd>(zv.data(), n, n);
  Z = 0.5 * (Z + Z.transpose());
  const double res = (F.transpose() * Z + Z * F + S).norm();
  if (!(res <= 1e-10 * std::max(1.0, S.norm()))) {
    throw std::runtime_error("lyapunov_solve: near-singular Lyapunov operator");
  }
  return Z;
}

IterationTrace newton_kleinman(const CareProblem& care, const Eigen::MatrixXd& P0, int max_iter,
                               double tol) {
  IterationTrace trace;
  trace.method = BaselineMethod::Newton;
  Eigen::MatrixXd P = 0.5 * (P0 + P0.transpose());
  trace.residual_history.push_back(care_residual(care, P));
  for (int it = 0; it < max_iter; ++it) {
    trace.iterations = it + 1;
    Eigen::MatrixXd next;
    try {
      next = lyapunov_solve(care.A - care.R * P, care.Q + P * care.R * P);
    } catch (const std::runtime_error&) {
      trace.reason = "lyapunov breakdown";
      trace.P = P;
      return trace;
    }
    P = next;
    const double res = care_residual(care, P);
    trace.residual_history.push_back(res);
    if (!std::isfinite(res) || P.norm() > kDivergedNorm) {
      trace.reason = "diverged";
      return trace;
    }
    if (res <= tol) {
      trace.converged = res <= kValidResidual;
      trace.reason = trace.converged ? "converged" : "residual above solution tolerance";
      trace.P = P;
      return trace;
    }
    if (stagnated(trace.residual_history)) {
      trace.reason = "stagnation";
      trace.P = P;
      return trace;
    }
  }
  trace.reason = "iteration cap";
  trace.P = P;
  return trace;
}

Eigen::MatrixXd matrix_sign_of(const Eigen::MatrixXd& M, int max_iter, double tol) {
  const int n = static_cast<int>(M.rows());
  Eigen::MatrixXd Z = M;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Z);
    const double det = lu.determinant();
    if (!std::isfinite(det) || det == 0.0) {
      throw std::runtime_error("matrix_sign_of: singular iterate");
    }
    const double ck = std::pow(std::abs(det), -1.0 / n);
    const Eigen::MatrixXd Zs = ck * Z;
    const Eigen::MatrixXd next = 0.5 * (Zs + Zs.inverse());
    const double change = (next - Z).norm();
    Z = next;
    if (change <= tol * std::max(1.0, Z.norm())) return Z;
  }
  throw std::runtime_error("matrix_sign_of: no convergence");
}

IterationTrace matrix_sign(const CareProblem& care, int max_iter, double tol) {
  IterationTrace trace;
  trace.method = BaselineMethod::MatrixSign;
  const int n = care.n;
  Eigen::MatrixXd Z = hamiltonian(care);
  const int dim = 2 * n;
  bool iter_converged = false;
  for (int it = 0; it < max_iter; ++it) {
    trace.iterations = it + 1;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Z);
    const double det = lu.determinant();
    if (!std::isfinite(det) || det == 0.0) {
      trace.reason = "singular iterate";
      return trace;
    }
    const double ck = std::pow(std::abs(det), -1.0 / dim);
    const Eigen::MatrixXd Zs = ck * Z;
    const Eigen::MatrixXd next = 0.5 * (Zs + Zs.inverse());
    const double change = (next - Z).norm() / std::max(1.0, Z.norm());
    trace.residual_history.push_back(change);
    if (!next.allFinite() || next.norm() > kDivergedNorm) {
      trace.reason = "diverged";
      return trace;
    }
    Z = next;
    if (change <= tol) {
      iter_converged = true;
      break;
    }
    if (stagnated(trace.residual_history)) {
      trace.reason = "stagnation";
      return trace;
    }
  }
  if (!iter_converged) {
    trace.reason = "iteration cap";
    return trace;
  }
  // sign(H) [I; P] = -[I; P]:  [S12; S22 + I] P = -[S11 + I; S21]
  Eigen::MatrixXd lhs(2 * n, n), rhs(2 * n, n);
  lhs << Z.block(0, n, n, n), Z.block(n, n, n, n) + Eigen::MatrixXd::Identity(n, n);
  rhs << -(Z.block(0, 0, n, n) + Eigen::MatrixXd::Identity(n, n)), -Z.block(n, 0, n, n);
  Eigen::MatrixXd P = lhs.colPivHouseholderQr().solve(rhs);
  P = 0.5 * (P + P.transpose());
  const double res = care_residual(care, P);
  trace.residual_history.push_back(res);
  trace.P = P;
  trace.converged = res <= kValidResidual;
  trace.reason = trace.converged ? "converged" : "recovered matrix is not a solution";
  return trace;
}

IterationTrace sda(const CareProblem& care, int max_iter, double tol, double gamma) {
  IterationTrace trace;
  trace.method = BaselineMethod::Sda;
  const int n = care.n;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

  // Cayley-transformed initial triple (E, G, H) in SSF-1 form
  auto initialize = [&](double g, Eigen::MatrixXd& E, Eigen::MatrixXd& Gm,
                        Eigen::MatrixXd& Hm) -> bool {
    const Eigen::MatrixXd Ag = care.A - g * I;
    Eigen::FullPivLU<Eigen::MatrixXd> luA(Ag);
    if (!luA.isInvertible()) return false;
    const Eigen::MatrixXd AgTinvQ = luA.transpose().solve(care.Q);  // A_g^{-T} Q
    const Eigen::MatrixXd W = Ag + care.R * AgTinvQ;
    Eigen::FullPivLU<Eigen::MatrixXd> luW(W);
    if (!luW.isInvertible()) return false;
    E = I + 2.0 * g * luW.inverse();
    Gm = -2.0 * g * luW.solve(care.R * luA.inverse().transpose());
    Hm = 2.0 * g * luW.transpose().solve(care.Q * luA.inverse());
    Gm = 0.5 * (Gm + Gm.transpose());
    Hm = 0.5 * (Hm + Hm.transpose());
    return true;
  };

  Eigen::MatrixXd E, Gm, Hm;
  double g = gamma;
  if (!initialize(g, E, Gm, Hm)) {
    g = 2.5;
    if (!initialize(g, E, Gm, Hm)) {
      trace.reason = "singular pencil";
      return trace;
    }
  }

  for (int it = 0; it < max_iter; ++it) {
    trace.iterations = it + 1;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(I - Gm * Hm);
    if (!lu.isInvertible()) {
      if (g != 2.5 && initialize(2.5, E, Gm, Hm)) {
        g = 2.5;
        trace.residual_history.clear();
        continue;
      }
      trace.reason = "singular pencil";
      return trace;
    }
    const Eigen::MatrixXd Minv_E = lu.solve(E);
    const Eigen::MatrixXd Minv_G = lu.solve(Gm);
    Eigen::MatrixXd Hnext = Hm + E.transpose() * Hm * Minv_E;
    Eigen::MatrixXd Gnext = Gm + E * Minv_G * E.transpose();
    Hnext = 0.5 * (Hnext + Hnext.transpose());
    Gnext = 0.5 * (Gnext + Gnext.transpose());
    const Eigen::MatrixXd Enext = E * Minv_E;
    const double change = (Hnext - Hm).norm();
    trace.residual_history.push_back(change);
    E = Enext;
    Gm = Gnext;
    Hm = Hnext;
    if (!Hm.allFinite() || Hm.norm() > kDivergedNorm) {
      trace.reason = "diverged";
      return trace;
    }
    if (change <= tol) {
      const double res = care_residual(care, Hm);
      trace.residual_history.push_back(res);
      trace.P = Hm;
      trace.converged = res <= kValidResidual;
      trace.reason = trace.converged ? "converged" : "fixed point is not a solution";
      return trace;
    }
    if (stagnated(trace.residual_history)) {
      trace.reason = "stagnation";
      return trace;
    }
  }
  trace.reason = "iteration cap";
  return trace;
}

IterationTrace schur_method(const CareProblem& care) {
  IterationTrace trace;
  trace.method = BaselineMethod::Schur;
  trace.iterations = 1;
  const int n = care.n;
  Eigen::EigenSolver<Eigen::MatrixXd> es(hamiltonian(care));
  if (es.info() != Eigen::Success) {
    trace.reason = "eigendecomposition failed";
    return trace;
  }
  Eigen::MatrixXcd basis(2 * n, n);
  int count = 0;
  for (int i = 0; i < 2 * n; ++i) {
    if (es.eigenvalues()[i].real() < 0.0) {
      if (count < n) basis.col(count) = es.eigenvectors().col(i);
      ++count;
    }
  }
  if (count != n) {
    trace.reason = "subspace defect";
    return trace;
  }
  const Eigen::MatrixXcd U1 = basis.topRows(n);
  const Eigen::MatrixXcd U2 = basis.bottomRows(n);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(U1);
  const double cond = svd.singularValues()(0) / svd.singularValues()(n - 1);
  if (!(cond <= 1e12)) {
    trace.reason = "ill-conditioned basis";
    return trace;
  }
  Eigen::MatrixXd P = (U2 * U1.colPivHouseholderQr().inverse()).real();
  P = 0.5 * (P + P.transpose());
  const double res = care_residual(care, P);
  trace.residual_history.push_back(res);
  trace.P = P;
  trace.converged = res <= kValidResidual;
  trace.reason = trace.converged ? "converged" : "subspace residual too large";
  return trace;
}

}  // namespace rpop
