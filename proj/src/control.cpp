#include "lippfm/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace lippfm {
namespace {

bool is_hurwitz(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
    return es.eigenvalues().real().maxCoeff() < 0.0;
}

// Hautus test: every eigenvalue with nonnegative real part must satisfy
// rank([A - lambda I, B]) = n.
bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    const auto n = A.rows();
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::complex<double> lambda = es.eigenvalues()(i);
        if (lambda.real() < 0.0) continue;
        Eigen::MatrixXcd H(n, n + B.cols());
        H << A.cast<std::complex<double>>() -
                 lambda * Eigen::MatrixXcd::Identity(n, n),
            B.cast<std::complex<double>>();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H);
        const auto& sv = svd.singularValues();
        Eigen::Index rank = 0;
        for (Eigen::Index k = 0; k < sv.size(); ++k) {
            if (sv(k) > 1e-10 * sv(0)) ++rank;
        }
        if (rank < n) return false;
    }
    return true;
}

// Bass stabilization: with beta > spectral abscissa of A, the Lyapunov
// equation (A + beta I) W + W (A + beta I)^T = 2 B B^T has a unique solution,
// positive definite iff (A, B) is controllable, and K0 = B^T W^-1 makes
// A - B K0 Hurwitz.
Eigen::MatrixXd stabilizing_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    const auto n = A.rows();
    const auto m = B.cols();
    if (is_hurwitz(A)) return Eigen::MatrixXd::Zero(m, n);

    const double beta = A.norm() + 0.5;
    const Eigen::MatrixXd shifted = A + beta * Eigen::MatrixXd::Identity(n, n);
    // As = -shifted is Hurwitz; As W + W As^T + 2 B B^T = 0 in transposed form.
    const Eigen::MatrixXd W = solve_lyapunov((-shifted).transpose(), 2.0 * B * B.transpose());
    Eigen::FullPivLU<Eigen::MatrixXd> lu(W);
    if (!lu.isInvertible()) {
        throw SynthesisError("solve_care: Bass initialization failed; (A, B) not controllable");
    }
    Eigen::MatrixXd K0 = B.transpose() * lu.inverse();
    if (!is_hurwitz(A - B * K0)) {
        throw SynthesisError("solve_care: Bass initialization did not stabilize the plant");
    }
    return K0;
}

// Forward integration of P' = A^T P + P A - P B R^-1 B^T P + Q from P = 0
// until steady state. Documented fallback for Newton-Kleinman.
Eigen::MatrixXd solve_care_dre(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                               const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
    const Eigen::MatrixXd G = B * R.ldlt().solve(B.transpose());
    auto f = [&](const Eigen::MatrixXd& P) -> Eigen::MatrixXd {
        return A.transpose() * P + P * A - P * G * P + Q;
    };
    const double dt = std::min(1e-2, 0.1 / std::max(1.0, A.norm()));
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(A.rows(), A.cols());
    const long max_steps = 2'000'000;
    for (long k = 0; k < max_steps; ++k) {
        const Eigen::MatrixXd k1 = f(P);
        const Eigen::MatrixXd k2 = f(P + 0.5 * dt * k1);
        const Eigen::MatrixXd k3 = f(P + 0.5 * dt * k2);
        const Eigen::MatrixXd k4 = f(P + dt * k3);
        P += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        P = 0.5 * (P + P.transpose()).eval();
        if (!P.allFinite()) {
            throw SynthesisError("solve_care: differential Riccati fallback diverged");
        }
        if (k % 50 == 0 && f(P).norm() <= 1e-12 * (1.0 + P.squaredNorm())) {
            return P;
        }
    }
    throw SynthesisError("solve_care: differential Riccati fallback did not converge");
}

} // namespace

int controllability_rank(const LinearPlant& plant) {
    Eigen::Matrix<double, 3, 6> ctrl;
    ctrl << plant.B, plant.A * plant.B, plant.A * plant.A * plant.B;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ctrl);
    const auto& sv = svd.singularValues();
    const double tol = 1e-10 * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > tol) ++rank;
    }
    return rank;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& S) {
    const auto n = A.rows();
    // Column-major vectorization: vec(A^T X + X A) = (I (x) A^T + A^T (x) I) vec(X),
    // where block (i, j) of P (x) Q is P(i, j) * Q.
    const Eigen::MatrixXd At = A.transpose();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) M.block(i * n, j * n, n, n) = At;
            M.block(i * n, j * n, n, n) += At(i, j) * I;
        }
    }
    const Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(S.data(), n * n);
    Eigen::VectorXd x = M.colPivHouseholderQr().solve(-s);
    Eigen::MatrixXd X = Eigen::Map<Eigen::MatrixXd>(x.data(), n, n);
    return 0.5 * (X + X.transpose());
}

double care_residual_norm(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                          const Eigen::MatrixXd& P) {
    const Eigen::MatrixXd res =
        A.transpose() * P + P * A - P * B * R.ldlt().solve(B.transpose() * P) + Q;
    return res.norm();
}

Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
    Eigen::LLT<Eigen::MatrixXd> rllt(R);
    if (rllt.info() != Eigen::Success) {
        throw SynthesisError("solve_care: R is not positive definite");
    }

    Eigen::MatrixXd P;
    try {
        Eigen::MatrixXd K = stabilizing_gain(A, B);
        const int max_iters = 60;
        for (int it = 0; it < max_iters; ++it) {
            const Eigen::MatrixXd Acl = A - B * K;
            P = solve_lyapunov(Acl, Q + K.transpose() * R * K);
            const Eigen::MatrixXd K_next = rllt.solve(B.transpose() * P);
            const double step = (K_next - K).norm();
            K = K_next;
            if (care_residual_norm(A, B, Q, R, P) <= 1e-10 * (1.0 + P.squaredNorm()) &&
                step <= 1e-9 * (1.0 + K.norm())) {
                return P;
            }
        }
    } catch (const SynthesisError&) {
        // initialization needs controllability; the fallback below only needs
        // stabilizability
    }
    // Newton-Kleinman unavailable or missed the bound inside the budget;
    // integrate the differential Riccati equation instead.
    P = solve_care_dre(A, B, Q, R);
    if (care_residual_norm(A, B, Q, R, P) > 1e-8 * (1.0 + P.squaredNorm())) {
        throw SynthesisError("solve_care: no solution met the residual bound");
    }
    return P;
}

LqrDesign lqr_gain(const LinearPlant& plant, const LqrWeights& weights) {
    // stabilizability is what the CARE needs; a stable plant with rank-deficient
    // controllability matrix (e.g. zero state cost on a contracting A) is fine
    if (controllability_rank(plant) != 3 && !is_stabilizable(plant.A, plant.B)) {
        throw SynthesisError("lqr_gain: uncontrollable plant, an unstable mode cannot be stabilized");
    }

    const Eigen::MatrixXd P = solve_care(plant.A, plant.B, weights.Q, weights.R);

    LqrDesign design;
    design.P = P;
    design.K = weights.R.ldlt().solve(plant.B.transpose() * design.P);
    design.care_residual =
        care_residual_norm(plant.A, plant.B, weights.Q, weights.R, design.P);

    if ((design.P - design.P.transpose()).norm() > 1e-10 * design.P.norm()) {
        throw SynthesisError("lqr_gain: CARE solution is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> pes(design.P);
    if (pes.eigenvalues().minCoeff() < -1e-8 * (1.0 + design.P.norm())) {
        throw SynthesisError("lqr_gain: CARE solution is not positive semidefinite");
    }
    if (design.care_residual > 1e-8 * (1.0 + design.P.squaredNorm())) {
        throw SynthesisError("lqr_gain: CARE residual bound violated");
    }

    const Eigen::Matrix3d Acl = plant.A - plant.B * design.K;
    Eigen::EigenSolver<Eigen::Matrix3d> es(Acl);
    for (int i = 0; i < 3; ++i) {
        design.closed_loop_eigs[i] = es.eigenvalues()(i);
    }
    double max_re = es.eigenvalues().real().maxCoeff();
    if (!(max_re < 0.0)) {
        throw SynthesisError("lqr_gain: closed loop is not strictly stable");
    }
    return design;
}

TorqueCommand feedback_torque(const LqrDesign& design, const StateVec& x,
                              const StateVec& x_ref, const TorqueLimits& limits) {
    const InputVec u_raw = -(design.K * (x - x_ref));
    TorqueCommand cmd;
    cmd.tau_a = std::clamp(u_raw(0), -limits.tau_a_max, limits.tau_a_max);
    cmd.tau_w = std::clamp(u_raw(1), -limits.tau_w_max, limits.tau_w_max);
    cmd.saturated_a = cmd.tau_a != u_raw(0);
    cmd.saturated_w = cmd.tau_w != u_raw(1);
    return cmd;
}

std::string design_report(const LqrDesign& design) {
    std::ostringstream os;
    os.precision(9);
    os << "LQR design report\n";
    os << "P (CARE solution):\n" << design.P << "\n";
    os << "K (state-feedback gain):\n" << design.K << "\n";
    os << "closed-loop eigenvalues:\n";
    for (const auto& e : design.closed_loop_eigs) {
        os << "  " << e.real() << (e.imag() >= 0 ? " + " : " - ")
           << std::abs(e.imag()) << "i\n";
    }
    os << "CARE residual (Frobenius): " << design.care_residual << "\n";
    return os.str();
}

} // namespace lippfm
