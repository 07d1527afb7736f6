#pragma once

#include <array>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "lippfm/model.hpp"

namespace lippfm {

/// LQR cost weights. Q must be positive semidefinite, R positive definite.
/// Defaults prefer ankle torque over flywheel spin.
struct LqrWeights {
    Eigen::Matrix3d Q = Eigen::Vector3d(100.0, 10.0, 0.01).asDiagonal();
    Eigen::Matrix2d R = Eigen::Vector2d(1.0, 5.0).asDiagonal();
};

/// Symmetric per-channel torque clamps.
struct TorqueLimits {
    double tau_a_max = 12.0;  // [N m]
    double tau_w_max = 8.0;   // [N m]
};

/// Synthesized state-feedback design: u = -K (x - x_ref).
struct LqrDesign {
    Eigen::Matrix3d P;                                   // CARE solution
    Eigen::Matrix<double, 2, 3> K;                       // K = R^-1 B^T P
    std::array<std::complex<double>, 3> closed_loop_eigs;  // eig(A - B K)
    double care_residual = 0.0;  // ||A^T P + P A - P B R^-1 B^T P + Q||_F
};

/// Rank of the controllability matrix [B, AB, A^2 B]; singular values above
/// 1e-10 * sigma_max count toward the rank.
int controllability_rank(const LinearPlant& plant);

/// Solves A^T X + X A + S = 0 for symmetric X (Kronecker vectorization).
/// Unique solution requires A and -A^T to share no eigenvalue (A Hurwitz
/// suffices for the uses here).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& S);

/// Frobenius norm of the CARE residual A^T P + P A - P B R^-1 B^T P + Q.
double care_residual_norm(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                          const Eigen::MatrixXd& P);

/// Stabilizing solution of the continuous algebraic Riccati equation.
///
/// Newton-Kleinman iteration started from a stabilizing gain (zero when A is
/// already Hurwitz, otherwise a Bass Lyapunov-shift initialization). If the
/// iteration fails to meet the residual bound, falls back to forward
/// integration of the differential Riccati equation to steady state.
/// Throws SynthesisError on indefinite R or non-convergence.
Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// Full LQR synthesis for the plant; validates every LqrDesign invariant
/// (P symmetric psd, residual bound, closed loop strictly stable) before
/// returning. Throws SynthesisError when the plant is uncontrollable or a
/// check fails.
LqrDesign lqr_gain(const LinearPlant& plant, const LqrWeights& weights);

/// u_raw = -K (x - x_ref), clamped per channel; saturation flags are set
/// exactly when clamping changed the value.
TorqueCommand feedback_torque(const LqrDesign& design, const StateVec& x,
                              const StateVec& x_ref, const TorqueLimits& limits);

/// Human-readable diagnostic report: P, K, closed-loop eigenvalues, residual.
std::string design_report(const LqrDesign& design);

} // namespace lippfm
