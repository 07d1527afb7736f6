#pragma once

// Test-only oracles. These deliberately re-derive results through routes that
// are independent of the library implementation they are used to check.

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

// Long-horizon forward integration of the differential Riccati equation
//   P' = A^T P + P A - P B R^-1 B^T P + Q,  P(0) = 0,
// to steady state (classic fourth-order Runge-Kutta on the matrix ODE).
// Converges to the stabilizing CARE solution for stabilizable/detectable
// problems; used as the independent cross-check of the library solver.
inline Eigen::MatrixXd care_by_dre(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                   const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                                   double horizon = 80.0, double dt = 1e-3) {
    const Eigen::MatrixXd G = B * R.inverse() * B.transpose();
    auto f = [&](const Eigen::MatrixXd& P) -> Eigen::MatrixXd {
        return A.transpose() * P + P * A - P * G * P + Q;
    };
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(A.rows(), A.cols());
    const long n = static_cast<long>(horizon / dt);
    for (long k = 0; k < n; ++k) {
        const Eigen::MatrixXd k1 = f(P);
        const Eigen::MatrixXd k2 = f(P + 0.5 * dt * k1);
        const Eigen::MatrixXd k3 = f(P + 0.5 * dt * k2);
        const Eigen::MatrixXd k4 = f(P + dt * k3);
        P += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        P = 0.5 * (P + P.transpose()).eval();
    }
    return P;
}

// Random strictly stable A (Gershgorin diagonal shift), random B, diagonal
// psd Q and pd R. Deterministic for a given seed.
struct RandomStabilizable {
    Eigen::Matrix3d A;
    Eigen::Matrix<double, 3, 2> B;
    Eigen::Matrix3d Q;
    Eigen::Matrix2d R;
};

inline RandomStabilizable random_stabilizable(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RandomStabilizable s;
    Eigen::Matrix3d M;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) M(i, j) = u(rng);
    const double shift = M.cwiseAbs().rowwise().sum().maxCoeff() + 0.1;
    s.A = M - shift * Eigen::Matrix3d::Identity();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) s.B(i, j) = u(rng);
    std::uniform_real_distribution<double> uq(0.1, 5.0), ur(0.5, 3.0);
    s.Q = Eigen::Vector3d(uq(rng), uq(rng), uq(rng)).asDiagonal();
    s.R = Eigen::Vector2d(ur(rng), ur(rng)).asDiagonal();
    return s;
}

// Minimal XML well-formedness check: prolog/comments skipped, tags balanced,
// attribute quoting sane. Good enough to catch malformed SVG emission.
inline bool xml_well_formed(const std::string& text, std::string* why = nullptr) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    std::vector<std::string> stack;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        if (text[i] != '<') {
            ++i;
            continue;
        }
        if (text.compare(i, 2, "<?") == 0) {
            const size_t end = text.find("?>", i);
            if (end == std::string::npos) return fail("unterminated processing instruction");
            i = end + 2;
            continue;
        }
        if (text.compare(i, 4, "<!--") == 0) {
            const size_t end = text.find("-->", i);
            if (end == std::string::npos) return fail("unterminated comment");
            i = end + 3;
            continue;
        }
        const size_t close = [&] {
            bool in_quote = false;
            char quote = '\0';
            for (size_t k = i + 1; k < n; ++k) {
                const char c = text[k];
                if (in_quote) {
                    if (c == quote) in_quote = false;
                } else if (c == '"' || c == '\'') {
                    in_quote = true;
                    quote = c;
                } else if (c == '>') {
                    return k;
                }
            }
            return std::string::npos;
        }();
        if (close == std::string::npos) return fail("unterminated tag");
        std::string tag = text.substr(i + 1, close - i - 1);
        if (!tag.empty() && tag.front() == '/') {
            const std::string name = tag.substr(1);
            if (stack.empty() || stack.back() != name)
                return fail("mismatched closing tag </" + name + ">");
            stack.pop_back();
        } else if (!tag.empty() && tag.back() == '/') {
            // self-closing
        } else {
            const size_t sp = tag.find_first_of(" \t\r\n");
            stack.push_back(sp == std::string::npos ? tag : tag.substr(0, sp));
        }
        i = close + 1;
    }
    if (!stack.empty()) return fail("unclosed tag <" + stack.back() + ">");
    return true;
}

} // namespace oracles
