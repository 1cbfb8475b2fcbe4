#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace franson::detail {

struct LsqResult {
    Eigen::VectorXd params;
    Eigen::MatrixXd covariance;  // scaled by the reduced chi-square
    double chi2 = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Levenberg-Marquardt on weighted residuals. `model(p, r, J)` fills the
/// residual vector r (size n) and Jacobian J (n x p) at parameters p.
template <class Model>
LsqResult levenberg_marquardt(Model&& model, Eigen::VectorXd p, Eigen::Index n_residuals,
                              int max_iterations = 200, double tolerance = 1e-14) {
    const Eigen::Index np = p.size();
    Eigen::VectorXd r(n_residuals);
    Eigen::MatrixXd jac(n_residuals, np);
    model(p, r, jac);
    double chi2 = r.squaredNorm();
    double lambda = 1e-3;
    LsqResult out;
    for (int it = 0; it < max_iterations; ++it) {
        out.iterations = it + 1;
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        bool improved = false;
        for (int attempt = 0; attempt < 30 && !improved; ++attempt) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
            const Eigen::VectorXd step = a.ldlt().solve(-jtr);
            const Eigen::VectorXd trial = p + step;
            Eigen::VectorXd r_trial(n_residuals);
            Eigen::MatrixXd j_trial(n_residuals, np);
            model(trial, r_trial, j_trial);
            const double chi2_trial = r_trial.squaredNorm();
            if (std::isfinite(chi2_trial) && chi2_trial <= chi2) {
                const double rel = (chi2 - chi2_trial) / std::max(chi2, 1e-300);
                const double step_rel = step.norm() / std::max(p.norm(), 1e-300);
                p = trial;
                r = r_trial;
                jac = j_trial;
                chi2 = chi2_trial;
                lambda = std::max(lambda * 0.3, 1e-12);
                improved = true;
                if (rel < tolerance || step_rel < tolerance) out.converged = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!improved) {
            // No downhill step at any damping: we are at the minimum to machine precision.
            out.converged = true;
        }
        if (out.converged) break;
    }
    out.params = p;
    out.chi2 = chi2;
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const double dof = static_cast<double>(std::max<Eigen::Index>(n_residuals - np, 1));
    out.covariance = jtj.inverse() * (chi2 / dof);
    return out;
}

}  // namespace franson::detail
