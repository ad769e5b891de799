#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace spdc {

struct LeastSquaresOptions {
  int max_iterations = 200;
  double initial_damping = 1e-3;
  double relative_tolerance = 1e-12;
  double max_damping = 1e16;
};

template <typename Scalar>
struct LeastSquaresReport {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> params;
  Scalar objective{};  // sum of squared residuals
  int iterations = 0;
  bool converged = false;
  std::vector<Scalar> history;  // objective after every iteration, non-increasing
};

/// Damped Gauss-Newton (Levenberg-Marquardt) minimisation of |r(p)|².
///
/// `model(p, r, J)` fills the residual vector and, when J is non-null, the
/// Jacobian dr/dp. Each iteration solves (JᵀJ + λ·diag(JᵀJ)) δ = −Jᵀr; a step is
/// kept only if it lowers the objective (λ halves), otherwise λ doubles and
/// the parameters stay put. Convergence: relative objective decrease or
/// relative step below tolerance, or λ saturating at a stationary point.
template <typename Scalar, typename Model>
LeastSquaresReport<Scalar> damped_least_squares(const Model& model,
                                                Eigen::Matrix<Scalar, Eigen::Dynamic, 1> params,
                                                const LeastSquaresOptions& options = {}) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector residual;
  Matrix jacobian;
  model(params, residual, &jacobian);
  Scalar objective = residual.squaredNorm();

  LeastSquaresReport<Scalar> report;
  report.history.push_back(objective);
  Scalar damping = Scalar(options.initial_damping);
  Vector trial_residual;

  for (int it = 0; it < options.max_iterations; ++it) {
    report.iterations = it + 1;
    if (objective == Scalar(0)) {
      report.converged = true;
      break;
    }
    const Matrix normal = jacobian.transpose() * jacobian;
    const Vector gradient = jacobian.transpose() * residual;

    Matrix damped = normal;
    for (Eigen::Index k = 0; k < damped.rows(); ++k) {
      const Scalar d = normal(k, k) > Scalar(0) ? normal(k, k) : Scalar(1);
      damped(k, k) += damping * d;
    }
    const Vector step = damped.ldlt().solve(-gradient);
    const Vector trial = params + step;
    model(trial, trial_residual, nullptr);
    const Scalar trial_objective = trial_residual.squaredNorm();

    if (std::isfinite(static_cast<double>(trial_objective)) && trial_objective < objective) {
      const Scalar decrease = objective - trial_objective;
      const bool small_step =
          (step.array().abs() <= Scalar(options.relative_tolerance) * (params.array().abs() + Scalar(1e-300))).all();
      params = trial;
      objective = trial_objective;
      model(params, residual, &jacobian);
      damping *= Scalar(0.5);
      report.history.push_back(objective);
      if (decrease <= Scalar(options.relative_tolerance) * objective || small_step) {
        report.converged = true;
        break;
      }
    } else {
      damping *= Scalar(2);
      report.history.push_back(objective);
      if (damping > Scalar(options.max_damping)) {
        report.converged = true;
        break;
      }
    }
  }
  report.params = params;
  report.objective = objective;
  return report;
}

}  // namespace spdc
