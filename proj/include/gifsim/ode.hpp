#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gifsim {

using cplx = std::complex<double>;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

inline constexpr cplx kI{0.0, 1.0};

/// Raised when a numerical invariant is violated (norm drift, constraint drift,
/// step-size underflow, basis misalignment). `invariant()` names the check.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string invariant, const std::string& what)
      : std::runtime_error(invariant + ": " + what), invariant_(std::move(invariant)) {}
  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 picks a step from the initial derivative
  double min_step = 1e-13;
  double max_step = 0.0;      // 0 means unbounded
  long max_steps = 50'000'000;
  /// When set, classical RK4 with this step (each advance is split into equal
  /// sub-steps no longer than the value). Bit-reproducible.
  std::optional<double> fixed_step;
};

using OdeRhs = std::function<void(double t, const VectorXc& y, VectorXc& dydt)>;

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

/// Dormand–Prince 5(4) with max-norm error control, or fixed-step RK4.
/// The solver remembers its step size between `advance_to` calls.
class OdeSolver {
 public:
  OdeSolver(OdeRhs rhs, double t0, VectorXc y0, OdeOptions options);

  void advance_to(double t_target);

  double time() const { return t_; }
  const VectorXc& state() const { return y_; }
  VectorXc& mutable_state() { fsal_valid_ = false; return y_; }
  /// Call when the right-hand side changes discontinuously at the current time.
  void invalidate_derivative() { fsal_valid_ = false; }
  const OdeStats& stats() const { return stats_; }

 private:
  void advance_adaptive(double t_target);
  void advance_fixed(double t_target);
  double initial_step_guess();

  OdeRhs rhs_;
  double t_;
  VectorXc y_;
  OdeOptions opt_;
  OdeStats stats_;
  double h_ = 0.0;
  VectorXc k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_;
  bool fsal_valid_ = false;
};

}  // namespace gifsim
