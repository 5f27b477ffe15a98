#include "gifsim/ode.hpp"

#include <algorithm>
#include <cmath>

namespace gifsim {

namespace {

// Dormand–Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

OdeSolver::OdeSolver(OdeRhs rhs, double t0, VectorXc y0, OdeOptions options)
    : rhs_(std::move(rhs)), t_(t0), y_(std::move(y0)), opt_(options) {
  const auto n = y_.size();
  for (VectorXc* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_}) v->resize(n);
  if (opt_.fixed_step && !(*opt_.fixed_step > 0.0))
    throw std::invalid_argument("fixed step must be positive");
}

void OdeSolver::advance_to(double t_target) {
  if (t_target < t_) throw std::invalid_argument("OdeSolver cannot integrate backwards");
  if (t_target == t_) return;
  if (opt_.fixed_step)
    advance_fixed(t_target);
  else
    advance_adaptive(t_target);
}

void OdeSolver::advance_fixed(double t_target) {
  const double span = t_target - t_;
  const long n = std::max(1L, static_cast<long>(std::ceil(span / *opt_.fixed_step - 1e-9)));
  const double h = span / static_cast<double>(n);
  const double t_start = t_;
  for (long i = 0; i < n; ++i) {
    const double t = t_start + h * static_cast<double>(i);
    rhs_(t, y_, k1_);
    ytmp_ = y_ + (0.5 * h) * k1_;
    rhs_(t + 0.5 * h, ytmp_, k2_);
    ytmp_ = y_ + (0.5 * h) * k2_;
    rhs_(t + 0.5 * h, ytmp_, k3_);
    ytmp_ = y_ + h * k3_;
    rhs_(t + h, ytmp_, k4_);
    y_ += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    stats_.rhs_evals += 4;
    ++stats_.accepted;
  }
  t_ = t_target;
}

double OdeSolver::initial_step_guess() {
  if (opt_.initial_step > 0.0) return opt_.initial_step;
  rhs_(t_, y_, k1_);
  ++stats_.rhs_evals;
  fsal_valid_ = true;
  double d0 = 0.0, d1 = 0.0;
  for (Eigen::Index i = 0; i < y_.size(); ++i) {
    const double sc = opt_.atol + opt_.rtol * std::abs(y_[i]);
    d0 = std::max(d0, std::abs(y_[i]) / sc);
    d1 = std::max(d1, std::abs(k1_[i]) / sc);
  }
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  return std::clamp(h, 1e-10, 1e-2);
}

void OdeSolver::advance_adaptive(double t_target) {
  if (h_ <= 0.0) h_ = initial_step_guess();
  constexpr double safety = 0.9, min_factor = 0.2, max_factor = 5.0;
  long steps_here = 0;
  while (t_ < t_target) {
    if (++steps_here > opt_.max_steps)
      throw NumericalError("step-count", "exceeded max_steps before reaching target time");
    double h = h_;
    if (opt_.max_step > 0.0) h = std::min(h, opt_.max_step);
    bool last = false;
    if (t_ + h >= t_target || (t_target - t_ - h) < 1e-12 * std::abs(t_target)) {
      h = t_target - t_;
      last = true;
    }
    if (h < opt_.min_step && !last)
      throw NumericalError("step-size", "adaptive step underflow at t=" + std::to_string(t_));

    if (!fsal_valid_) {
      rhs_(t_, y_, k1_);
      ++stats_.rhs_evals;
      fsal_valid_ = true;
    }
    ytmp_ = y_ + h * a21 * k1_;
    rhs_(t_ + c2 * h, ytmp_, k2_);
    ytmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
    rhs_(t_ + c3 * h, ytmp_, k3_);
    ytmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    rhs_(t_ + c4 * h, ytmp_, k4_);
    ytmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    rhs_(t_ + c5 * h, ytmp_, k5_);
    ytmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    rhs_(t_ + h, ytmp_, k6_);
    ynew_ = y_ + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
    rhs_(t_ + h, ynew_, k7_);
    stats_.rhs_evals += 6;

    double err = 0.0;
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
      const cplx e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] +
                          e7 * k7_[i]);
      const double sc = opt_.atol + opt_.rtol * std::max(std::abs(y_[i]), std::abs(ynew_[i]));
      err = std::max(err, std::abs(e) / sc);
    }

    if (err <= 1.0 || h <= opt_.min_step) {
      t_ = last ? t_target : t_ + h;
      y_.swap(ynew_);
      k1_.swap(k7_);
      ++stats_.accepted;
      const double factor =
          err == 0.0 ? max_factor : std::clamp(safety * std::pow(err, -0.2), min_factor, max_factor);
      // A truncated final step says nothing about the natural step size.
      if (!last || factor < 1.0) h_ = h * factor;
    } else {
      ++stats_.rejected;
      h_ = h * std::max(min_factor, safety * std::pow(err, -0.2));
    }
  }
}

}  // namespace gifsim
