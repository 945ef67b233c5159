#include "bracket_reach/integrator.hpp"

#include <algorithm>
#include <cmath>

#include "bracket_reach/errors.hpp"

namespace bracket_reach::flows {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat (error weights).
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

class Stepper {
 public:
  Stepper(const fields::SmoothField& field, const fields::Box& box, double tol)
      : field_(field), box_(box), tol_(tol), n_(field.dim()),
        k1_(n_), k2_(n_), k3_(n_), k4_(n_), k5_(n_), k6_(n_), k7_(n_), tmp_(n_), next_(n_) {}

  // Advances x from time `from` to `to` (either direction).  `elapsed`
  // tracks the absolute flow time for error reporting.
  void advance(Vector& x, double from, double to) {
    const double span = to - from;
    if (span == 0.0) return;
    const double dir = span > 0 ? 1.0 : -1.0;
    double t = from;
    if (h_ == 0.0) h_ = std::min(std::abs(span), 0.05);
    rhs(x, k1_);
    while (dir * (to - t) > 0.0) {
      double h = std::min(h_, dir * (to - t));
      const bool last = h >= dir * (to - t);
      const double hs = dir * h;
      stage(x, hs);
      double err = 0.0;
      for (int i = 0; i < n_; ++i) {
        const double ei =
            hs * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
        err = std::max(err, std::abs(ei));
      }
      const double ratio = err / (tol_ * h);
      if (!std::isfinite(ratio) || ratio > 1.0) {
        const double shrink = std::isfinite(ratio) ? std::max(0.2, 0.9 * std::pow(ratio, -0.25)) : 0.2;
        h_ = h * shrink;
        if (h_ < kMinStep) {
          throw StepUnderflow("integrator step fell below 1e-14 at flow time " +
                              std::to_string(elapsed_ + (t - from)));
        }
        continue;
      }
      if (!box_.contains(next_)) {
        throw DomainEscape("trajectory left the domain box after flow time " +
                               std::to_string(elapsed_ + (t - from)),
                           elapsed_ + (t - from));
      }
      x = next_;
      k1_ = k7_;  // FSAL
      t = last ? to : t + hs;
      const double grow =
          ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.25), 0.2, 5.0);
      // A step clipped to land on `to` says little about the admissible size.
      if (!(h < h_ && grow >= 1.0)) h_ = h * grow;
    }
    elapsed_ += span;
  }

 private:
  void rhs(const Vector& x, Vector& out) const {
    field_.evaluate(std::span<const double>(x.data(), static_cast<std::size_t>(n_)),
                    std::span<double>(out.data(), static_cast<std::size_t>(n_)));
  }

  void stage(const Vector& x, double h) {
    tmp_ = x + h * a21 * k1_;
    rhs(tmp_, k2_);
    tmp_ = x + h * (a31 * k1_ + a32 * k2_);
    rhs(tmp_, k3_);
    tmp_ = x + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    rhs(tmp_, k4_);
    tmp_ = x + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    rhs(tmp_, k5_);
    tmp_ = x + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    rhs(tmp_, k6_);
    next_ = x + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
    rhs(next_, k7_);
  }

  const fields::SmoothField& field_;
  const fields::Box& box_;
  double tol_;
  int n_;
  double h_ = 0.0;
  double elapsed_ = 0.0;
  Vector k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, next_;
};

void check_start(const fields::SmoothField& field, const fields::Box& box, const Vector& x0,
                 double tol) {
  if (x0.size() != field.dim()) throw DimensionMismatch("integrate_flow: point dimension mismatch");
  if (!(tol > 0.0)) throw InvalidArgument("integrate_flow: tolerance must be positive");
  if (!box.contains(x0)) throw DomainEscape("initial point outside the domain box", 0.0);
}

}  // namespace

Vector integrate_flow(const fields::SmoothField& field, const fields::Box& box, const Vector& x0,
                      double t, double tol) {
  check_start(field, box, x0, tol);
  Vector x = x0;
  if (t == 0.0) return x;
  Stepper stepper(field, box, tol);
  stepper.advance(x, 0.0, t);
  return x;
}

std::vector<FlowSample> integrate_flow_sampled(const fields::SmoothField& field,
                                               const fields::Box& box, const Vector& x0, double t,
                                               int intervals, double tol) {
  check_start(field, box, x0, tol);
  if (intervals < 1) throw InvalidArgument("integrate_flow_sampled: need at least one interval");
  std::vector<FlowSample> out;
  out.reserve(static_cast<std::size_t>(intervals + 1));
  Vector x = x0;
  out.push_back({0.0, x});
  Stepper stepper(field, box, tol);
  double prev = 0.0;
  for (int i = 1; i <= intervals; ++i) {
    const double s = (i == intervals) ? t : t * static_cast<double>(i) / intervals;
    stepper.advance(x, prev, s);
    out.push_back({s, x});
    prev = s;
  }
  return out;
}

}  // namespace bracket_reach::flows
