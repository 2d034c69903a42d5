#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

// Reference computations written independently of the library.
namespace oracle {

using State = std::vector<double>;
using Rhs = std::function<State(double, const State&)>;

// Classic fourth-order Runge-Kutta with a fixed step.
inline State rk4(const Rhs& f, State y, double t0, double t1, int steps) {
  const double h = (t1 - t0) / steps;
  auto axpy = [](const State& a, double s, const State& b) {
    State out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
    return out;
  };
  double t = t0;
  for (int k = 0; k < steps; ++k) {
    const State k1 = f(t, y);
    const State k2 = f(t + h / 2, axpy(y, h / 2, k1));
    const State k3 = f(t + h / 2, axpy(y, h / 2, k2));
    const State k4 = f(t + h, axpy(y, h, k3));
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    t += h;
  }
  return y;
}

// Root of a monotone function on [lo, hi] by bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// (1/N) sum_i y_i x_i^T from explicit outer products.
inline Eigen::MatrixXd outer_mean(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, int n) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(y.rows(), x.rows());
  for (Eigen::Index i = 0; i < y.cols(); ++i) acc += y.col(i) * x.col(i).transpose();
  return acc / n;
}

// Central finite difference of f with respect to every entry of w, negated
// to match the library's descent-direction gradients.
inline Eigen::MatrixXd neg_fd_gradient(const std::function<double()>& f, Eigen::MatrixXd& w,
                                       double h = 1e-6) {
  Eigen::MatrixXd g(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double orig = w.data()[i];
    w.data()[i] = orig + h;
    const double lp = f();
    w.data()[i] = orig - h;
    const double lm = f();
    w.data()[i] = orig;
    g.data()[i] = -(lp - lm) / (2 * h);
  }
  return g;
}

inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

}  // namespace oracle
