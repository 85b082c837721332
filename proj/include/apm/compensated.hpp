#pragma once

namespace apm {

// Error-free transformation: s + err == a + b exactly.
inline void two_sum(double a, double b, double& s, double& err) noexcept {
  s = a + b;
  const double bb = s - a;
  err = (a - (s - bb)) + (b - bb);
}

// Running sum carried as an unevaluated pair (hi, lo).
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(double v) : hi_(v) {}
  CompensatedSum(double hi, double lo) : hi_(hi), lo_(lo) {}

  CompensatedSum& operator+=(double v) noexcept {
    double err;
    two_sum(hi_, v, hi_, err);
    lo_ += err;
    return *this;
  }

  CompensatedSum& operator+=(const CompensatedSum& o) noexcept {
    *this += o.hi_;
    lo_ += o.lo_;
    return *this;
  }

  double value() const noexcept { return hi_ + lo_; }
  double hi() const noexcept { return hi_; }
  double lo() const noexcept { return lo_; }

 private:
  double hi_ = 0.0;
  double lo_ = 0.0;
};

}  // namespace apm
