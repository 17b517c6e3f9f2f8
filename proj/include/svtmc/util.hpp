#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace svtmc {

/// Neumaier compensated accumulator; keeps long sums accurate to a few ulps
/// of the result rather than growing error with the term count.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Decimal form with 17 significant digits (round-trip exact for doubles).
std::string fmt17(double x);

/// Median of a sample (takes a copy; averages the middle pair for even n).
double median(std::vector<double> v);

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  int points = 0;
};

/// Ordinary least squares y = intercept + slope * x; requires >= 3 points.
OlsFit ols_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace svtmc
