// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace percwalk {

// Deterministic parallel loop: fn(i) writes only to slot i of caller state,
// so results are independent of scheduling and thread count.
inline void parallel_for(int64_t n, const std::function<void(int64_t)>& fn, int threads = 0) {
  if (threads <= 0) threads = int(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, int(n)));
  if (threads == 1 || n <= 1) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(size_t(threads));
  for (int tid = 0; tid < threads; ++tid) {
    pool.emplace_back([&, tid]() {
      for (int64_t i = tid; i < n; i += threads) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct WilsonInterval {
  double lo = 0, hi = 1;
};

// 95% Wilson score interval for a binomial proportion
inline WilsonInterval wilson95(int64_t successes, int64_t trials) {
  if (trials <= 0) return {0, 1};
  const double z = 1.959963984540054;
  double n = double(trials), ph = double(successes) / n, z2 = z * z;
  double denom = 1 + z2 / n;
  double center = (ph + z2 / (2 * n)) / denom;
  double half = z * std::sqrt(ph * (1 - ph) / n + z2 / (4 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct LinearFit {
  double slope = 0, intercept = 0, r2 = 0;
  int64_t n = 0;
};

inline LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  LinearFit f;
  f.n = int64_t(xs.size());
  if (f.n < 2) return f;
  double mx = 0, my = 0;
  for (int64_t i = 0; i < f.n; ++i) {
    mx += xs[size_t(i)];
    my += ys[size_t(i)];
  }
  mx /= double(f.n);
  my /= double(f.n);
  double sxx = 0, sxy = 0, syy = 0;
  for (int64_t i = 0; i < f.n; ++i) {
    double dx = xs[size_t(i)] - mx, dy = ys[size_t(i)] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = (syy == 0) ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  double pos = q * double(v.size() - 1);
  size_t i = size_t(pos);
  if (i + 1 >= v.size()) return v.back();
  double frac = pos - double(i);
  return v[i] * (1 - frac) + v[i + 1] * frac;
}

// %.17g rendering; round-trips doubles exactly and is locale-independent
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double sq(double x) { return x * x; }

}  // namespace percwalk
