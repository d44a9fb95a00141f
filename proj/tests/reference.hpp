#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "fang/eval.hpp"

namespace fang::test {

// Textbook OPTICS with an ordered seed set keyed by (reachability, index),
// distances computed point by point.
inline OpticsOrdering reference_optics(const Eigen::MatrixXd& x, int min_pts) {
  const std::size_t n = static_cast<std::size_t>(x.cols());
  auto dist = [&](std::size_t a, std::size_t b) {
    double s = 0;
    for (Index r = 0; r < x.rows(); ++r) s += (x(r, a) - x(r, b)) * (x(r, a) - x(r, b));
    return std::sqrt(s);
  };
  const double inf = std::numeric_limits<double>::infinity();
  OpticsOrdering o;
  o.reachability.assign(n, inf);
  o.core_distance.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < n; ++j) d.push_back(dist(i, j));
    std::sort(d.begin(), d.end());
    o.core_distance[i] = d[static_cast<std::size_t>(min_pts - 1)];
  }
  std::vector<bool> done(n, false);
  for (std::size_t start = 0; start < n; ++start) {
    if (done[start]) continue;
    std::set<std::pair<double, std::size_t>> seeds{{inf, start}};
    while (!seeds.empty()) {
      const std::size_t p = seeds.begin()->second;
      seeds.erase(seeds.begin());
      done[p] = true;
      o.order.push_back(p);
      for (std::size_t q = 0; q < n; ++q) {
        if (done[q]) continue;
        const double r = std::max(o.core_distance[p], dist(p, q));
        if (r < o.reachability[q]) {
          seeds.erase({o.reachability[q], q});
          o.reachability[q] = r;
          seeds.insert({r, q});
        }
      }
    }
  }
  return o;
}

// Two tight groups, a loose point between them and one far outlier.
inline Eigen::MatrixXd twelve_points() {
  Eigen::MatrixXd x(2, 12);
  x << 0, 1, 0, 1, 2, 9, 10, 9, 10, 5, 20, 11,  //
      0, 0, 1, 1, 0, 9, 9, 10, 10, 5, 20, 9;
  return x;
}

}  // namespace fang::test
