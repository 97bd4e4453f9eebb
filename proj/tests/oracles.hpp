// Copyright 2026 The mtrd Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Test-only reference computations. Nothing here calls into the library
// routines it is used to check.

#ifndef MTRD_TESTS_ORACLES_HPP_
#define MTRD_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "mtrd/joint_pmf.hpp"
#include "mtrd/rng.hpp"

namespace mtrd::oracle {

inline double Hb(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1 - p) * std::log(1 - p);
}

inline std::vector<double> Dirichlet(Rng& rng, std::size_t k) {
  std::vector<double> v(k);
  double s = 0.0;
  for (auto& x : v) s += (x = rng.Exponential());
  for (auto& x : v) x /= s;
  return v;
}

// Random joint over named variables with the given alphabet sizes.
inline JointPmf RandomJoint(Rng& rng, const std::vector<std::string>& names,
                            const std::vector<std::size_t>& sizes) {
  std::vector<Alphabet> vars;
  std::size_t cells = 1;
  for (std::size_t i = 0; i < names.size(); ++i) {
    vars.push_back(Alphabet::Indexed(names[i], sizes[i]));
    cells *= sizes[i];
  }
  return JointPmf::Make(std::move(vars), Dirichlet(rng, cells));
}

inline Channel RandomChannel(Rng& rng, const Alphabet& in, Alphabet out) {
  std::vector<double> rows;
  for (std::size_t x = 0; x < in.size(); ++x) {
    auto r = Dirichlet(rng, out.size());
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return Channel::Make(in, std::move(out), std::move(rows));
}

// Direct summation: probabilities of the sub-tuple `vars` (positions) by
// walking every cell with explicit digit arithmetic.
inline std::map<std::vector<std::size_t>, double> DirectMarginal(
    const std::vector<double>& table, const std::vector<std::size_t>& sizes,
    const std::vector<std::size_t>& vars) {
  std::map<std::vector<std::size_t>, double> out;
  std::vector<std::size_t> digits(sizes.size(), 0);
  for (double p : table) {
    std::vector<std::size_t> key;
    for (std::size_t v : vars) key.push_back(digits[v]);
    out[key] += p;
    for (std::size_t v = sizes.size(); v-- > 0;) {
      if (++digits[v] < sizes[v]) break;
      digits[v] = 0;
    }
  }
  return out;
}

inline double DirectEntropy(const std::vector<double>& table,
                            const std::vector<std::size_t>& sizes,
                            const std::vector<std::size_t>& vars) {
  double h = 0.0;
  for (const auto& [k, p] : DirectMarginal(table, sizes, vars)) {
    if (p > 0) h += p * std::log(1.0 / p);
  }
  return h;
}

// I(X;Y) = sum p(x,y) ln p(x,y)/(p(x)p(y)), summed directly.
inline double DirectMutualInfo(const std::vector<double>& table,
                               const std::vector<std::size_t>& sizes,
                               const std::vector<std::size_t>& xs,
                               const std::vector<std::size_t>& ys) {
  std::vector<std::size_t> both = xs;
  both.insert(both.end(), ys.begin(), ys.end());
  const auto pxy = DirectMarginal(table, sizes, both);
  const auto px = DirectMarginal(table, sizes, xs);
  const auto py = DirectMarginal(table, sizes, ys);
  double i = 0.0;
  for (const auto& [k, p] : pxy) {
    if (p <= 0) continue;
    std::vector<std::size_t> kx(k.begin(), k.begin() + xs.size());
    std::vector<std::size_t> ky(k.begin() + xs.size(), k.end());
    i += p * std::log(p / (px.at(kx) * py.at(ky)));
  }
  return i;
}

// Blahut-Arimoto for the point-to-point rate-distortion function R(D) of a
// source pmf under a distortion matrix d[x][y]; bisection on the slope
// until the achieved distortion matches D.
inline double BlahutArimotoRate(const std::vector<double>& px,
                                const std::vector<std::vector<double>>& d, double target) {
  const std::size_t nx = px.size(), ny = d[0].size();
  auto solve = [&](double s, double* dist) {
    std::vector<double> q(ny, 1.0 / ny);
    std::vector<std::vector<double>> cond(nx, std::vector<double>(ny));
    for (int it = 0; it < 20000; ++it) {
      for (std::size_t x = 0; x < nx; ++x) {
        double z = 0.0;
        for (std::size_t y = 0; y < ny; ++y) z += cond[x][y] = q[y] * std::exp(-s * d[x][y]);
        for (std::size_t y = 0; y < ny; ++y) cond[x][y] /= z;
      }
      std::vector<double> nq(ny, 0.0);
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) nq[y] += px[x] * cond[x][y];
      double diff = 0.0;
      for (std::size_t y = 0; y < ny; ++y) diff = std::max(diff, std::abs(nq[y] - q[y]));
      q = nq;
      if (diff < 1e-15) break;
    }
    double rate = 0.0, dd = 0.0;
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) {
        const double p = px[x] * cond[x][y];
        if (p > 0) rate += p * std::log(cond[x][y] / q[y]);
        dd += p * d[x][y];
      }
    *dist = dd;
    return rate;
  };
  double lo = 0.0, hi = 200.0, rate = 0.0, dist = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    rate = solve(mid, &dist);
    if (dist > target) lo = mid; else hi = mid;
  }
  rate = solve(hi, &dist);
  return rate;
}

// Pr[(1/n) ln P(x^n|y^n)/Q(x^n|y^n) < -gamma] by enumerating every pair of
// length-n sequences. `p` and `q` are |X|x|Y| joint tables indexed [x][y].
inline double EnumeratedDivergenceTail(const std::vector<std::vector<double>>& p,
                                       const std::vector<std::vector<double>>& q, int n,
                                       double gamma) {
  const std::size_t nx = p.size(), ny = p[0].size();
  std::vector<double> py(ny, 0.0), qy(ny, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      py[y] += p[x][y];
      qy[y] += q[x][y];
    }
  double tail = 0.0;
  std::function<void(int, double, double)> walk = [&](int t, double mass, double llr) {
    if (t == n) {
      if (llr / n < -gamma) tail += mass;
      return;
    }
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) {
        if (p[x][y] <= 0) continue;
        walk(t + 1, mass * p[x][y],
             llr + std::log(p[x][y] / py[y]) - std::log(q[x][y] / qy[y]));
      }
  };
  walk(0, 1.0, 0.0);
  return tail;
}

}  // namespace mtrd::oracle

#endif  // MTRD_TESTS_ORACLES_HPP_
