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

#ifndef MTRD_SPECTRUM_HPP_
#define MTRD_SPECTRUM_HPP_

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "mtrd/joint_pmf.hpp"
#include "mtrd/source_model.hpp"

namespace mtrd {

// Normalized information densities (1/n) ln(...) whose finite-n
// distributions are computed below.

// -(1/n) ln P(x^n)
struct EntropyDensity {
  VarSet x;
};
// -(1/n) ln P(x^n | y^n)
struct CondEntropyDensity {
  VarSet x;
  VarSet given;
};
// (1/n) ln P(x^n, y^n) / (P(x^n) P(y^n))
struct MutualInfoDensity {
  VarSet x;
  VarSet y;
};
// (1/n) ln P((z_m^n)_m) / prod_m P(z_m^n); each name is one part.
struct MultiInfoDensity {
  VarSet parts;
};
// (1/n) ln P(a^n | b^n, c^n) / P(a^n | c^n). With `given` empty this is the
// mutual-information density between the groups a and b, which is how the
// subset bounds use it: I((Z_m)_{m in A}; S, (Z_m)_{m not in A}).
struct CondMutualInfoDensity {
  VarSet a;
  VarSet b;
  VarSet given;
};
// (1/n) ln P(x^n | y^n) / Q(x^n | y^n), Q taken from `reference`, which must
// declare the same x and y variables.
struct DivergenceDensity {
  VarSet x;
  VarSet given;
  JointPmf reference;
};

using DensityKind = std::variant<EntropyDensity, CondEntropyDensity, MutualInfoDensity,
                                 MultiInfoDensity, CondMutualInfoDensity, DivergenceDensity>;

std::string DensityLabel(const DensityKind& kind);

struct Atom {
  double value;  // nats per symbol
  double mass;
};

// Exact distribution of a normalized density at one blocklength. Atoms are
// sorted ascending by value with strictly positive masses.
struct DensitySpectrum {
  int n = 0;
  std::vector<Atom> atoms;

  double TotalMass() const;
  double Mean() const;
  double Variance() const;
  // Left-continuous inverse CDF: smallest atom value v with F(v) >= p.
  double Quantile(double p) const;
  // Pr[value < threshold]
  double MassBelow(double threshold) const;
};

struct SpectrumOptions {
  // Cap on atoms (IID convolution) or enumerated types (mixtures).
  std::size_t budget = 4'000'000;
  // Atoms closer than this (nats per symbol) are merged.
  double resolution = 1e-12;
};

// Errors: BudgetExceeded, UndefinedDensity, InvalidArgument, UnknownVariable,
// MissingBlocklength.
DensitySpectrum ComputeSpectrum(const SourceModel& model, int n, const DensityKind& kind,
                                const SpectrumOptions& options = {});

// One spectrum per blocklength, evaluated in parallel. Output order follows
// `n_grid`.
std::vector<DensitySpectrum> ComputeSpectra(const SourceModel& model,
                                            const std::vector<int>& n_grid,
                                            const DensityKind& kind,
                                            const SpectrumOptions& options = {});

// Serial reference for ComputeSpectra.
std::vector<DensitySpectrum> ComputeSpectraSerial(const SourceModel& model,
                                                  const std::vector<int>& n_grid,
                                                  const DensityKind& kind,
                                                  const SpectrumOptions& options = {});

struct QuantilePoint {
  int n;
  double inf_quantile;  // epsilon quantile
  double sup_quantile;  // (1 - epsilon) quantile
};

// Finite-n stand-ins for p-liminf / p-limsup. The proxies are read off the
// largest blocklength; the trajectory over the whole grid is kept so that
// convergence (or its absence) is visible.
struct SpectralEstimate {
  double sup_proxy = 0.0;
  double inf_proxy = 0.0;
  double epsilon = 0.0;
  std::vector<int> n_grid;
  std::vector<QuantilePoint> trajectory;
  bool extrapolated = false;
};

// Spectra must be nonempty (EmptyGrid) with ascending n; 0 < epsilon < 0.5.
SpectralEstimate SpectralProxies(const std::vector<DensitySpectrum>& spectra, double epsilon);

struct TailCheck {
  double probability;  // Pr[density < -gamma]
  double bound;        // exp(-n gamma)
};

// Tail of the conditional divergence density of `law` against `reference`
// for the memoryless extension at blocklength n. The probability never
// exceeds the bound.
TailCheck DivergenceTailCheck(const JointPmf& law, const JointPmf& reference, const VarSet& x,
                              const VarSet& given, int n, double gamma,
                              const SpectrumOptions& options = {});

}  // namespace mtrd

#endif  // MTRD_SPECTRUM_HPP_
