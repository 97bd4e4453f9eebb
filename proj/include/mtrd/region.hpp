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

#ifndef MTRD_REGION_HPP_
#define MTRD_REGION_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mtrd/joint_pmf.hpp"
#include "mtrd/source_model.hpp"

namespace mtrd {

// Tolerance added to every distortion target.
inline constexpr double kDistortionSlack = 1e-12;

// Single-letter distortion d(x_1..x_M, y_1..y_M). The table is row-major
// over the source digits followed by the reproduction digits.
struct DistortionMeasure {
  int k_index = 0;
  std::vector<Alphabet> sources;
  std::vector<Alphabet> reproductions;
  std::vector<double> table;
  bool additive = true;

  // Errors: ShapeMismatch, NegativeMass (negative or non-finite entry).
  static DistortionMeasure Make(int k_index, std::vector<Alphabet> sources,
                                std::vector<Alphabet> reproductions, std::vector<double> table,
                                bool additive = true);

  std::size_t source_cells() const;
  std::size_t reproduction_cells() const;
  double operator()(std::size_t x_flat, std::size_t y_flat) const {
    return table[x_flat * reproduction_cells() + y_flat];
  }
  double Max() const;
};

// Reproduction alphabets equal to the source alphabets, named Y1..YM.
std::vector<Alphabet> DefaultReproductions(const std::vector<Alphabet>& sources);

// 1[x_m != y_m] for terminal m.
DistortionMeasure HammingMeasure(const std::vector<Alphabet>& sources, std::size_t m,
                                 int k_index);
// One Hamming measure per terminal.
std::vector<DistortionMeasure> HammingMeasures(const std::vector<Alphabet>& sources);

// Names of the variables that take part in a region computation.
struct RegionLayout {
  VarSet terminals;
  std::optional<std::string> side_info;
  VarSet aux;  // Z_1..Z_M

  std::size_t num_terminals() const { return terminals.size(); }
};

// Auxiliary names are Z1..ZM. Errors: InvalidArgument if a model variable
// already uses one of them.
RegionLayout LayoutOf(const SourceModel& model);

// Map h: (s, z_1..z_M) -> (y_1..y_M). The domain is S (when present) followed
// by the auxiliaries; outputs are indexed row-major over the reproductions.
class ReconMap {
 public:
  ReconMap(std::vector<Alphabet> domain, std::vector<Alphabet> outputs,
           std::vector<std::size_t> table, std::vector<char> undefined = {});

  const std::vector<Alphabet>& domain() const { return domain_; }
  const std::vector<Alphabet>& outputs() const { return outputs_; }
  std::size_t size() const { return table_.size(); }
  std::size_t operator()(std::size_t domain_flat) const { return table_[domain_flat]; }
  // Symbol of reproduction m for a domain cell.
  std::size_t Output(std::size_t domain_flat, std::size_t m) const;
  const std::vector<std::size_t>& table() const { return table_; }
  // Cells with zero probability under the joint the map was fitted to.
  bool undefined(std::size_t domain_flat) const { return undefined_[domain_flat] != 0; }
  bool any_undefined() const;

 private:
  std::vector<Alphabet> domain_;
  std::vector<Alphabet> outputs_;
  std::vector<std::size_t> out_strides_;
  std::vector<std::size_t> table_;
  std::vector<char> undefined_;
};

struct AuxConfig {
  std::vector<Channel> channels;
  ReconMap recon;

  std::vector<std::size_t> aux_sizes() const;
};

// Source joint composed with the test channels, auxiliaries renamed to
// layout.aux. Errors: AlphabetMismatch, ShapeMismatch.
JointPmf ComposeForRegion(const JointPmf& source, const RegionLayout& layout,
                          const std::vector<Channel>& channels);

// sum_{m in A} I(X_m;Z_m) - MultiInfo(Z_A) - I(Z_A; S, Z_{A^c}). A holds
// terminal indices. Errors: EmptySubset, InvalidArgument.
double SubsetBound(const JointPmf& composed, const RegionLayout& layout,
                   const std::vector<std::size_t>& subset);

// Subsets of {0..M-1} are indexed by bitmask; bounds[mask - 1] is the bound
// for that subset.
std::vector<double> AllSubsetBounds(const JointPmf& composed, const RegionLayout& layout);

// {I(X1;Z1) - I(Z1;Z2), I(X1;Z1|Z2)}. Errors: FactorizationViolated when
// the joint is not source x P(Z1|X1) x P(Z2|X2).
std::pair<double, double> BtIdentityCheck(const JointPmf& composed, const RegionLayout& layout);

std::vector<double> ExpectedDistortion(const JointPmf& composed, const RegionLayout& layout,
                                       const ReconMap& h,
                                       const std::vector<DistortionMeasure>& measures);

// Pointwise minimizer of sum_k E[d_k | s, z]; lowest index wins ties.
ReconMap OptimalRecon(const JointPmf& composed, const RegionLayout& layout,
                      const std::vector<DistortionMeasure>& measures);

// Rate tuples at the vertices of {R >= 0 : sum_{m in A} R_m >= bounds(A)},
// one per terminal ordering (duplicates removed).
std::vector<std::vector<double>> CornerPoints(const std::vector<double>& bounds, std::size_t m);

struct FrontierPoint {
  std::vector<double> rates;
  std::vector<double> bounds;      // by subset mask - 1
  std::vector<double> distortion;  // achieved, per measure
  AuxConfig config;
};

// Inner approximation of the union of the per-configuration regions.
struct RegionFrontier {
  std::size_t terminals = 0;
  std::vector<FrontierPoint> points;  // lexicographic by rates
  // subset_bounds[mask - 1] = min over points of sum_{m in mask} R_m.
  std::vector<double> subset_bounds;
  bool inner_approximation = true;

  std::vector<std::vector<double>> corners() const;
};

struct Evaluation {
  std::vector<double> bounds;
  std::vector<double> distortion;
  ReconMap recon;
};

// Fast evaluation of bounds, optimal recon and distortions for a fixed
// set of memoryless components. With several components the bound uses
// the max over components of each I(X_m;Z_m), the min over components of
// each coupling term, and the distortion is the max over components.
class RegionEvaluator {
 public:
  RegionEvaluator(std::vector<std::pair<double, JointPmf>> components, RegionLayout layout,
                  std::vector<DistortionMeasure> measures);

  const RegionLayout& layout() const { return layout_; }
  std::size_t num_terminals() const { return layout_.terminals.size(); }
  const Alphabet& source_alphabet(std::size_t m) const { return x_alpha_[m]; }
  const std::vector<DistortionMeasure>& measures() const { return measures_; }

  Evaluation Evaluate(const std::vector<Channel>& channels) const;

  // Distortion floor of each measure when the decoder sees every source
  // variable exactly.
  std::vector<double> DistortionFloor() const;

 private:
  struct Cell {
    double p;
    std::vector<std::size_t> x;  // per terminal
    std::size_t x_flat;          // row-major over terminals
    std::size_t s;
  };
  struct Component {
    double weight;
    std::vector<Cell> cells;
    std::vector<std::vector<double>> px;  // marginal of each X_m
  };

  RegionLayout layout_;
  std::vector<DistortionMeasure> measures_;
  std::vector<Alphabet> x_alpha_;
  std::optional<Alphabet> s_alpha_;
  std::vector<Component> components_;
};

struct RegionOptions {
  std::vector<std::size_t> aux_sizes;  // empty: |X_m| + 2
  int restarts = 200;
  std::uint64_t seed = 1;
  int max_sweeps = 60;
  double tolerance = 1e-6;
  // Seed with identity and constant channel combinations.
  bool include_pool = true;
  // Extra configurations evaluated as-is (after recon refit).
  std::vector<AuxConfig> witnesses;
};

// Errors: InvalidArgument (M > 3, non-memoryless model, bad sizes),
// InfeasibleDistortion.
RegionFrontier SearchRegion(const SourceModel& model,
                            const std::vector<DistortionMeasure>& measures,
                            const std::vector<double>& targets, const RegionOptions& options);
// Single-threaded reference; produces the same frontier.
RegionFrontier SearchRegionSerial(const SourceModel& model,
                                  const std::vector<DistortionMeasure>& measures,
                                  const std::vector<double>& targets,
                                  const RegionOptions& options);

// Minimum rate of a one-terminal model with side information.
double WynerZivRate(const SourceModel& model, const std::vector<DistortionMeasure>& measures,
                    const std::vector<double>& targets, const RegionOptions& options);

RegionFrontier MixedRegion(const SourceModel& a, const SourceModel& b, double alpha,
                           const std::vector<DistortionMeasure>& measures,
                           const std::vector<double>& targets, const RegionOptions& options);

}  // namespace mtrd

#endif  // MTRD_REGION_HPP_
