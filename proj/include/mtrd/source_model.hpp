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

#ifndef MTRD_SOURCE_MODEL_HPP_
#define MTRD_SOURCE_MODEL_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mtrd/joint_pmf.hpp"
#include "mtrd/rng.hpp"

namespace mtrd {

// One length-n realization of every model variable: block[v][t] is the
// symbol index of variable v at time t, variables in model order.
using Sequence = std::vector<std::uint8_t>;
using Block = std::vector<Sequence>;

// Generator of per-blocklength joint laws.
//
//  * Iid: the n-fold product of a single-letter joint.
//  * Mixed: alpha * P_A^n + (1 - alpha) * P_B^n for two component models over
//    the same variables.
//  * Explicit: a table per blocklength. The table for blocklength n uses the
//    model's variable names with alphabets of size |letter alphabet|^n; a
//    sequence maps to the symbol whose index reads the sequence as base-|A|
//    digits, first time step most significant.
class SourceModel {
 public:
  struct Iid {
    JointPmf base;
  };
  struct Mixed {
    double alpha;
    std::shared_ptr<const SourceModel> a;
    std::shared_ptr<const SourceModel> b;
  };
  struct Explicit {
    std::map<int, JointPmf> tables;
  };
  using Kind = std::variant<Iid, Mixed, Explicit>;

  static SourceModel MakeIid(JointPmf base, std::optional<std::string> side_info = std::nullopt);
  // alpha must lie in (0, 1); components must declare identical variables.
  static SourceModel MakeMixed(double alpha, SourceModel a, SourceModel b);
  static SourceModel MakeExplicit(std::vector<Alphabet> letters, std::map<int, JointPmf> tables,
                                  std::optional<std::string> side_info = std::nullopt);

  const Kind& kind() const { return kind_; }
  bool is_iid() const { return std::holds_alternative<Iid>(kind_); }
  bool is_mixed() const { return std::holds_alternative<Mixed>(kind_); }
  bool is_explicit() const { return std::holds_alternative<Explicit>(kind_); }

  // Single-letter alphabets of the model variables, in model order.
  const std::vector<Alphabet>& letters() const { return letters_; }
  std::vector<std::string> names() const;
  const std::optional<std::string>& side_info() const { return side_info_; }
  // Variables other than the side information, in model order.
  std::vector<std::string> terminals() const;
  std::size_t num_terminals() const { return terminals().size(); }

  // Memoryless components with their weights: {base} with weight 1 for Iid,
  // the two bases for a Mixed model of Iid components. InvalidArgument
  // otherwise.
  std::vector<std::pair<double, JointPmf>> MemorylessComponents() const;

 private:
  SourceModel(Kind kind, std::vector<Alphabet> letters, std::optional<std::string> side_info);

  Kind kind_;
  std::vector<Alphabet> letters_;
  std::optional<std::string> side_info_;
};

// Lazy evaluator of P(x^n) for one blocklength. Never materializes the
// n-fold table for Iid or Mixed models.
class SequenceLaw {
 public:
  SequenceLaw(SourceModel model, int n);

  int n() const { return n_; }
  // Natural log of the block probability; -inf off the support.
  double LogProb(const Block& block) const;
  double Prob(const Block& block) const;

 private:
  double LogProbOf(const SourceModel& m, const Block& block) const;

  SourceModel model_;
  int n_;
};

// Errors: InvalidArgument (n < 1), MissingBlocklength (Explicit without a
// table for n).
SequenceLaw ModelLaw(const SourceModel& model, int n);

// Draws one block. Mixed models pick a component once per block.
Block SampleBlock(const SourceModel& model, int n, Rng& rng);

// Replaces each memoryless base by its composition with the test channels.
// Explicit models are rejected with InvalidArgument.
SourceModel WithTestChannels(const SourceModel& model, const std::vector<std::string>& terminals,
                             const std::vector<Channel>& channels);

}  // namespace mtrd

#endif  // MTRD_SOURCE_MODEL_HPP_
