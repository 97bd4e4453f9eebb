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

#include "mtrd/source_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtrd/error.hpp"

namespace mtrd {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAddExp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void CheckLetters(const std::vector<Alphabet>& a, const std::vector<Alphabet>& b) {
  if (a != b) Fail(ErrorCode::kAlphabetMismatch, "mixture components declare different variables");
}

}  // namespace

SourceModel::SourceModel(Kind kind, std::vector<Alphabet> letters,
                         std::optional<std::string> side_info)
    : kind_(std::move(kind)), letters_(std::move(letters)), side_info_(std::move(side_info)) {
  if (side_info_) {
    const bool found = std::any_of(letters_.begin(), letters_.end(),
                                   [&](const Alphabet& a) { return a.name() == *side_info_; });
    if (!found) Fail(ErrorCode::kUnknownVariable, "side information '" + *side_info_ + "'");
  }
  if (terminals().empty()) Fail(ErrorCode::kInvalidArgument, "model has no terminal variables");
}

SourceModel SourceModel::MakeIid(JointPmf base, std::optional<std::string> side_info) {
  auto letters = base.variables();
  return SourceModel(Iid{std::move(base)}, std::move(letters), std::move(side_info));
}

SourceModel SourceModel::MakeMixed(double alpha, SourceModel a, SourceModel b) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "mixture weight alpha must lie in (0, 1)");
  }
  CheckLetters(a.letters(), b.letters());
  if (a.side_info() != b.side_info()) {
    Fail(ErrorCode::kInvalidArgument, "mixture components disagree on side information");
  }
  auto letters = a.letters();
  auto side = a.side_info();
  return SourceModel(Mixed{alpha, std::make_shared<const SourceModel>(std::move(a)),
                           std::make_shared<const SourceModel>(std::move(b))},
                     std::move(letters), std::move(side));
}

SourceModel SourceModel::MakeExplicit(std::vector<Alphabet> letters,
                                      std::map<int, JointPmf> tables,
                                      std::optional<std::string> side_info) {
  for (const auto& [n, table] : tables) {
    if (n < 1) Fail(ErrorCode::kInvalidArgument, "explicit table for blocklength < 1");
    if (table.num_variables() != letters.size()) {
      Fail(ErrorCode::kShapeMismatch, "explicit table variables differ from letters");
    }
    for (std::size_t v = 0; v < letters.size(); ++v) {
      const double expect = std::pow(static_cast<double>(letters[v].size()), n);
      if (table.variables()[v].name() != letters[v].name() ||
          static_cast<double>(table.variables()[v].size()) != expect) {
        Fail(ErrorCode::kShapeMismatch, "explicit table for n=" + std::to_string(n) +
                                            " has wrong alphabet for '" + letters[v].name() + "'");
      }
    }
  }
  return SourceModel(Explicit{std::move(tables)}, std::move(letters), std::move(side_info));
}

std::vector<std::string> SourceModel::names() const {
  std::vector<std::string> out;
  for (const auto& a : letters_) out.push_back(a.name());
  return out;
}

std::vector<std::string> SourceModel::terminals() const {
  std::vector<std::string> out;
  for (const auto& a : letters_) {
    if (!side_info_ || a.name() != *side_info_) out.push_back(a.name());
  }
  return out;
}

std::vector<std::pair<double, JointPmf>> SourceModel::MemorylessComponents() const {
  if (const auto* iid = std::get_if<Iid>(&kind_)) return {{1.0, iid->base}};
  if (const auto* mix = std::get_if<Mixed>(&kind_)) {
    const auto* a = std::get_if<Iid>(&mix->a->kind());
    const auto* b = std::get_if<Iid>(&mix->b->kind());
    if (a && b) return {{mix->alpha, a->base}, {1.0 - mix->alpha, b->base}};
  }
  Fail(ErrorCode::kInvalidArgument, "model is not memoryless or a mixture of memoryless sources");
}

SequenceLaw::SequenceLaw(SourceModel model, int n) : model_(std::move(model)), n_(n) {}

double SequenceLaw::LogProb(const Block& block) const {
  if (block.size() != model_.letters().size()) {
    Fail(ErrorCode::kShapeMismatch, "block has wrong number of variables");
  }
  for (const auto& seq : block) {
    if (seq.size() != static_cast<std::size_t>(n_)) {
      Fail(ErrorCode::kShapeMismatch, "block sequence length differs from n");
    }
  }
  return LogProbOf(model_, block);
}

double SequenceLaw::Prob(const Block& block) const { return std::exp(LogProb(block)); }

double SequenceLaw::LogProbOf(const SourceModel& m, const Block& block) const {
  if (const auto* iid = std::get_if<SourceModel::Iid>(&m.kind())) {
    double lp = 0.0;
    std::vector<std::size_t> digits(block.size());
    for (int t = 0; t < n_; ++t) {
      for (std::size_t v = 0; v < block.size(); ++v) digits[v] = block[v][t];
      const double p = iid->base.prob(iid->base.Flatten(digits));
      if (p == 0.0) return kNegInf;
      lp += std::log(p);
    }
    return lp;
  }
  if (const auto* mix = std::get_if<SourceModel::Mixed>(&m.kind())) {
    return LogAddExp(std::log(mix->alpha) + LogProbOf(*mix->a, block),
                     std::log1p(-mix->alpha) + LogProbOf(*mix->b, block));
  }
  const auto& ex = std::get<SourceModel::Explicit>(m.kind());
  auto it = ex.tables.find(n_);
  if (it == ex.tables.end()) {
    Fail(ErrorCode::kMissingBlocklength, "no explicit table for n=" + std::to_string(n_));
  }
  std::vector<std::size_t> digits(block.size());
  for (std::size_t v = 0; v < block.size(); ++v) {
    std::size_t idx = 0;
    for (int t = 0; t < n_; ++t) idx = idx * m.letters()[v].size() + block[v][t];
    digits[v] = idx;
  }
  const double p = it->second.prob(it->second.Flatten(digits));
  return p == 0.0 ? kNegInf : std::log(p);
}

SequenceLaw ModelLaw(const SourceModel& model, int n) {
  if (n < 1) Fail(ErrorCode::kInvalidArgument, "blocklength must be >= 1");
  if (const auto* ex = std::get_if<SourceModel::Explicit>(&model.kind())) {
    if (!ex->tables.contains(n)) {
      Fail(ErrorCode::kMissingBlocklength, "no explicit table for n=" + std::to_string(n));
    }
  }
  return SequenceLaw(model, n);
}

namespace {

std::vector<double> Cdf(std::span<const double> probs) {
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) cdf[i] = (acc += probs[i]);
  return cdf;
}

}  // namespace

Block SampleBlock(const SourceModel& model, int n, Rng& rng) {
  if (n < 1) Fail(ErrorCode::kInvalidArgument, "blocklength must be >= 1");
  const std::size_t nv = model.letters().size();
  Block block(nv, Sequence(static_cast<std::size_t>(n)));
  if (const auto* iid = std::get_if<SourceModel::Iid>(&model.kind())) {
    const auto cdf = Cdf(iid->base.probs());
    for (int t = 0; t < n; ++t) {
      const std::size_t cell = rng.Categorical(cdf);
      for (std::size_t v = 0; v < nv; ++v) {
        block[v][t] = static_cast<std::uint8_t>(iid->base.Digit(cell, v));
      }
    }
    return block;
  }
  if (const auto* mix = std::get_if<SourceModel::Mixed>(&model.kind())) {
    return rng.Uniform() < mix->alpha ? SampleBlock(*mix->a, n, rng) : SampleBlock(*mix->b, n, rng);
  }
  const auto& ex = std::get<SourceModel::Explicit>(model.kind());
  auto it = ex.tables.find(n);
  if (it == ex.tables.end()) {
    Fail(ErrorCode::kMissingBlocklength, "no explicit table for n=" + std::to_string(n));
  }
  const std::size_t cell = rng.Categorical(Cdf(it->second.probs()));
  for (std::size_t v = 0; v < nv; ++v) {
    std::size_t idx = it->second.Digit(cell, v);
    const std::size_t radix = model.letters()[v].size();
    for (int t = n; t-- > 0;) {
      block[v][t] = static_cast<std::uint8_t>(idx % radix);
      idx /= radix;
    }
  }
  return block;
}

SourceModel WithTestChannels(const SourceModel& model, const std::vector<std::string>& terminals,
                             const std::vector<Channel>& channels) {
  if (const auto* iid = std::get_if<SourceModel::Iid>(&model.kind())) {
    return SourceModel::MakeIid(ComposeWithTestChannels(iid->base, terminals, channels),
                                model.side_info());
  }
  if (const auto* mix = std::get_if<SourceModel::Mixed>(&model.kind())) {
    return SourceModel::MakeMixed(mix->alpha, WithTestChannels(*mix->a, terminals, channels),
                                  WithTestChannels(*mix->b, terminals, channels));
  }
  Fail(ErrorCode::kInvalidArgument, "test channels cannot be attached to an explicit model");
}

}  // namespace mtrd
