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

#include "mtrd/joint_pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mtrd/error.hpp"

namespace mtrd {

struct PmfAccess {
  static JointPmf Build(std::vector<Alphabet> variables, std::vector<double> probs) {
    return JointPmf(std::move(variables), std::move(probs));
  }
};

namespace {

// Shared by JointPmf and Channel rows: reject negatives, renormalize small
// deviations, reject larger ones.
void NormalizeInPlace(std::span<double> values, const std::string& what) {
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) Fail(ErrorCode::kInvalidArgument, what + ": non-finite entry");
    if (v < 0.0) Fail(ErrorCode::kNegativeMass, what + ": negative entry " + std::to_string(v));
    sum += v;
  }
  if (std::abs(sum - 1.0) > kRenormalizeTolerance) {
    Fail(ErrorCode::kSumNotOne, what + ": entries sum to " + std::to_string(sum));
  }
  for (double& v : values) v /= sum;
}

std::string Join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

// Product alphabet of the selected variables of `j`, in the given order.
Alphabet ProductAlphabet(const JointPmf& j, std::span<const std::size_t> vars) {
  std::vector<std::string> names;
  std::vector<std::string> symbols{""};
  for (std::size_t v : vars) {
    const Alphabet& a = j.variables()[v];
    names.push_back(a.name());
    std::vector<std::string> next;
    next.reserve(symbols.size() * a.size());
    for (const auto& prefix : symbols) {
      for (const auto& s : a.symbols()) next.push_back(prefix.empty() ? s : prefix + ',' + s);
    }
    symbols = std::move(next);
  }
  return Alphabet(Join(names), std::move(symbols));
}

std::vector<std::size_t> Resolve(const JointPmf& j, const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(j.IndexOf(n));
  return out;
}

// Flat index into the sub-table spanned by `vars` (first most significant).
std::size_t SubIndex(const JointPmf& j, std::size_t flat, std::span<const std::size_t> vars) {
  std::size_t idx = 0;
  for (std::size_t v : vars) idx = idx * j.variables()[v].size() + j.Digit(flat, v);
  return idx;
}

}  // namespace

Alphabet::Alphabet(std::string name, std::vector<std::string> symbols)
    : name_(std::move(name)), symbols_(std::move(symbols)) {
  if (symbols_.empty()) Fail(ErrorCode::kInvalidArgument, "alphabet '" + name_ + "' is empty");
  std::set<std::string> seen(symbols_.begin(), symbols_.end());
  if (seen.size() != symbols_.size()) {
    Fail(ErrorCode::kInvalidArgument, "alphabet '" + name_ + "' has repeated symbols");
  }
}

Alphabet Alphabet::Indexed(std::string name, std::size_t size) {
  std::vector<std::string> symbols(size);
  for (std::size_t i = 0; i < size; ++i) symbols[i] = std::to_string(i);
  return Alphabet(std::move(name), std::move(symbols));
}

std::size_t Alphabet::IndexOf(std::string_view label) const {
  auto it = std::find(symbols_.begin(), symbols_.end(), label);
  if (it == symbols_.end()) {
    Fail(ErrorCode::kUnknownVariable,
         "symbol '" + std::string(label) + "' not in alphabet '" + name_ + "'");
  }
  return static_cast<std::size_t>(it - symbols_.begin());
}

JointPmf::JointPmf(std::vector<Alphabet> variables, std::vector<double> probs)
    : variables_(std::move(variables)), probs_(std::move(probs)) {
  strides_.assign(variables_.size(), 1);
  for (std::size_t v = variables_.size(); v-- > 1;) {
    strides_[v - 1] = strides_[v] * variables_[v].size();
  }
}

JointPmf JointPmf::Make(std::vector<Alphabet> variables, std::vector<double> probs) {
  if (variables.empty()) Fail(ErrorCode::kInvalidArgument, "joint pmf needs at least one variable");
  std::set<std::string> names;
  std::size_t cells = 1;
  for (const auto& a : variables) {
    if (!names.insert(a.name()).second) {
      Fail(ErrorCode::kInvalidArgument, "duplicate variable '" + a.name() + "'");
    }
    cells *= a.size();
  }
  if (probs.size() != cells) {
    Fail(ErrorCode::kShapeMismatch, "table has " + std::to_string(probs.size()) +
                                        " entries, product alphabet has " + std::to_string(cells));
  }
  NormalizeInPlace(probs, "joint pmf");
  return JointPmf(std::move(variables), std::move(probs));
}

std::vector<std::string> JointPmf::names() const {
  std::vector<std::string> out;
  for (const auto& a : variables_) out.push_back(a.name());
  return out;
}

bool JointPmf::Has(std::string_view name) const {
  return std::any_of(variables_.begin(), variables_.end(),
                     [&](const Alphabet& a) { return a.name() == name; });
}

std::size_t JointPmf::IndexOf(std::string_view name) const {
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    if (variables_[v].name() == name) return v;
  }
  Fail(ErrorCode::kUnknownVariable, "unknown variable '" + std::string(name) + "'");
}

std::size_t JointPmf::Flatten(std::span<const std::size_t> index) const {
  std::size_t flat = 0;
  for (std::size_t v = 0; v < variables_.size(); ++v) flat += index[v] * strides_[v];
  return flat;
}

void JointPmf::Unflatten(std::size_t flat, std::span<std::size_t> index) const {
  for (std::size_t v = 0; v < variables_.size(); ++v) index[v] = Digit(flat, v);
}

Channel::Channel(Alphabet input, Alphabet output, std::vector<double> rows,
                 std::vector<char> defined)
    : input_(std::move(input)),
      output_(std::move(output)),
      rows_(std::move(rows)),
      defined_(std::move(defined)) {}

Channel Channel::Make(Alphabet input, Alphabet output, std::vector<double> rows) {
  if (rows.size() != input.size() * output.size()) {
    Fail(ErrorCode::kShapeMismatch, "channel table has wrong size");
  }
  for (std::size_t x = 0; x < input.size(); ++x) {
    NormalizeInPlace(std::span<double>(rows).subspan(x * output.size(), output.size()),
                     "channel row " + std::to_string(x));
  }
  std::vector<char> defined(input.size(), 1);
  return Channel(std::move(input), std::move(output), std::move(rows), std::move(defined));
}

Channel Channel::Identity(const Alphabet& input, Alphabet output) {
  if (output.size() < input.size()) {
    Fail(ErrorCode::kAlphabetMismatch, "identity channel needs |Z| >= |X|");
  }
  std::vector<double> rows(input.size() * output.size(), 0.0);
  for (std::size_t x = 0; x < input.size(); ++x) rows[x * output.size() + x] = 1.0;
  return Make(input, std::move(output), std::move(rows));
}

Channel Channel::Uniform(const Alphabet& input, Alphabet output) {
  std::vector<double> rows(input.size() * output.size(), 1.0 / static_cast<double>(output.size()));
  return Make(input, std::move(output), std::move(rows));
}

Channel Channel::Constant(const Alphabet& input, Alphabet output) {
  std::vector<double> rows(input.size() * output.size(), 0.0);
  for (std::size_t x = 0; x < input.size(); ++x) rows[x * output.size()] = 1.0;
  return Make(input, std::move(output), std::move(rows));
}

Channel Channel::Bsc(double crossover, const Alphabet& input, Alphabet output) {
  if (input.size() != 2 || output.size() != 2) {
    Fail(ErrorCode::kAlphabetMismatch, "BSC needs binary alphabets");
  }
  if (!(crossover >= 0.0 && crossover <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "BSC crossover outside [0,1]");
  }
  return Make(input, std::move(output),
              {1.0 - crossover, crossover, crossover, 1.0 - crossover});
}

JointPmf Marginalize(const JointPmf& j, const std::vector<std::string>& keep) {
  if (keep.empty()) Fail(ErrorCode::kInvalidArgument, "marginalize: empty variable set");
  std::vector<char> kept(j.num_variables(), 0);
  for (std::size_t v : Resolve(j, keep)) kept[v] = 1;
  std::vector<std::size_t> vars;
  std::vector<Alphabet> alphabets;
  for (std::size_t v = 0; v < j.num_variables(); ++v) {
    if (kept[v]) {
      vars.push_back(v);
      alphabets.push_back(j.variables()[v]);
    }
  }
  std::size_t cells = 1;
  for (const auto& a : alphabets) cells *= a.size();
  std::vector<double> probs(cells, 0.0);
  for (std::size_t f = 0; f < j.size(); ++f) probs[SubIndex(j, f, vars)] += j.prob(f);
  return PmfAccess::Build(std::move(alphabets), std::move(probs));
}

Channel Condition(const JointPmf& j, const std::vector<std::string>& target,
                  const std::vector<std::string>& given) {
  const auto tv = Resolve(j, target);
  const auto gv = Resolve(j, given);
  if (tv.empty()) Fail(ErrorCode::kInvalidArgument, "condition: empty target");
  for (std::size_t t : tv) {
    if (std::find(gv.begin(), gv.end(), t) != gv.end()) {
      Fail(ErrorCode::kInvalidArgument, "condition: target and given overlap");
    }
  }
  Alphabet out = ProductAlphabet(j, tv);
  Alphabet in = gv.empty() ? Alphabet("", {"*"}) : ProductAlphabet(j, gv);
  std::vector<double> rows(in.size() * out.size(), 0.0);
  std::vector<double> given_mass(in.size(), 0.0);
  for (std::size_t f = 0; f < j.size(); ++f) {
    const std::size_t g = SubIndex(j, f, gv);
    rows[g * out.size() + SubIndex(j, f, tv)] += j.prob(f);
    given_mass[g] += j.prob(f);
  }
  if (std::all_of(given_mass.begin(), given_mass.end(), [](double m) { return m <= 0.0; })) {
    Fail(ErrorCode::kAllMassZero, "condition: conditioning marginal is identically zero");
  }
  std::vector<char> defined(in.size(), 0);
  for (std::size_t g = 0; g < in.size(); ++g) {
    if (given_mass[g] <= 0.0) continue;
    defined[g] = 1;
    for (std::size_t t = 0; t < out.size(); ++t) rows[g * out.size() + t] /= given_mass[g];
  }
  return Channel(std::move(in), std::move(out), std::move(rows), std::move(defined));
}

JointPmf ComposeWithTestChannels(const JointPmf& source, const std::vector<std::string>& terminals,
                                 const std::vector<Channel>& channels) {
  if (terminals.size() != channels.size()) {
    Fail(ErrorCode::kInvalidArgument, "one test channel per terminal is required");
  }
  const auto xv = Resolve(source, terminals);
  std::vector<Alphabet> alphabets = source.variables();
  std::size_t aux_cells = 1;
  for (std::size_t m = 0; m < channels.size(); ++m) {
    const Alphabet& xa = source.variables()[xv[m]];
    if (!channels[m].input().SameSymbols(xa)) {
      Fail(ErrorCode::kAlphabetMismatch,
           "channel " + std::to_string(m + 1) + " input does not match '" + xa.name() + "'");
    }
    alphabets.push_back(channels[m].output());
    aux_cells *= channels[m].output().size();
  }
  std::vector<double> probs(source.size() * aux_cells, 0.0);
  std::vector<std::size_t> zdigits(channels.size(), 0);
  for (std::size_t f = 0; f < source.size(); ++f) {
    const double p = source.prob(f);
    if (p == 0.0) continue;
    for (std::size_t a = 0; a < aux_cells; ++a) {
      std::size_t rest = a;
      double q = p;
      for (std::size_t m = channels.size(); m-- > 0;) {
        const std::size_t zs = channels[m].output().size();
        q *= channels[m](source.Digit(f, xv[m]), rest % zs);
        rest /= zs;
      }
      probs[f * aux_cells + a] = q;
    }
  }
  JointPmf out = PmfAccess::Build(std::move(alphabets), std::move(probs));
  std::set<std::string> names;
  for (const auto& a : out.variables()) {
    if (!names.insert(a.name()).second) {
      Fail(ErrorCode::kInvalidArgument, "composed variable name '" + a.name() + "' collides");
    }
  }
  return out;
}

JointPmf Product(const JointPmf& a, const JointPmf& b) {
  std::vector<Alphabet> alphabets = a.variables();
  alphabets.insert(alphabets.end(), b.variables().begin(), b.variables().end());
  std::vector<double> probs(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) probs[i * b.size() + k] = a.prob(i) * b.prob(k);
  }
  return JointPmf::Make(std::move(alphabets), std::move(probs));
}

JointPmf Bernoulli(double q, const std::string& name) {
  return JointPmf::Make({Alphabet(name, {"0", "1"})}, {1.0 - q, q});
}

JointPmf Dsbs(double p, const std::string& x1, const std::string& x2) {
  return JointPmf::Make({Alphabet(x1, {"0", "1"}), Alphabet(x2, {"0", "1"})},
                        {(1.0 - p) / 2, p / 2, p / 2, (1.0 - p) / 2});
}

}  // namespace mtrd
