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

#ifndef MTRD_JOINT_PMF_HPP_
#define MTRD_JOINT_PMF_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mtrd {

using VarSet = std::vector<std::string>;

// Tolerance under which an input table is silently renormalized. Larger
// deviations are treated as malformed input.
inline constexpr double kRenormalizeTolerance = 1e-9;

// A named finite alphabet. Symbol order is the declaration order and defines
// the index of every symbol in every table.
class Alphabet {
 public:
  Alphabet(std::string name, std::vector<std::string> symbols);

  // Alphabet with symbols "0", "1", ..., "size-1".
  static Alphabet Indexed(std::string name, std::size_t size);

  const std::string& name() const { return name_; }
  std::size_t size() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }
  const std::string& symbol(std::size_t i) const { return symbols_.at(i); }
  // Throws UnknownVariable if the label is not a symbol.
  std::size_t IndexOf(std::string_view label) const;

  Alphabet Renamed(std::string name) const { return Alphabet(std::move(name), symbols_); }

  bool SameSymbols(const Alphabet& other) const { return symbols_ == other.symbols_; }
  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::string name_;
  std::vector<std::string> symbols_;
};

// Exact joint probability mass function over an ordered list of named
// variables. The dense table is row-major with the first variable most
// significant. Immutable after construction.
class JointPmf {
 public:
  // Validates shape, nonnegativity and normalization.
  // Errors: ShapeMismatch, NegativeMass, SumNotOne, InvalidArgument.
  static JointPmf Make(std::vector<Alphabet> variables, std::vector<double> probs);

  const std::vector<Alphabet>& variables() const { return variables_; }
  std::size_t num_variables() const { return variables_.size(); }
  std::size_t size() const { return probs_.size(); }
  std::span<const double> probs() const { return probs_; }
  double prob(std::size_t flat) const { return probs_[flat]; }

  std::vector<std::string> names() const;
  bool Has(std::string_view name) const;
  // Position of a variable; throws UnknownVariable.
  std::size_t IndexOf(std::string_view name) const;
  const Alphabet& alphabet(std::string_view name) const { return variables_[IndexOf(name)]; }

  std::size_t stride(std::size_t var) const { return strides_[var]; }
  std::size_t Flatten(std::span<const std::size_t> index) const;
  void Unflatten(std::size_t flat, std::span<std::size_t> index) const;
  // Symbol of variable `var` in cell `flat`.
  std::size_t Digit(std::size_t flat, std::size_t var) const {
    return (flat / strides_[var]) % variables_[var].size();
  }

 private:
  JointPmf(std::vector<Alphabet> variables, std::vector<double> probs);

  std::vector<Alphabet> variables_;
  std::vector<std::size_t> strides_;
  std::vector<double> probs_;

  friend struct PmfAccess;
};

// Conditional pmf P(output | input). Rows whose conditioning symbol has zero
// probability are kept but marked undefined; their entries are zero.
class Channel {
 public:
  // Every row must be a pmf (renormalized within kRenormalizeTolerance).
  static Channel Make(Alphabet input, Alphabet output, std::vector<double> rows);
  // Z = X, embedding the input alphabet into a possibly larger output.
  static Channel Identity(const Alphabet& input, Alphabet output);
  // Output uniform regardless of input.
  static Channel Uniform(const Alphabet& input, Alphabet output);
  // All mass on output symbol 0.
  static Channel Constant(const Alphabet& input, Alphabet output);
  // Binary symmetric channel; both alphabets must be binary.
  static Channel Bsc(double crossover, const Alphabet& input, Alphabet output);

  const Alphabet& input() const { return input_; }
  const Alphabet& output() const { return output_; }
  double operator()(std::size_t x, std::size_t z) const { return rows_[x * output_.size() + z]; }
  std::span<const double> row(std::size_t x) const {
    return std::span<const double>(rows_).subspan(x * output_.size(), output_.size());
  }
  std::span<const double> table() const { return rows_; }
  bool defined(std::size_t x) const { return defined_[x] != 0; }

 private:
  Channel(Alphabet input, Alphabet output, std::vector<double> rows,
          std::vector<char> defined);

  Alphabet input_;
  Alphabet output_;
  std::vector<double> rows_;
  std::vector<char> defined_;

  friend Channel Condition(const JointPmf&, const std::vector<std::string>&,
                           const std::vector<std::string>&);
};

// Sums out every variable not in `keep`. The result keeps the variables in
// the order they appear in `j`. Errors: UnknownVariable, InvalidArgument
// (empty keep).
JointPmf Marginalize(const JointPmf& j, const std::vector<std::string>& keep);

// P(target | given) as a channel between product alphabets (labels joined
// with ','). Errors: UnknownVariable, InvalidArgument (overlap), AllMassZero.
Channel Condition(const JointPmf& j, const std::vector<std::string>& target,
                  const std::vector<std::string>& given);

// P(x_1..x_M, s) * prod_m P(z_m | x_m) over (source variables..., Z_1..Z_M).
// Z_m takes the name of channel m's output alphabet. Errors:
// AlphabetMismatch, UnknownVariable.
JointPmf ComposeWithTestChannels(const JointPmf& source,
                                 const std::vector<std::string>& terminals,
                                 const std::vector<Channel>& channels);

// Independent product P(a) P(b); variable names must be disjoint.
JointPmf Product(const JointPmf& a, const JointPmf& b);

// Common sources.
JointPmf Bernoulli(double q, const std::string& name = "X");
// Doubly symmetric binary source: uniform X1, X2 = X1 through BSC(p).
JointPmf Dsbs(double p, const std::string& x1 = "X1", const std::string& x2 = "X2");

}  // namespace mtrd

#endif  // MTRD_JOINT_PMF_HPP_
