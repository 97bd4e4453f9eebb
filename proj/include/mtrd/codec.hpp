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

#ifndef MTRD_CODEC_HPP_
#define MTRD_CODEC_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mtrd/region.hpp"
#include "mtrd/source_model.hpp"

namespace mtrd {

inline constexpr int kMaxBlocklength = 24;
inline constexpr std::size_t kMaxCodebookWords = std::size_t{1} << 20;
inline constexpr std::size_t kDefaultTupleCap = 1'000'000;
inline constexpr double kWilsonZ = 1.959963984540054;

struct Slacks {
  double gamma1 = 0.12;
  double gamma2 = 0.015;
  double gamma3 = 0.015;
  double gamma4 = 0.015;
};

// ceil(e^{n(info + gamma2)}). Errors: BudgetExceeded above max_words.
std::size_t CodebookSize(int n, double info, double gamma2,
                         std::size_t max_words = kMaxCodebookWords);
// ceil(e^{n(rate + gamma1)}), saturating at 2^62.
std::uint64_t BinCount(int n, double rate, double gamma1);

// Random quantizer codebook for one terminal with its threshold encoder.
class Codebook {
 public:
  struct Encoding {
    std::size_t index = 0;
    bool ok = false;  // false: no codeword cleared the threshold
  };

  std::size_t terminal() const { return terminal_; }
  int n() const { return n_; }
  std::size_t size() const { return size_; }
  std::span<const std::uint8_t> word(std::size_t i) const {
    return {words_.data() + i * static_cast<std::size_t>(n_), static_cast<std::size_t>(n_)};
  }
  // First occurrence of its word in index order.
  bool live(std::size_t i) const { return live_[i] != 0; }
  std::size_t multiplicity(std::size_t i) const { return mult_[i]; }
  double mutual_info() const { return info_; }
  double threshold() const { return threshold_; }
  const std::vector<double>& z_marginal() const { return pz_; }

  // First codeword whose density (1/n) ln P(z|x)/P(z) reaches the
  // threshold; otherwise the first codeword of maximal density.
  Encoding Encode(std::span<const std::uint8_t> x) const;

 private:
  friend Codebook BuildQuantizer(std::size_t, const Channel&, std::span<const double>, int,
                                 double, std::uint64_t, std::size_t);
  Codebook() = default;

  double Density(std::span<const std::uint8_t> x, std::size_t i, double floor) const;

  std::size_t terminal_ = 0;
  int n_ = 0;
  std::size_t size_ = 0;
  std::size_t nz_ = 0;
  std::vector<std::uint8_t> words_;
  std::vector<char> live_;
  std::vector<std::size_t> mult_;
  std::vector<double> pz_;
  std::vector<double> llr_;  // [x * nz + z] = ln P(z|x) - ln P(z)
  std::vector<double> best_llr_;
  double info_ = 0.0;
  double threshold_ = 0.0;
};

// px is the marginal of the terminal's source letter.
// Errors: InvalidArgument (n outside [1, 24]), BudgetExceeded.
Codebook BuildQuantizer(std::size_t terminal, const Channel& channel, std::span<const double> px,
                        int n, double gamma2, std::uint64_t seed,
                        std::size_t max_words = kMaxCodebookWords);

class BinMap {
 public:
  std::size_t terminal() const { return terminal_; }
  std::uint64_t bins() const { return bins_; }
  std::uint64_t bin(std::size_t index) const { return assignment_[index]; }
  const std::vector<std::uint64_t>& assignment() const { return assignment_; }
  // Live codeword indices in a bin, ascending.
  std::vector<std::size_t> LiveIn(std::uint64_t b) const;

 private:
  friend BinMap AssignBins(const Codebook&, double, double, std::uint64_t);
  BinMap() = default;

  std::size_t terminal_ = 0;
  std::uint64_t bins_ = 0;
  std::vector<std::uint64_t> assignment_;
  std::vector<std::pair<std::uint64_t, std::size_t>> live_sorted_;
};

// Bins are 0-based. Errors: InvalidArgument (negative rate).
BinMap AssignBins(const Codebook& codebook, double rate, double gamma1, std::uint64_t seed);

struct Thresholds {
  std::vector<double> sup_cutoff;       // per terminal: I(X_m;Z_m) + 2 gamma2
  std::vector<double> multi_cutoff;     // by subset mask - 1: MultiInfo(Z_B) - gamma3
  std::vector<double> coupling_cutoff;  // by subset mask - 1: I(Z_B; S,Z_Bc) - gamma4
  std::vector<double> distortion_cutoff;  // D_k + gamma1
};

struct CodecConfig {
  int n = 8;
  std::vector<double> rates;
  Slacks slacks;
  // Require gamma2 = gamma3 = gamma4 < gamma1 / 6.
  bool enforce_slack_relation = true;
  std::vector<Channel> channels;
  std::optional<ReconMap> recon;  // empty: optimal recon for the model
  int trials = 1;
  std::uint64_t seed = 1;
  std::size_t tuple_cap = kDefaultTupleCap;
  std::size_t max_codebook = kMaxCodebookWords;
};

struct ErrorStats {
  int n = 0;
  int trials = 0;
  int errors = 0;
  double p_error = 0.0;
  double ci_halfwidth = 0.0;
  int successes = 0;
  int decode_failures = 0;
  int decode_zero = 0;
  int decode_multiple = 0;
  int quantizer_failures = 0;
  int t1_violations = 0;
  int t2_violations = 0;
  std::vector<double> mean_distortion;
  std::vector<double> max_distortion;
};

double WilsonHalfwidth(int successes, int trials);

struct TrialOutcome {
  bool error = false;
  bool quantizer_failure = false;
  bool t1_violation = false;
  bool t2_violation = false;
  enum class Decode { kSuccess, kNoCandidate, kMultiple } decode = Decode::kSuccess;
  std::vector<double> distortion;
};

struct DecodeResult {
  TrialOutcome::Decode status = TrialOutcome::Decode::kNoCandidate;
  std::vector<std::size_t> indices;
  std::size_t tuples_examined = 0;
};

// Codebooks, bins and thresholds for one blocklength. Mixed models use the
// mixture's single-letter law for codebooks and thresholds.
class BinningScheme {
 public:
  // Errors: InvalidArgument (inconsistent config, Explicit model,
  // non-additive measure, slack relation), BudgetExceeded.
  BinningScheme(const SourceModel& model, const CodecConfig& config,
                std::vector<DistortionMeasure> measures, std::vector<double> targets);

  const Codebook& codebook(std::size_t m) const { return codebooks_[m]; }
  const BinMap& bins(std::size_t m) const { return binmaps_[m]; }
  const Thresholds& thresholds() const { return thresholds_; }
  const ReconMap& recon() const { return recon_; }
  std::size_t num_terminals() const { return codebooks_.size(); }

  // Unique tuple of live codewords in the given bins inside T^(2).
  // `side` is the side-information sequence (empty without S).
  // Errors: BudgetExceeded (candidate tuples above the cap).
  DecodeResult Decode(std::span<const std::uint8_t> side,
                      const std::vector<std::uint64_t>& bin_indices) const;

  // Whether the codeword tuple satisfies every T^(2) inequality.
  bool InT2(std::span<const std::uint8_t> side, const std::vector<std::size_t>& indices) const;

  // Per-symbol average distortions of reconstructing from the tuple.
  std::vector<double> Distortion(const Block& block, const std::vector<std::size_t>& indices) const;

  TrialOutcome RunTrial(std::uint64_t trial) const;

 private:
  bool PassesSup(std::size_t m, std::size_t index) const;
  std::size_t Cell(std::span<const std::uint8_t> side, const std::vector<std::size_t>& indices,
                   int t) const;

  SourceModel model_;
  CodecConfig config_;
  std::vector<DistortionMeasure> measures_;
  std::vector<double> targets_;
  RegionLayout layout_;
  std::vector<std::size_t> x_pos_;
  std::optional<std::size_t> s_pos_;
  std::vector<std::size_t> zs_;
  std::size_t zc_ = 1;
  std::vector<Codebook> codebooks_;
  std::vector<BinMap> binmaps_;
  Thresholds thresholds_;
  ReconMap recon_;
  // Per-symbol densities by subset mask - 1, indexed by (s, z) cell.
  std::vector<std::vector<double>> multi_density_;
  std::vector<std::vector<double>> coupling_density_;
};

ErrorStats Aggregate(int n, const std::vector<TrialOutcome>& outcomes, std::size_t measures);

// Trials run in parallel with per-trial seeds; outcomes are reduced in
// trial order, so the result equals RunExperimentSerial bit for bit.
ErrorStats RunExperiment(const SourceModel& model, const CodecConfig& config,
                         const std::vector<DistortionMeasure>& measures,
                         const std::vector<double>& targets);
ErrorStats RunExperimentSerial(const SourceModel& model, const CodecConfig& config,
                               const std::vector<DistortionMeasure>& measures,
                               const std::vector<double>& targets);

}  // namespace mtrd

#endif  // MTRD_CODEC_HPP_
