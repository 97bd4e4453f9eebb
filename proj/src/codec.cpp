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

#include "mtrd/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mtrd/error.hpp"
#include "mtrd/info.hpp"
#include "mtrd/rng.hpp"

namespace mtrd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kCodebookTag = 0xc0de;
constexpr std::uint64_t kBinTag = 0xb1;
constexpr std::uint64_t kTrialTag = 0x7e57;

}  // namespace

std::size_t CodebookSize(int n, double info, double gamma2, std::size_t max_words) {
  const double v = n * (info + gamma2);
  if (v > std::log(static_cast<double>(max_words)) + 1e-12) {
    Fail(ErrorCode::kBudgetExceeded, "codebook of e^" + std::to_string(v) + " words exceeds the cap of " +
                                         std::to_string(max_words));
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::exp(v))));
}

std::uint64_t BinCount(int n, double rate, double gamma1) {
  const double v = n * (rate + gamma1);
  if (v >= 62.0 * std::log(2.0)) return std::uint64_t{1} << 62;
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(std::exp(v))));
}

double WilsonHalfwidth(int successes, int trials) {
  if (trials <= 0) return 0.0;
  const double n = trials, p = successes / n, z = kWilsonZ;
  return z / (1.0 + z * z / n) * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
}

// ---------------------------------------------------------------------------
// Quantizer.

Codebook BuildQuantizer(std::size_t terminal, const Channel& channel, std::span<const double> px,
                        int n, double gamma2, std::uint64_t seed, std::size_t max_words) {
  if (n < 1 || n > kMaxBlocklength) {
    Fail(ErrorCode::kInvalidArgument, "blocklength must lie in [1, " + std::to_string(kMaxBlocklength) + "]");
  }
  if (px.size() != channel.input().size()) {
    Fail(ErrorCode::kShapeMismatch, "source marginal does not match the channel input");
  }
  if (!(gamma2 > 0.0)) Fail(ErrorCode::kInvalidArgument, "gamma2 must be positive");
  const std::size_t nx = px.size(), nz = channel.output().size();
  if (nz > 255) Fail(ErrorCode::kInvalidArgument, "auxiliary alphabets are limited to 255 symbols");

  Codebook cb;
  cb.terminal_ = terminal;
  cb.n_ = n;
  cb.nz_ = nz;
  cb.pz_.assign(nz, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t z = 0; z < nz; ++z) cb.pz_[z] += px[x] * channel(x, z);
  }
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t z = 0; z < nz; ++z) {
      const double w = channel(x, z);
      if (px[x] > 0.0 && w > 0.0) cb.info_ += px[x] * w * std::log(w / cb.pz_[z]);
    }
  }
  cb.threshold_ = cb.info_ - gamma2;
  cb.size_ = CodebookSize(n, cb.info_, gamma2, max_words);

  cb.llr_.assign(nx * nz, -kInf);
  cb.best_llr_.assign(nx, -kInf);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t z = 0; z < nz; ++z) {
      const double w = channel(x, z);
      if (w > 0.0 && cb.pz_[z] > 0.0) cb.llr_[x * nz + z] = std::log(w) - std::log(cb.pz_[z]);
      cb.best_llr_[x] = std::max(cb.best_llr_[x], cb.llr_[x * nz + z]);
    }
  }

  std::vector<double> cdf(nz);
  std::partial_sum(cb.pz_.begin(), cb.pz_.end(), cdf.begin());
  Rng rng(seed);
  const std::size_t len = static_cast<std::size_t>(n);
  cb.words_.resize(cb.size_ * len);
  for (auto& s : cb.words_) s = static_cast<std::uint8_t>(rng.Categorical(cdf));

  std::vector<std::size_t> order(cb.size_);
  std::iota(order.begin(), order.end(), 0);
  const std::uint8_t* w = cb.words_.data();
  auto cmp = [&](std::size_t a, std::size_t b) {
    const int c = std::memcmp(w + a * len, w + b * len, len);
    return c != 0 ? c < 0 : a < b;
  };
  std::sort(order.begin(), order.end(), cmp);
  cb.live_.assign(cb.size_, 0);
  cb.mult_.assign(cb.size_, 0);
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && std::memcmp(w + order[i] * len, w + order[j] * len, len) == 0) ++j;
    cb.live_[order[i]] = 1;
    for (std::size_t k = i; k < j; ++k) cb.mult_[order[k]] = j - i;
    i = j;
  }
  return cb;
}

Codebook::Encoding Codebook::Encode(std::span<const std::uint8_t> x) const {
  const std::size_t len = static_cast<std::size_t>(n_);
  if (x.size() != len) Fail(ErrorCode::kShapeMismatch, "source sequence has the wrong length");
  std::vector<double> suffix(len + 1, 0.0);
  for (std::size_t t = len; t-- > 0;) suffix[t] = suffix[t + 1] + best_llr_[x[t]];
  const double target = n_ * threshold_;
  for (std::size_t i = 0; i < size_; ++i) {
    const std::uint8_t* z = words_.data() + i * len;
    double s = 0.0;
    std::size_t t = 0;
    for (; t < len; ++t) {
      s += llr_[x[t] * nz_ + z[t]];
      if (s + suffix[t + 1] < target) break;
    }
    if (t == len && s / n_ >= threshold_) return {i, true};
  }
  double best = -kInf;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < size_; ++i) {
    const std::uint8_t* z = words_.data() + i * len;
    double s = 0.0;
    std::size_t t = 0;
    for (; t < len; ++t) {
      s += llr_[x[t] * nz_ + z[t]];
      if (s == -kInf || s + suffix[t + 1] <= best) break;
    }
    if (t == len && s > best) {
      best = s;
      best_i = i;
    }
  }
  return {best_i, false};
}

// ---------------------------------------------------------------------------
// Bins.

BinMap AssignBins(const Codebook& codebook, double rate, double gamma1, std::uint64_t seed) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) Fail(ErrorCode::kInvalidArgument, "rates must be finite and >= 0");
  BinMap out;
  out.terminal_ = codebook.terminal();
  out.bins_ = BinCount(codebook.n(), rate, gamma1);
  Rng rng(seed);
  out.assignment_.resize(codebook.size());
  for (auto& b : out.assignment_) b = rng.Below(out.bins_);
  for (std::size_t i = 0; i < codebook.size(); ++i) {
    if (codebook.live(i)) out.live_sorted_.emplace_back(out.assignment_[i], i);
  }
  std::sort(out.live_sorted_.begin(), out.live_sorted_.end());
  return out;
}

std::vector<std::size_t> BinMap::LiveIn(std::uint64_t b) const {
  auto lo = std::lower_bound(live_sorted_.begin(), live_sorted_.end(),
                             std::pair<std::uint64_t, std::size_t>{b, 0});
  std::vector<std::size_t> out;
  for (; lo != live_sorted_.end() && lo->first == b; ++lo) out.push_back(lo->second);
  return out;
}

// ---------------------------------------------------------------------------
// Scheme.

BinningScheme::BinningScheme(const SourceModel& model, const CodecConfig& config,
                             std::vector<DistortionMeasure> measures, std::vector<double> targets)
    : model_(model),
      config_(config),
      measures_(std::move(measures)),
      targets_(std::move(targets)),
      layout_(LayoutOf(model)),
      recon_({}, {}, {0}) {
  if (model.is_explicit()) Fail(ErrorCode::kInvalidArgument, "binning needs a memoryless or mixed model");
  const std::size_t mc = layout_.num_terminals();
  const int n = config_.n;
  if (n < 1 || n > kMaxBlocklength) {
    Fail(ErrorCode::kInvalidArgument, "blocklength must lie in [1, " + std::to_string(kMaxBlocklength) + "]");
  }
  if (config_.trials < 1) Fail(ErrorCode::kInvalidArgument, "trials must be >= 1");
  if (config_.rates.size() != mc) Fail(ErrorCode::kInvalidArgument, "need one rate per terminal");
  if (config_.channels.size() != mc) Fail(ErrorCode::kInvalidArgument, "need one test channel per terminal");
  if (measures_.empty() || measures_.size() != targets_.size()) {
    Fail(ErrorCode::kInvalidArgument, "need one distortion target per measure");
  }
  for (const auto& d : measures_) {
    if (!d.additive) Fail(ErrorCode::kInvalidArgument, "only additive distortion measures are simulated");
  }
  const Slacks& g = config_.slacks;
  if (!(g.gamma1 > 0 && g.gamma2 > 0 && g.gamma3 > 0 && g.gamma4 > 0)) {
    Fail(ErrorCode::kInvalidArgument, "all slacks must be positive");
  }
  if (config_.enforce_slack_relation &&
      !(g.gamma2 == g.gamma3 && g.gamma3 == g.gamma4 && g.gamma2 < g.gamma1 / 6.0)) {
    Fail(ErrorCode::kInvalidArgument, "slacks must satisfy gamma2 = gamma3 = gamma4 < gamma1 / 6");
  }

  // Single-letter law of (X, S, Z) under the model's (mixture) letter law.
  JointPmf composed = ComposeForRegion(model.MemorylessComponents().front().second, layout_,
                                       config_.channels);
  {
    std::vector<double> probs(composed.size(), 0.0);
    for (const auto& [w, base] : model.MemorylessComponents()) {
      const auto c = ComposeForRegion(base, layout_, config_.channels);
      for (std::size_t f = 0; f < c.size(); ++f) probs[f] += w * c.prob(f);
    }
    composed = JointPmf::Make(composed.variables(), std::move(probs));
  }
  recon_ = config_.recon ? *config_.recon : OptimalRecon(composed, layout_, measures_);

  const auto names = model.names();
  for (const auto& t : layout_.terminals) {
    x_pos_.push_back(static_cast<std::size_t>(std::find(names.begin(), names.end(), t) - names.begin()));
  }
  if (layout_.side_info) {
    s_pos_ = static_cast<std::size_t>(std::find(names.begin(), names.end(), *layout_.side_info) -
                                      names.begin());
  }
  for (const auto& c : config_.channels) zs_.push_back(c.output().size());
  zc_ = 1;
  for (std::size_t z : zs_) zc_ *= z;
  const std::size_t ns = layout_.side_info ? composed.alphabet(*layout_.side_info).size() : 1;

  // Recon must be defined on (s, z) with matching sizes.
  {
    std::size_t expect = ns * zc_;
    if (recon_.size() != expect || recon_.outputs().size() != mc) {
      Fail(ErrorCode::kShapeMismatch, "reconstruction map does not match the test channels");
    }
    for (std::size_t m = 0; m < mc; ++m) {
      if (recon_.outputs()[m].size() != measures_.front().reproductions[m].size()) {
        Fail(ErrorCode::kShapeMismatch, "reconstruction outputs do not match the distortion measure");
      }
    }
  }

  for (std::size_t m = 0; m < mc; ++m) {
    const auto px = Marginalize(composed, {layout_.terminals[m]});
    codebooks_.push_back(BuildQuantizer(
        m, config_.channels[m], px.probs(), n, g.gamma2,
        DeriveSeed(config_.seed, {kCodebookTag, static_cast<std::uint64_t>(n), m}), config_.max_codebook));
    binmaps_.push_back(AssignBins(codebooks_.back(), config_.rates[m], g.gamma1,
                                  DeriveSeed(config_.seed, {kBinTag, static_cast<std::uint64_t>(n), m})));
  }

  const std::size_t full = (std::size_t{1} << mc) - 1;
  for (std::size_t m = 0; m < mc; ++m) {
    thresholds_.sup_cutoff.push_back(codebooks_[m].mutual_info() + 2.0 * g.gamma2);
  }
  VarSet sz;
  if (layout_.side_info) sz.push_back(*layout_.side_info);
  sz.insert(sz.end(), layout_.aux.begin(), layout_.aux.end());
  const JointPmf psz = Marginalize(composed, sz);
  const std::size_t off = layout_.side_info ? 1 : 0;

  for (std::size_t b = 1; b <= full; ++b) {
    VarSet zb, rest;
    if (layout_.side_info) rest.push_back(*layout_.side_info);
    std::vector<std::size_t> in_vars, rest_vars;
    if (layout_.side_info) rest_vars.push_back(0);
    for (std::size_t m = 0; m < mc; ++m) {
      if (b >> m & 1) {
        zb.push_back(layout_.aux[m]);
        in_vars.push_back(off + m);
      } else {
        rest.push_back(layout_.aux[m]);
        rest_vars.push_back(off + m);
      }
    }
    thresholds_.multi_cutoff.push_back(MultiInfo(composed, zb) - g.gamma3);
    thresholds_.coupling_cutoff.push_back(rest.empty() ? -kInf
                                                       : MutualInfo(composed, zb, rest) - g.gamma4);

    // Marginals keyed by digit tuples of psz.
    auto key = [&](std::size_t flat, const std::vector<std::size_t>& vars) {
      std::size_t k = 0;
      for (std::size_t v : vars) k = k * psz.variables()[v].size() + psz.Digit(flat, v);
      return k;
    };
    auto marginal = [&](const std::vector<std::size_t>& vars) {
      std::size_t cells = 1;
      for (std::size_t v : vars) cells *= psz.variables()[v].size();
      std::vector<double> out(cells, 0.0);
      for (std::size_t f = 0; f < psz.size(); ++f) out[key(f, vars)] += psz.prob(f);
      return out;
    };
    const auto p_in = marginal(in_vars);
    const auto p_rest = marginal(rest_vars);
    std::vector<std::vector<double>> p_single;
    for (std::size_t m = 0; m < mc; ++m) p_single.push_back(marginal({off + m}));

    std::vector<double> multi(psz.size()), coupling(psz.size());
    for (std::size_t f = 0; f < psz.size(); ++f) {
      const double p = psz.prob(f);
      if (p == 0.0) {
        multi[f] = coupling[f] = -kInf;
        continue;
      }
      const double lin = std::log(p_in[key(f, in_vars)]);
      double d = lin;
      for (std::size_t m = 0; m < mc; ++m) {
        if (b >> m & 1) d -= std::log(p_single[m][key(f, {off + m})]);
      }
      multi[f] = (b & (b - 1)) == 0 ? 0.0 : d;
      coupling[f] = rest.empty() ? 0.0 : std::log(p) - lin - std::log(p_rest[key(f, rest_vars)]);
    }
    multi_density_.push_back(std::move(multi));
    coupling_density_.push_back(std::move(coupling));
  }
  for (std::size_t k = 0; k < targets_.size(); ++k) {
    if (std::isnan(targets_[k]) || targets_[k] < 0) Fail(ErrorCode::kInvalidArgument, "targets must be >= 0");
    thresholds_.distortion_cutoff.push_back(targets_[k] + g.gamma1);
  }
}

bool BinningScheme::PassesSup(std::size_t m, std::size_t index) const {
  const auto& cb = codebooks_[m];
  const double v = -std::log(static_cast<double>(cb.multiplicity(index)) / static_cast<double>(cb.size())) /
                   config_.n;
  return v <= thresholds_.sup_cutoff[m];
}

std::size_t BinningScheme::Cell(std::span<const std::uint8_t> side,
                                const std::vector<std::size_t>& indices, int t) const {
  std::size_t c = side.empty() ? 0 : side[static_cast<std::size_t>(t)];
  for (std::size_t m = 0; m < indices.size(); ++m) {
    c = c * zs_[m] + codebooks_[m].word(indices[m])[static_cast<std::size_t>(t)];
  }
  return c;
}

bool BinningScheme::InT2(std::span<const std::uint8_t> side,
                         const std::vector<std::size_t>& indices) const {
  for (std::size_t m = 0; m < indices.size(); ++m) {
    if (!PassesSup(m, indices[m])) return false;
  }
  std::vector<std::size_t> cells(static_cast<std::size_t>(config_.n));
  for (int t = 0; t < config_.n; ++t) cells[static_cast<std::size_t>(t)] = Cell(side, indices, t);
  for (std::size_t b = 0; b < multi_density_.size(); ++b) {
    double multi = 0.0, coupling = 0.0;
    for (std::size_t c : cells) {
      multi += multi_density_[b][c];
      coupling += coupling_density_[b][c];
    }
    if (!(multi / config_.n >= thresholds_.multi_cutoff[b])) return false;
    if (!(coupling / config_.n >= thresholds_.coupling_cutoff[b])) return false;
  }
  return true;
}

DecodeResult BinningScheme::Decode(std::span<const std::uint8_t> side,
                                   const std::vector<std::uint64_t>& bin_indices) const {
  const std::size_t mc = num_terminals();
  std::vector<std::vector<std::size_t>> cand(mc);
  std::size_t tuples = 1;
  for (std::size_t m = 0; m < mc; ++m) {
    for (std::size_t i : binmaps_[m].LiveIn(bin_indices[m])) {
      if (PassesSup(m, i)) cand[m].push_back(i);
    }
    if (cand[m].empty()) return {TrialOutcome::Decode::kNoCandidate, {}, 0};
    if (tuples > config_.tuple_cap / cand[m].size()) {
      Fail(ErrorCode::kBudgetExceeded, "decoder would examine more than " +
                                           std::to_string(config_.tuple_cap) + " codeword tuples");
    }
    tuples *= cand[m].size();
  }
  DecodeResult out;
  std::vector<std::size_t> pos(mc, 0), tuple(mc);
  int survivors = 0;
  for (std::size_t k = 0; k < tuples; ++k) {
    for (std::size_t m = 0; m < mc; ++m) tuple[m] = cand[m][pos[m]];
    ++out.tuples_examined;
    if (InT2(side, tuple)) {
      if (++survivors == 1) out.indices = tuple;
      else break;
    }
    for (std::size_t m = mc; m-- > 0;) {
      if (++pos[m] < cand[m].size()) break;
      pos[m] = 0;
    }
  }
  if (survivors == 1) {
    out.status = TrialOutcome::Decode::kSuccess;
  } else {
    out.status = survivors == 0 ? TrialOutcome::Decode::kNoCandidate : TrialOutcome::Decode::kMultiple;
    out.indices.clear();
  }
  return out;
}

std::vector<double> BinningScheme::Distortion(const Block& block,
                                              const std::vector<std::size_t>& indices) const {
  const auto& xs = measures_.front().sources;
  std::span<const std::uint8_t> side;
  if (s_pos_) side = block[*s_pos_];
  std::vector<double> out(measures_.size(), 0.0);
  for (int t = 0; t < config_.n; ++t) {
    std::size_t x = 0;
    for (std::size_t m = 0; m < x_pos_.size(); ++m) {
      x = x * xs[m].size() + block[x_pos_[m]][static_cast<std::size_t>(t)];
    }
    const std::size_t y = recon_(Cell(side, indices, t));
    for (std::size_t k = 0; k < measures_.size(); ++k) out[k] += measures_[k](x, y);
  }
  for (auto& v : out) v /= config_.n;
  return out;
}

TrialOutcome BinningScheme::RunTrial(std::uint64_t trial) const {
  Rng rng(DeriveSeed(config_.seed, {kTrialTag, static_cast<std::uint64_t>(config_.n), trial}));
  const Block block = SampleBlock(model_, config_.n, rng);
  std::span<const std::uint8_t> side;
  if (s_pos_) side = block[*s_pos_];
  const std::size_t mc = num_terminals();
  TrialOutcome out;
  std::vector<std::size_t> z(mc);
  std::vector<std::uint64_t> bins(mc);
  for (std::size_t m = 0; m < mc; ++m) {
    const auto enc = codebooks_[m].Encode(block[x_pos_[m]]);
    out.quantizer_failure = out.quantizer_failure || !enc.ok;
    z[m] = enc.index;
    bins[m] = binmaps_[m].bin(z[m]);
  }
  out.t2_violation = !InT2(side, z);
  const auto& cut = thresholds_.distortion_cutoff;
  const auto truth = Distortion(block, z);
  for (std::size_t k = 0; k < truth.size(); ++k) out.t1_violation = out.t1_violation || truth[k] > cut[k];

  const DecodeResult dec = Decode(side, bins);
  out.decode = dec.status;
  if (dec.status == TrialOutcome::Decode::kSuccess) {
    for (std::size_t m = 0; m < mc; ++m) {
      if (binmaps_[m].bin(dec.indices[m]) != bins[m]) throw std::logic_error("decoded tuple left its bins");
    }
    if (!InT2(side, dec.indices)) throw std::logic_error("decoded tuple is not jointly typical");
    out.distortion = Distortion(block, dec.indices);
  } else {
    for (const auto& d : measures_) out.distortion.push_back(d.Max());
  }
  for (std::size_t k = 0; k < out.distortion.size(); ++k) {
    out.error = out.error || out.distortion[k] > cut[k];
  }
  return out;
}

ErrorStats Aggregate(int n, const std::vector<TrialOutcome>& outcomes, std::size_t measures) {
  ErrorStats s;
  s.n = n;
  s.trials = static_cast<int>(outcomes.size());
  s.mean_distortion.assign(measures, 0.0);
  s.max_distortion.assign(measures, 0.0);
  for (const auto& o : outcomes) {
    s.errors += o.error;
    s.quantizer_failures += o.quantizer_failure;
    s.t1_violations += o.t1_violation;
    s.t2_violations += o.t2_violation;
    switch (o.decode) {
      case TrialOutcome::Decode::kSuccess: ++s.successes; break;
      case TrialOutcome::Decode::kNoCandidate: ++s.decode_zero; break;
      case TrialOutcome::Decode::kMultiple: ++s.decode_multiple; break;
    }
    for (std::size_t k = 0; k < measures; ++k) {
      s.mean_distortion[k] += o.distortion[k];
      s.max_distortion[k] = std::max(s.max_distortion[k], o.distortion[k]);
    }
  }
  s.decode_failures = s.decode_zero + s.decode_multiple;
  if (s.trials > 0) {
    s.p_error = static_cast<double>(s.errors) / s.trials;
    for (auto& v : s.mean_distortion) v /= s.trials;
  }
  s.ci_halfwidth = WilsonHalfwidth(s.errors, s.trials);
  return s;
}

namespace {

ErrorStats Run(const SourceModel& model, const CodecConfig& config,
               const std::vector<DistortionMeasure>& measures, const std::vector<double>& targets,
               bool parallel) {
  const BinningScheme scheme(model, config, measures, targets);
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(config.trials));
  if (parallel) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 16)
    for (int t = 0; t < config.trials; ++t) {
      try {
        outcomes[static_cast<std::size_t>(t)] = scheme.RunTrial(static_cast<std::uint64_t>(t));
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (int t = 0; t < config.trials; ++t) {
      outcomes[static_cast<std::size_t>(t)] = scheme.RunTrial(static_cast<std::uint64_t>(t));
    }
  }
  return Aggregate(config.n, outcomes, measures.size());
}

}  // namespace

ErrorStats RunExperiment(const SourceModel& model, const CodecConfig& config,
                         const std::vector<DistortionMeasure>& measures,
                         const std::vector<double>& targets) {
  return Run(model, config, measures, targets, true);
}

ErrorStats RunExperimentSerial(const SourceModel& model, const CodecConfig& config,
                               const std::vector<DistortionMeasure>& measures,
                               const std::vector<double>& targets) {
  return Run(model, config, measures, targets, false);
}

}  // namespace mtrd
