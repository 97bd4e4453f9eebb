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

#include <cmath>
#include <map>

#include "doctest.h"
#include "mtrd/codec.hpp"
#include "mtrd/error.hpp"
#include "oracles.hpp"

namespace mtrd {
namespace {

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

// Averaged over `codebooks` independent codebooks.
double EncoderFailureRate(const Channel& ch, double q, int n, double gamma2, int samples,
                          int codebooks = 1) {
  const std::vector<double> px{1 - q, q};
  Rng rng(9);
  int failures = 0;
  std::vector<std::uint8_t> x(static_cast<std::size_t>(n));
  for (int c = 0; c < codebooks; ++c) {
    const auto cb = BuildQuantizer(0, ch, px, n, gamma2, 42 + static_cast<std::uint64_t>(c));
    for (int s = 0; s < samples; ++s) {
      for (auto& v : x) v = rng.Uniform() < q ? 1 : 0;
      failures += !cb.Encode(x).ok;
    }
  }
  return static_cast<double>(failures) / (samples * codebooks);
}

// Ensemble failure probability of the threshold encoder for a BSC(p) test
// channel on a fair coin: Z is uniform, a codeword qualifies iff it lies
// within Hamming distance k* of x, and the |C| codewords are independent.
double BscEnsembleFailure(double p, int n, double gamma2) {
  const double info = std::log(2.0) - oracle::Hb(p);
  const double size = std::ceil(std::exp(n * (info + gamma2)));
  double cover = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double density = (k * std::log(2 * p) + (n - k) * std::log(2 * (1 - p))) / n;
    if (density < info - gamma2) continue;
    cover += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) -
                      n * std::log(2.0));
  }
  return std::pow(1.0 - cover, size);
}

CodecConfig SwConfig(int n, double slack, int trials) {
  const auto src = Dsbs(0.11);
  CodecConfig c;
  c.n = n;
  c.rates = {oracle::Hb(0.11) + slack, std::log(2.0) + slack};
  c.slacks = {0.05, 0.15, 0.2, 0.2};
  c.enforce_slack_relation = false;
  c.channels = {Channel::Identity(src.alphabet("X1"), Alphabet::Indexed("Z1", 2)),
                Channel::Identity(src.alphabet("X2"), Alphabet::Indexed("Z2", 2))};
  c.trials = trials;
  c.seed = 5;
  return c;
}

TEST_CASE("size formulas") {
  CHECK(BinCount(10, 0.0, 0.1) == 3);
  CHECK(BinCount(8, 1.0, 0.1) == static_cast<std::uint64_t>(std::ceil(std::exp(8.8))));
  CHECK(BinCount(24, 5.0, 0.1) == std::uint64_t{1} << 62);
  CHECK(CodebookSize(4, std::log(2.0), 0.1) == static_cast<std::size_t>(std::ceil(std::exp(4 * (std::log(2.0) + 0.1)))));
  CHECK(CodeOf([] { CodebookSize(24, std::log(2.0), 0.1); }) == ErrorCode::kBudgetExceeded);
  CHECK(WilsonHalfwidth(0, 100) > 0.0);
  CHECK(WilsonHalfwidth(50, 100) == doctest::Approx(0.0962).epsilon(1e-3));
}

TEST_CASE("identity quantizer") {
  const Alphabet x("X", {"0", "1"});
  const auto ch = Channel::Identity(x, Alphabet::Indexed("Z", 2));
  const std::vector<double> px{0.5, 0.5};
  const auto cb = BuildQuantizer(0, ch, px, 10, 0.1, 3);
  CHECK(cb.mutual_info() == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(cb.size() == static_cast<std::size_t>(std::ceil(std::exp(10 * (cb.mutual_info() + 0.1)))));

  // Brute-force liveness and multiplicity.
  std::map<std::vector<std::uint8_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < cb.size(); ++i) {
    groups[std::vector<std::uint8_t>(cb.word(i).begin(), cb.word(i).end())].push_back(i);
  }
  for (const auto& [w, idx] : groups) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      CHECK(cb.live(idx[k]) == (k == 0));
      CHECK(cb.multiplicity(idx[k]) == idx.size());
    }
  }
  Rng rng(1);
  std::vector<std::uint8_t> seq(10);
  for (int s = 0; s < 200; ++s) {
    for (auto& v : seq) v = static_cast<std::uint8_t>(rng.Below(2));
    const auto e = cb.Encode(seq);
    const auto it = groups.find(seq);
    CHECK(e.ok == (it != groups.end()));
    if (e.ok) CHECK(e.index == it->second.front());
  }
  CHECK(EncoderFailureRate(ch, 0.5, 8, 0.05, 4000) > EncoderFailureRate(ch, 0.5, 12, 0.3, 4000));
}

TEST_CASE("BSC quantizer covering behavior") {
  const Alphabet x("X", {"0", "1"});
  const auto ch = Channel::Bsc(0.2, x, Alphabet::Indexed("Z", 2));
  const double f8 = EncoderFailureRate(ch, 0.5, 8, 0.05, 500, 20);
  const double f12 = EncoderFailureRate(ch, 0.5, 12, 0.05, 500, 20);
  const double f16 = EncoderFailureRate(ch, 0.5, 16, 0.05, 500, 20);
  CHECK(std::abs(f8 - BscEnsembleFailure(0.2, 8, 0.05)) < 0.03);
  CHECK(std::abs(f12 - BscEnsembleFailure(0.2, 12, 0.05)) < 0.03);
  CHECK(std::abs(f16 - BscEnsembleFailure(0.2, 16, 0.05)) < 0.03);
  CHECK(f12 < f8);
  CHECK(f16 < f12);
  CHECK(EncoderFailureRate(ch, 0.5, 12, 0.5, 10000) < 0.01);
}

TEST_CASE("bin assignment") {
  const Alphabet x("X", {"0", "1"});
  const auto ch = Channel::Identity(x, Alphabet::Indexed("Z", 2));
  const std::vector<double> px{0.5, 0.5};
  const auto cb = BuildQuantizer(0, ch, px, 14, 0.01, 8);
  REQUIRE(cb.size() >= 10000);
  const double rate = std::log(15.5) / 14 - 0.1;
  const auto bins = AssignBins(cb, rate, 0.1, 77);
  REQUIRE(bins.bins() == 16);
  std::vector<double> count(16, 0.0);
  for (std::size_t i = 0; i < cb.size(); ++i) {
    REQUIRE(bins.bin(i) < 16);
    count[bins.bin(i)] += 1;
  }
  const double expect = static_cast<double>(cb.size()) / 16;
  double chi2 = 0.0;
  for (double c : count) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(chi2 < 37.697);  // chi-square(15) 99.9% quantile

  const auto again = AssignBins(cb, rate, 0.1, 77);
  CHECK(again.assignment() == bins.assignment());
  std::size_t live = 0;
  for (std::uint64_t b = 0; b < 16; ++b) {
    for (std::size_t i : bins.LiveIn(b)) {
      CHECK(bins.bin(i) == b);
      CHECK(cb.live(i));
      ++live;
    }
  }
  std::size_t expect_live = 0;
  for (std::size_t i = 0; i < cb.size(); ++i) expect_live += cb.live(i);
  CHECK(live == expect_live);
  CHECK(CodeOf([&] { AssignBins(cb, -0.1, 0.1, 1); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("decoder outcomes") {
  const auto model = SourceModel::MakeIid(Bernoulli(0.5));
  const auto measures = HammingMeasures(model.letters());
  CodecConfig c;
  c.n = 8;
  c.slacks = {0.7, 0.1, 0.1, 0.1};
  c.channels = {Channel::Identity(model.letters()[0], Alphabet::Indexed("Z1", 2))};
  c.seed = 3;
  SUBCASE("one live codeword per bin decodes uniquely") {
    c.rates = {3.0};
    const BinningScheme s(model, c, measures, {0.0});
    const auto& cb = s.codebook(0);
    for (std::size_t i = 0; i < cb.size(); ++i) {
      if (!cb.live(i) || s.bins(0).LiveIn(s.bins(0).bin(i)).size() != 1) continue;
      const auto r = s.Decode({}, {s.bins(0).bin(i)});
      CHECK(r.status == TrialOutcome::Decode::kSuccess);
      CHECK(r.indices == std::vector<std::size_t>{i});
      CHECK(s.InT2({}, r.indices));
    }
  }
  SUBCASE("a single bin holding several typical words fails as multiple") {
    c.rates = {0.0};
    c.slacks.gamma1 = 0.01;
    c.enforce_slack_relation = false;
    const BinningScheme s(model, c, measures, {0.0});
    REQUIRE(s.bins(0).bins() == 2);
    const auto r = s.Decode({}, {0});
    CHECK(r.status == TrialOutcome::Decode::kMultiple);
    c.tuple_cap = 3;
    const BinningScheme capped(model, c, measures, {0.0});
    CHECK(CodeOf([&] { capped.Decode({}, {0}); }) == ErrorCode::kBudgetExceeded);
  }
}

TEST_CASE("configuration errors") {
  const auto model = SourceModel::MakeIid(Bernoulli(0.5));
  const auto measures = HammingMeasures(model.letters());
  CodecConfig c;
  c.n = 8;
  c.rates = {1.0};
  c.channels = {Channel::Identity(model.letters()[0], Alphabet::Indexed("Z1", 2))};
  c.slacks = {0.05, 0.015, 0.015, 0.015};
  CHECK(CodeOf([&] { BinningScheme(model, c, measures, {0.0}); }) == ErrorCode::kInvalidArgument);
  c.slacks = {};
  c.n = 30;
  CHECK(CodeOf([&] { BinningScheme(model, c, measures, {0.0}); }) == ErrorCode::kInvalidArgument);
  c.n = 22;
  c.slacks = {0.6, 0.09, 0.09, 0.09};
  CHECK(CodeOf([&] { BinningScheme(model, c, measures, {0.0}); }) == ErrorCode::kBudgetExceeded);
  std::map<int, JointPmf> tables;
  tables.emplace(1, Bernoulli(0.5));
  const auto expl = SourceModel::MakeExplicit({Alphabet("X", {"0", "1"})}, tables);
  c.n = 8;
  CHECK(CodeOf([&] { BinningScheme(expl, c, measures, {0.0}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("experiment invariants") {
  const auto model = SourceModel::MakeIid(Dsbs(0.11));
  const auto measures = HammingMeasures(model.letters());
  const auto config = SwConfig(10, 0.15, 400);
  const BinningScheme scheme(model, config, measures, {0.0, 0.0});
  int success = 0, failures = 0;
  for (int t = 0; t < config.trials; ++t) {
    const auto o = scheme.RunTrial(static_cast<std::uint64_t>(t));
    if (o.error) CHECK((o.quantizer_failure || o.t1_violation || o.t2_violation ||
                        o.decode != TrialOutcome::Decode::kSuccess));
    if (o.decode == TrialOutcome::Decode::kSuccess) {
      ++success;
      if (!o.quantizer_failure && !o.t2_violation) {
        for (double d : o.distortion) CHECK(d == 0.0);
      }
    } else {
      ++failures;
    }
  }
  const auto stats = RunExperiment(model, config, measures, {0.0, 0.0});
  CHECK(stats.successes == success);
  CHECK(stats.decode_failures + stats.successes == stats.trials);
  CHECK(stats.decode_failures == failures);
  CHECK(stats.errors <= stats.quantizer_failures + stats.t1_violations + stats.t2_violations +
                            stats.decode_failures);
  CHECK(stats.p_error >= 0.0);
  CHECK(stats.p_error <= 1.0);
}

TEST_CASE("experiments are reproducible and match the serial reference") {
  const auto model = SourceModel::MakeIid(Dsbs(0.11));
  const auto measures = HammingMeasures(model.letters());
  const auto config = SwConfig(10, 0.15, 300);
  const auto a = RunExperiment(model, config, measures, {0.0, 0.0});
  const auto b = RunExperiment(model, config, measures, {0.0, 0.0});
  const auto c = RunExperimentSerial(model, config, measures, {0.0, 0.0});
  for (const auto* s : {&b, &c}) {
    CHECK(a.errors == s->errors);
    CHECK(a.p_error == s->p_error);
    CHECK(a.decode_zero == s->decode_zero);
    CHECK(a.decode_multiple == s->decode_multiple);
    CHECK(a.quantizer_failures == s->quantizer_failures);
    CHECK(a.mean_distortion == s->mean_distortion);
  }
}

TEST_CASE("no distortion constraint means no errors") {
  const auto model = SourceModel::MakeIid(Dsbs(0.11));
  const auto measures = HammingMeasures(model.letters());
  auto config = SwConfig(8, -0.3, 200);
  const double inf = std::numeric_limits<double>::infinity();
  const auto s = RunExperiment(model, config, measures, {inf, inf});
  CHECK(s.p_error == 0.0);
  CHECK(s.decode_failures > 0);
}

TEST_CASE("extra rate does not increase decode failures") {
  const auto model = SourceModel::MakeIid(Dsbs(0.11));
  const auto measures = HammingMeasures(model.letters());
  for (int n : {8, 12}) {
    const auto base = RunExperiment(model, SwConfig(n, 0.0, 600), measures, {0.0, 0.0});
    const auto more = RunExperiment(model, SwConfig(n, 0.1, 600), measures, {0.0, 0.0});
    const double p0 = static_cast<double>(base.decode_failures) / base.trials;
    const double p1 = static_cast<double>(more.decode_failures) / more.trials;
    CHECK(p1 <= p0 + WilsonHalfwidth(more.decode_failures, more.trials));
  }
}

TEST_CASE("side information at the decoder") {
  const auto model = SourceModel::MakeIid(Dsbs(0.11, "X", "S"), "S");
  const auto measures = HammingMeasures({model.letters()[0]});
  CodecConfig c;
  c.n = 12;
  c.rates = {oracle::Hb(0.11) + 0.15};
  c.slacks = {0.05, 0.15, 0.2, 0.2};
  c.enforce_slack_relation = false;
  c.channels = {Channel::Identity(model.letters()[0], Alphabet::Indexed("Z1", 2))};
  c.trials = 500;
  const auto s = RunExperiment(model, c, measures, {0.0});
  CHECK(s.p_error < 0.4);
  c.rates = {0.0};
  const auto starved = RunExperiment(model, c, measures, {0.0});
  CHECK(starved.p_error > s.p_error);
}

TEST_CASE("mixed source uses the mixture letter law") {
  const auto a = SourceModel::MakeIid(Bernoulli(0.1));
  const auto b = SourceModel::MakeIid(Bernoulli(0.4));
  const auto model = SourceModel::MakeMixed(0.5, a, b);
  CodecConfig c;
  c.n = 8;
  c.rates = {1.0};
  c.slacks = {0.05, 0.15, 0.2, 0.2};
  c.enforce_slack_relation = false;
  c.channels = {Channel::Identity(model.letters()[0], Alphabet::Indexed("Z1", 2))};
  c.trials = 100;
  const BinningScheme s(model, c, HammingMeasures(model.letters()), {0.0});
  CHECK(s.codebook(0).z_marginal()[1] == doctest::Approx(0.25).epsilon(1e-14));
  const auto stats = RunExperiment(model, c, HammingMeasures(model.letters()), {0.0});
  CHECK(stats.trials == 100);
}

}  // namespace
}  // namespace mtrd
