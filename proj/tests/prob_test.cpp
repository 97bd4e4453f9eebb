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

#include "doctest.h"
#include "mtrd/error.hpp"
#include "mtrd/joint_pmf.hpp"
#include "mtrd/source_model.hpp"
#include "oracles.hpp"

namespace mtrd {
namespace {

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an mtrd::Error");
  return ErrorCode::kInvalidArgument;
}

const Alphabet kBit("b", {"0", "1"});

TEST_CASE("make_joint_pmf validates tables") {
  const auto pair = JointPmf::Make({kBit.Renamed("X1"), kBit.Renamed("X2")},
                                   {0.25, 0.25, 0.25, 0.25});
  CHECK(pair.size() == 4);
  CHECK(CodeOf([] { JointPmf::Make({kBit}, {0.5, 0.4}); }) == ErrorCode::kSumNotOne);
  CHECK(CodeOf([] { JointPmf::Make({kBit}, {1.1, -0.1}); }) == ErrorCode::kNegativeMass);
  CHECK(CodeOf([] { JointPmf::Make({kBit}, {0.2, 0.3, 0.5}); }) == ErrorCode::kShapeMismatch);

  SUBCASE("small rounding error is renormalized") {
    const auto j = JointPmf::Make({kBit}, {0.5 + 4e-10, 0.5});
    CHECK(j.prob(0) + j.prob(1) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("DSBS marginals are uniform") {
  const auto j = Dsbs(0.11);
  const std::vector<std::size_t> sizes{2, 2};
  const std::vector<double> table(j.probs().begin(), j.probs().end());
  for (std::size_t v : {0u, 1u}) {
    for (const auto& [k, p] : oracle::DirectMarginal(table, sizes, {v})) {
      CHECK(p == doctest::Approx(0.5).epsilon(1e-15));
    }
  }
  const auto m = Marginalize(j, {"X1"});
  CHECK(m.num_variables() == 1);
  CHECK(m.prob(0) == doctest::Approx(0.5));
  CHECK(m.prob(1) == doctest::Approx(0.5));
}

TEST_CASE("marginalize identities") {
  Rng rng(7);
  const auto j = oracle::RandomJoint(rng, {"A", "B", "C"}, {2, 3, 4});
  const auto same = Marginalize(j, {"A", "B", "C"});
  for (std::size_t f = 0; f < j.size(); ++f) CHECK(same.prob(f) == j.prob(f));

  // Order of `keep` does not matter; the result follows the joint's order.
  const auto ca = Marginalize(j, {"C", "A"});
  CHECK(ca.names() == VarSet{"A", "C"});

  SUBCASE("composition law") {
    const auto once = Marginalize(j, {"B"});
    const auto twice = Marginalize(Marginalize(j, {"B", "C"}), {"B"});
    for (std::size_t f = 0; f < once.size(); ++f) CHECK(std::abs(once.prob(f) - twice.prob(f)) < 1e-12);
  }
  SUBCASE("product marginal is exact") {
    const auto p = JointPmf::Make({Alphabet::Indexed("X", 3)}, {0.2, 0.3, 0.5});
    const auto q = JointPmf::Make({Alphabet::Indexed("Y", 2)}, {0.6, 0.4});
    const auto pq = Product(p, q);
    const auto back = Marginalize(pq, {"X"});
    for (std::size_t f = 0; f < 3; ++f) CHECK(back.prob(f) == doctest::Approx(p.prob(f)).epsilon(1e-15));
  }
  CHECK(CodeOf([&] { Marginalize(j, {"Q"}); }) == ErrorCode::kUnknownVariable);
}

TEST_CASE("condition") {
  SUBCASE("DSBS conditional is a BSC") {
    const auto c = Condition(Dsbs(0.11), {"X2"}, {"X1"});
    CHECK(c(0, 0) == doctest::Approx(0.89));
    CHECK(c(0, 1) == doctest::Approx(0.11));
    CHECK(c(1, 0) == doctest::Approx(0.11));
    CHECK(c(1, 1) == doctest::Approx(0.89));
  }
  SUBCASE("independence gives identical rows") {
    const auto p = JointPmf::Make({Alphabet::Indexed("X", 3)}, {0.2, 0.3, 0.5});
    const auto q = JointPmf::Make({Alphabet::Indexed("Y", 2)}, {0.6, 0.4});
    const auto c = Condition(Product(p, q), {"X"}, {"Y"});
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t x = 0; x < 3; ++x) CHECK(c(y, x) == doctest::Approx(p.prob(x)));
  }
  SUBCASE("zero-probability conditioning symbol is undefined, not NaN") {
    const auto j = JointPmf::Make({kBit.Renamed("X"), Alphabet::Indexed("Y", 3)},
                                  {0.2, 0.3, 0.0, 0.1, 0.4, 0.0});
    const auto c = Condition(j, {"X"}, {"Y"});
    CHECK(c.defined(0));
    CHECK(!c.defined(2));
    CHECK(c(2, 0) == 0.0);
    CHECK(c(2, 1) == 0.0);
  }
  SUBCASE("all-zero conditioning marginal is rejected") {
    // A valid joint cannot have an all-zero marginal, so this is reachable only
    // through an empty support, which Make already rejects.
    CHECK(CodeOf([] { JointPmf::Make({kBit}, {0.0, 0.0}); }) == ErrorCode::kSumNotOne);
  }
  CHECK(CodeOf([] { Condition(Dsbs(0.1), {"X1"}, {"X1"}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("compose with test channels") {
  const auto src = Dsbs(0.11);
  const Alphabet z1("Z1", {"0", "1"}), z2("Z2", {"0", "1"});

  SUBCASE("identity channels copy the source") {
    const auto j = ComposeWithTestChannels(
        src, {"X1", "X2"},
        {Channel::Identity(src.alphabet("X1"), z1), Channel::Identity(src.alphabet("X2"), z2)});
    std::vector<std::size_t> d(4);
    for (std::size_t f = 0; f < j.size(); ++f) {
      j.Unflatten(f, d);
      const double expect = (d[2] == d[0] && d[3] == d[1]) ? src.prob(d[0] * 2 + d[1]) : 0.0;
      CHECK(j.prob(f) == expect);
    }
  }
  SUBCASE("uniform channel decouples Z") {
    const auto x = Bernoulli(0.3);
    const auto j = ComposeWithTestChannels(x, {"X"},
                                           {Channel::Uniform(x.alphabet("X"), Alphabet::Indexed("Z", 3))});
    const auto c = Condition(j, {"Z"}, {"X"});
    for (std::size_t xx = 0; xx < 2; ++xx)
      for (std::size_t z = 0; z < 3; ++z) CHECK(c(xx, z) == doctest::Approx(1.0 / 3));
  }
  SUBCASE("full conditional factorizes cell by cell") {
    const auto c1 = Channel::Bsc(0.2, src.alphabet("X1"), z1);
    const auto c2 = Channel::Bsc(0.2, src.alphabet("X2"), z2);
    const auto j = ComposeWithTestChannels(src, {"X1", "X2"}, {c1, c2});
    const auto cond = Condition(j, {"Z1", "Z2"}, {"X1", "X2"});
    for (std::size_t x = 0; x < 4; ++x)
      for (std::size_t z = 0; z < 4; ++z) {
        const double expect = c1(x / 2, z / 2) * c2(x % 2, z % 2);
        CHECK(std::abs(cond(x, z) - expect) < 1e-12);
      }
  }
  SUBCASE("random sources with side information keep Z conditionally independent") {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
      const auto s = oracle::RandomJoint(rng, {"X1", "X2", "S"}, {2, 3, 2});
      const auto ch1 = oracle::RandomChannel(rng, s.alphabet("X1"), Alphabet::Indexed("Z1", 3));
      const auto ch2 = oracle::RandomChannel(rng, s.alphabet("X2"), Alphabet::Indexed("Z2", 2));
      const auto j = ComposeWithTestChannels(s, {"X1", "X2"}, {ch1, ch2});
      double total = 0.0;
      for (double p : j.probs()) total += p;
      CHECK(std::abs(total - 1.0) < 1e-12);
      const auto cond = Condition(j, {"Z1", "Z2"}, {"X1", "X2", "S"});
      for (std::size_t g = 0; g < 12; ++g) {
        const std::size_t x1 = g / 6, x2 = (g / 2) % 3;
        for (std::size_t z = 0; z < 6; ++z) {
          CHECK(std::abs(cond(g, z) - ch1(x1, z / 2) * ch2(x2, z % 2)) < 1e-12);
        }
      }
    }
  }
  CHECK(CodeOf([&] {
          ComposeWithTestChannels(src, {"X1"},
                                  {Channel::Identity(Alphabet::Indexed("X", 3), Alphabet::Indexed("Z", 3))});
        }) == ErrorCode::kAlphabetMismatch);
}

TEST_CASE("model_law") {
  SUBCASE("iid uniform") {
    const auto m = SourceModel::MakeIid(Bernoulli(0.5));
    const auto law = ModelLaw(m, 3);
    CHECK(law.Prob({{1, 0, 1}}) == doctest::Approx(0.125).epsilon(1e-15));
  }
  SUBCASE("iid Bern(0.11) direct product") {
    const auto law = ModelLaw(SourceModel::MakeIid(Bernoulli(0.11)), 4);
    const double expect = 0.11 * 0.11 * 0.89 * 0.89;
    CHECK(std::abs(law.Prob({{0, 1, 1, 0}}) - expect) < 1e-10 * expect);
  }
  SUBCASE("long sequences stay accurate in the log domain") {
    Rng rng(3);
    const auto base = oracle::RandomJoint(rng, {"X", "Y"}, {3, 2});
    const auto law = ModelLaw(SourceModel::MakeIid(base), 64);
    Block b(2, Sequence(64));
    double direct = 0.0;
    for (int t = 0; t < 64; ++t) {
      b[0][t] = static_cast<std::uint8_t>(rng.Below(3));
      b[1][t] = static_cast<std::uint8_t>(rng.Below(2));
      direct += std::log(base.prob(b[0][t] * 2 + b[1][t]));
    }
    CHECK(std::abs(law.LogProb(b) - direct) < 1e-10 * std::abs(direct));
  }
  SUBCASE("mixture is the convex combination") {
    const auto m = SourceModel::MakeMixed(0.5, SourceModel::MakeIid(Bernoulli(0.1)),
                                          SourceModel::MakeIid(Bernoulli(0.9)));
    CHECK(ModelLaw(m, 1).Prob({{1}}) == doctest::Approx(0.5).epsilon(1e-14));
    const auto m2 = SourceModel::MakeMixed(0.3, SourceModel::MakeIid(Bernoulli(0.2)),
                                           SourceModel::MakeIid(Bernoulli(0.6)));
    const Block b{{1, 0, 1}};
    const double pa = 0.2 * 0.8 * 0.2, pb = 0.6 * 0.4 * 0.6;
    CHECK(ModelLaw(m2, 3).Prob(b) == doctest::Approx(0.3 * pa + 0.7 * pb).epsilon(1e-13));
  }
  SUBCASE("explicit tables") {
    const Alphabet x("X", {"0", "1"});
    std::map<int, JointPmf> tables;
    tables.emplace(2, JointPmf::Make({Alphabet::Indexed("X", 4)}, {0.1, 0.2, 0.3, 0.4}));
    const auto m = SourceModel::MakeExplicit({x}, tables);
    CHECK(ModelLaw(m, 2).Prob({{1, 0}}) == doctest::Approx(0.3));
    CHECK(CodeOf([&] { ModelLaw(m, 3); }) == ErrorCode::kMissingBlocklength);
  }
  CHECK(CodeOf([] {
          SourceModel::MakeMixed(1.0, SourceModel::MakeIid(Bernoulli(0.1)),
                                 SourceModel::MakeIid(Bernoulli(0.2)));
        }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("sampling is reproducible and follows the law") {
  const auto m = SourceModel::MakeIid(Dsbs(0.11));
  Rng a(5), b(5);
  CHECK(SampleBlock(m, 16, a) == SampleBlock(m, 16, b));
  Rng rng(9);
  int disagree = 0, total = 0;
  for (int rep = 0; rep < 2000; ++rep) {
    const auto blk = SampleBlock(m, 8, rng);
    for (int t = 0; t < 8; ++t) disagree += blk[0][t] != blk[1][t];
    total += 8;
  }
  CHECK(static_cast<double>(disagree) / total == doctest::Approx(0.11).epsilon(0.1));
}

}  // namespace
}  // namespace mtrd
