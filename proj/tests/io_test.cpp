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
#include "mtrd/io.hpp"
#include "oracles.hpp"

namespace mtrd {
namespace {

using nlohmann::json;

std::string PointerOf(const json& doc) {
  try {
    ParseModel(doc);
  } catch (const InputError& e) {
    return e.pointer();
  }
  return "<none>";
}

json Dsbs011() {
  return json::parse(R"({
    "alphabets": [{"name": "X1", "symbols": ["0", "1"]}, {"name": "X2", "symbols": [0, 1]}],
    "kind": "iid", "joint": [0.445, 0.055, 0.055, 0.445]})");
}

TEST_CASE("model json round trip") {
  const auto model = ParseModel(Dsbs011());
  CHECK(model.is_iid());
  CHECK(model.terminals() == std::vector<std::string>{"X1", "X2"});
  const auto again = ParseModel(ModelToJson(model));
  CHECK(ModelToJson(again) == ModelToJson(model));

  const auto mixed = ParseModel(json::parse(R"({
    "alphabets": [{"name": "X1", "symbols": ["a", "b"]}], "kind": "mixed", "alpha": 0.25,
    "joint": [[0.9, 0.1], [0.6, 0.4]]})"));
  REQUIRE(mixed.is_mixed());
  CHECK(std::get<SourceModel::Mixed>(mixed.kind()).alpha == 0.25);
  CHECK(ModelToJson(ParseModel(ModelToJson(mixed))) == ModelToJson(mixed));

  const auto expl = ParseModel(json::parse(R"({
    "alphabets": [{"name": "X1", "symbols": ["0", "1"]}], "kind": "explicit",
    "joint": {"1": [0.5, 0.5], "2": [0.5, 0, 0, 0.5]}})"));
  CHECK(expl.is_explicit());
  CHECK(ModelToJson(ParseModel(ModelToJson(expl))) == ModelToJson(expl));
}

TEST_CASE("model errors carry pointers") {
  auto doc = Dsbs011();
  doc["joint"][2] = -0.1;
  CHECK(PointerOf(doc) == "/joint");
  doc = Dsbs011();
  doc["joint"][1] = "x";
  CHECK(PointerOf(doc) == "/joint/1");
  doc = Dsbs011();
  doc.erase("kind");
  CHECK(PointerOf(doc) == "/kind");
  doc = Dsbs011();
  doc["alphabets"][1]["name"] = "X1";
  CHECK(PointerOf(doc) == "/alphabets/1/name");
  doc = Dsbs011();
  doc["side_info"] = "Q";
  CHECK(PointerOf(doc) == "/side_info");
  doc = Dsbs011();
  doc["kind"] = "mixed";
  CHECK(PointerOf(doc) == "/alpha");
  doc["alpha"] = 0.5;
  CHECK(PointerOf(doc) == "/joint");
  doc = Dsbs011();
  doc["kind"] = "explicit";
  doc["joint"] = json::parse(R"({"two": [1]})");
  CHECK(PointerOf(doc) == "/joint/two");
  doc = Dsbs011();
  doc["joint"] = {0.5, 0.5};
  CHECK(PointerOf(doc) == "/joint");
}

TEST_CASE("distortion json") {
  const auto model = ParseModel(Dsbs011());
  const auto& xs = model.letters();
  const auto hamming = ParseDistortion(json("hamming"), xs);
  REQUIRE(hamming.size() == 2);
  const auto custom = ParseDistortion(json::parse(R"({"measures": [
      {"table": [0,1,1,1, 1,0,1,1, 1,1,0,1, 1,1,1,0], "additive": false},
      [0,0,1,1, 0,0,1,1, 1,1,0,0, 1,1,0,0]]})"), xs);
  REQUIRE(custom.size() == 2);
  CHECK_FALSE(custom[0].additive);
  CHECK(custom[1].additive);
  try {
    ParseDistortion(json::parse(R"({"measures": [[0, 1]]})"), xs);
    FAIL("short table accepted");
  } catch (const InputError& e) {
    CHECK(e.pointer() == "/measures/0");
  }
  try {
    ParseDistortion(json("euclid"), xs);
    FAIL("unknown name accepted");
  } catch (const InputError& e) {
    CHECK(e.code() == ErrorCode::kParseError);
  }
}

TEST_CASE("fixed formatting") {
  CHECK(FormatFixed(std::log(2.0)) == "0.693147181");
  CHECK(FormatFixed(-1e-15) == "0.000000000");
  CHECK(FormatFixed(1.0 / 0.0) == "inf");
  CHECK(FormatFixed(0.5, 3) == "0.500");
  CHECK(SubsetLabel(5, 3) == "1+3");
}

TEST_CASE("spectrum csv round trip") {
  const auto model = ParseModel(json::parse(
      R"({"alphabets": [{"name": "X1", "symbols": ["0", "1"]}], "kind": "iid", "joint": [0.89, 0.11]})"));
  const auto spectra = ComputeSpectra(model, {1, 5, 9}, EntropyDensity{{"X1"}});
  const auto text = SpectrumCsv(spectra);
  const auto back = ParseSpectrumCsv(text);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].n == spectra[i].n);
    REQUIRE(back[i].atoms.size() == spectra[i].atoms.size());
    for (std::size_t k = 0; k < back[i].atoms.size(); ++k) {
      CHECK(back[i].atoms[k].value == doctest::Approx(spectra[i].atoms[k].value).epsilon(1e-11));
      CHECK(back[i].atoms[k].mass == spectra[i].atoms[k].mass);
    }
  }
  CHECK(SpectrumCsv(back) == text);
  CHECK_THROWS_AS(ParseSpectrumCsv("n,value_nats,mass\n2,0.1,0.5\n1,0.2,0.5\n"), InputError);
  CHECK_THROWS_AS(ParseSpectrumCsv("a,b\n"), InputError);
  CHECK_THROWS_AS(ParseSpectrumCsv("n,value_nats,mass\n"), InputError);
}

TEST_CASE("frontier config replays to the same point") {
  const auto model = ParseModel(Dsbs011());
  const auto measures = HammingMeasures(model.letters());
  RegionOptions o;
  o.restarts = 6;
  o.seed = 3;
  const auto f = SearchRegion(model, measures, {0.05, 0.05}, o);
  const auto layout = LayoutOf(model);
  const json doc = json::parse(FrontierToJson(f, layout, {0.05, 0.05}).dump());
  REQUIRE(doc["points"].size() == f.points.size());
  const RegionEvaluator eval(model.MemorylessComponents(), layout, measures);
  for (std::size_t i = 0; i < f.points.size(); ++i) {
    const auto cfg = AuxConfigFromJson(doc["points"][i], model.letters(), "/points/" + std::to_string(i));
    const auto e = eval.Evaluate(cfg.channels);
    for (std::size_t a = 0; a < e.bounds.size(); ++a) {
      CHECK(e.bounds[a] == doctest::Approx(f.points[i].bounds[a]).epsilon(1e-12));
    }
    CHECK(cfg.recon.table() == f.points[i].config.recon.table());
    const auto composed = ComposeForRegion(model.MemorylessComponents()[0].second, layout, cfg.channels);
    const auto d = ExpectedDistortion(composed, layout, cfg.recon, measures);
    for (std::size_t k = 0; k < d.size(); ++k) CHECK(d[k] <= 0.05 + 1e-9);
  }
  CHECK(FrontierCsv(f).substr(0, 24) == "R_1_nats,R_2_nats,bound_");
}

TEST_CASE("results csv") {
  ErrorStats s;
  s.n = 12;
  s.p_error = 0.25;
  s.ci_halfwidth = 0.0123456789;
  s.decode_failures = 3;
  s.quantizer_failures = 1;
  s.mean_distortion = {0.1, 0.2};
  CHECK(ResultsCsvHeader(2, 2) ==
        "n,R_1_nats,R_2_nats,p_error,ci_halfwidth,decode_failures,quantizer_failures,mean_d_1,mean_d_2\n");
  CHECK(ResultsCsvRow({{0.5, 1.0}, s}) ==
        "12,0.500000000,1.000000000,0.250000000,0.012345679,3,1,0.100000000,0.200000000\n");
}

}  // namespace
}  // namespace mtrd
