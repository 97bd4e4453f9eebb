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

#ifndef MTRD_IO_HPP_
#define MTRD_IO_HPP_

#include <string>
#include <vector>

#include "json.hpp"
#include "mtrd/codec.hpp"
#include "mtrd/error.hpp"
#include "mtrd/region.hpp"
#include "mtrd/source_model.hpp"
#include "mtrd/spectrum.hpp"

namespace mtrd {

// Input failure located by a JSON pointer into the offending document.
class InputError : public Error {
 public:
  InputError(ErrorCode code, std::string pointer, const std::string& message)
      : Error(code, message + " (at " + (pointer.empty() ? "/" : pointer) + ")"),
        pointer_(std::move(pointer)) {}

  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

nlohmann::json ReadJsonFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);

// Source-model schema:
//   {"alphabets": [{"name": "X1", "symbols": ["0", "1"]}, ...],
//    "kind": "iid" | "mixed" | "explicit",
//    "joint": [...] | [[...], [...]] | {"<n>": [...], ...},
//    "alpha": 0.5, "side_info": "S"}
SourceModel ParseModel(const nlohmann::json& doc);
SourceModel LoadModel(const std::string& path);
nlohmann::json ModelToJson(const SourceModel& model);

// Distortion schema:
//   {"reproductions": [{"name": ..., "symbols": [...]}, ...],  (optional)
//    "measures": [{"table": [...], "additive": true}, ...]}
// Tables are row-major over (x_1..x_M, y_1..y_M). The string "hamming"
// selects one Hamming measure per terminal.
std::vector<DistortionMeasure> ParseDistortion(const nlohmann::json& doc,
                                               const std::vector<Alphabet>& sources);
std::vector<DistortionMeasure> LoadDistortion(const std::string& spec,
                                              const std::vector<Alphabet>& sources);

// Fixed-point with `digits` decimals; "inf"/"-inf"/"nan" otherwise.
std::string FormatFixed(double v, int digits = 9);

std::string SpectrumCsv(const std::vector<DensitySpectrum>& spectra);
std::vector<DensitySpectrum> ParseSpectrumCsv(const std::string& text);
nlohmann::ordered_json EstimateToJson(const SpectralEstimate& e, const std::string& label);

// Subset label used in headers: "1+3" for {X_1, X_3}.
std::string SubsetLabel(std::size_t mask, std::size_t terminals);

std::string FrontierCsv(const RegionFrontier& frontier);
nlohmann::ordered_json FrontierToJson(const RegionFrontier& frontier, const RegionLayout& layout,
                                      const std::vector<double>& targets);
// Achieving configuration of one frontier point, for replay.
AuxConfig AuxConfigFromJson(const nlohmann::json& point, const std::vector<Alphabet>& sources,
                            const std::string& pointer);

struct ResultRow {
  std::vector<double> rates;
  ErrorStats stats;
};
std::string ResultsCsvHeader(std::size_t terminals, std::size_t measures);
std::string ResultsCsvRow(const ResultRow& row);

}  // namespace mtrd

#endif  // MTRD_IO_HPP_
