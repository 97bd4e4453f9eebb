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

// Serial reference vs OpenMP kernels. Usage: mtrd_bench [repeats]

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "mtrd/codec.hpp"
#include "mtrd/io.hpp"
#include "mtrd/region.hpp"
#include "mtrd/spectrum.hpp"

namespace {

using namespace mtrd;

double Best(int repeats, const std::function<std::string()>& f, std::string* out) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    *out = f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void Compare(const char* name, int repeats, const std::function<std::string()>& serial,
             const std::function<std::string()>& parallel) {
  std::string a, b;
  const double ts = Best(repeats, serial, &a);
  const double tp = Best(repeats, parallel, &b);
  std::printf("%-28s serial %8.3f s  openmp %8.3f s  speedup %5.2fx  %s\n", name, ts, tp, ts / tp,
              a == b ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  std::printf("threads: %d\n", omp_get_max_threads());

  const auto mix = SourceModel::MakeMixed(0.5, SourceModel::MakeIid(Bernoulli(0.1, "X1")),
                                          SourceModel::MakeIid(Bernoulli(0.4, "X1")));
  const std::vector<int> grid = {256, 512, 1024, 2048, 4096};
  const DensityKind kind = EntropyDensity{{"X1"}};
  Compare("spectra (mixed, 5 n)", repeats,
          [&] { return SpectrumCsv(ComputeSpectraSerial(mix, grid, kind)); },
          [&] { return SpectrumCsv(ComputeSpectra(mix, grid, kind)); });

  const auto dsbs = SourceModel::MakeIid(Dsbs(0.11));
  const auto measures = HammingMeasures(dsbs.letters());
  RegionOptions o;
  o.restarts = 64;
  o.seed = 3;
  Compare("region restarts (64)", repeats,
          [&] { return FrontierCsv(SearchRegionSerial(dsbs, measures, {0.05, 0.05}, o)); },
          [&] { return FrontierCsv(SearchRegion(dsbs, measures, {0.05, 0.05}, o)); });

  CodecConfig c;
  c.n = 14;
  c.rates = {-0.89 * std::log(0.89) - 0.11 * std::log(0.11) + 0.15, std::log(2.0) + 0.15};
  c.slacks = {0.05, 0.15, 0.2, 0.2};
  c.enforce_slack_relation = false;
  c.channels = {Channel::Identity(dsbs.letters()[0], Alphabet::Indexed("Z1", 2)),
                Channel::Identity(dsbs.letters()[1], Alphabet::Indexed("Z2", 2))};
  c.trials = 1000;
  c.seed = 1;
  auto row = [&](const ErrorStats& s) { return ResultsCsvRow({c.rates, s}); };
  Compare("binning trials (1000, n=14)", repeats,
          [&] { return row(RunExperimentSerial(dsbs, c, measures, {0.0, 0.0})); },
          [&] { return row(RunExperiment(dsbs, c, measures, {0.0, 0.0})); });
  return 0;
}
