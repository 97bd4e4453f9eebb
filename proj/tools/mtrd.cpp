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

#include <omp.h>

#include <chrono>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mtrd/codec.hpp"
#include "mtrd/error.hpp"
#include "mtrd/io.hpp"
#include "mtrd/region.hpp"
#include "mtrd/source_model.hpp"
#include "mtrd/spectrum.hpp"

#ifndef MTRD_VERSION
#define MTRD_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace mtrd {
namespace {

enum Exit { kOk = 0, kUnexpected = 1, kInput = 2, kInfeasible = 3, kBudget = 4 };

int LogLevel() {
  static const int level = [] {
    const char* v = std::getenv("MTRD_LOG");
    if (v == nullptr) return 1;
    const std::string s = v;
    if (s == "quiet" || s == "0") return 0;
    if (s == "debug" || s == "2") return 2;
    if (s == "trace" || s == "3") return 3;
    return 1;
  }();
  return level;
}

void Log(int level, const std::string& msg) {
  if (LogLevel() >= level) std::cerr << "[mtrd] " << msg << "\n";
}

// Thrown for malformed flag values; reported like an input file error.
[[noreturn]] void BadFlag(const std::string& flag, const std::string& message) {
  throw InputError(ErrorCode::kInvalidArgument, "--" + flag, message);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

double ParseDouble(const std::string& flag, const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    BadFlag(flag, "'" + s + "' is not a number");
  }
}

std::vector<double> ParseDoubles(const std::string& flag, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : SplitList(s)) out.push_back(ParseDouble(flag, item));
  if (out.empty()) BadFlag(flag, "expected a comma-separated list");
  return out;
}

std::vector<int> ParseInts(const std::string& flag, const std::string& s) {
  std::vector<int> out;
  for (const auto& item : SplitList(s)) {
    const double v = ParseDouble(flag, item);
    if (v != std::floor(v) || v < 1 || v > 1e6) BadFlag(flag, "'" + item + "' is not a positive integer");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) BadFlag(flag, "expected a comma-separated list");
  return out;
}

// Collects outputs, then writes the manifest last.
class Run {
 public:
  Run(std::string command, std::string out_dir)
      : command_(std::move(command)), out_dir_(std::move(out_dir)),
        start_(std::chrono::steady_clock::now()) {}

  const std::string& out_dir() const { return out_dir_; }

  void Prepare() {
    std::error_code ec;
    fs::create_directories(out_dir_, ec);
    if (ec) BadFlag("out-dir", "cannot create '" + out_dir_ + "': " + ec.message());
    fs::remove(Path("manifest.json"), ec);
  }

  std::string Path(const std::string& name) const { return (fs::path(out_dir_) / name).string(); }

  void Write(const std::string& name, const std::string& text) {
    WriteTextFile(Path(name), text);
    for (const auto& o : outputs_) {
      if (o == Path(name)) return;
    }
    outputs_.push_back(Path(name));
    Log(2, "wrote " + Path(name));
  }

  void Append(const std::string& name, const std::string& text) {
    std::ofstream out(Path(name), std::ios::binary | std::ios::app);
    out << text;
    out.flush();
  }

  void Finish(const std::string& config, std::uint64_t seed) {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    ordered_json m;
    m["command"] = command_;
    m["config"] = config.empty() ? ordered_json(nullptr) : ordered_json(config);
    m["seed"] = seed;
    m["version"] = MTRD_VERSION;
    m["outputs"] = outputs_;
    m["wall_clock_seconds"] = wall;
    WriteTextFile(Path("manifest.json"), m.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::string out_dir_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
};

struct Common {
  std::string model;
  std::string distortion = "hamming";
  std::string d = "0";
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out_dir = ".";
  std::string budget;
};

void AddCommon(CLI::App* cmd, Common& c, bool needs_model) {
  auto* m = cmd->add_option("--model", c.model, "Source model JSON");
  if (needs_model) m->required();
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--threads", c.threads, "Worker cap (0: runtime default)");
  cmd->add_option("--out-dir", c.out_dir, "Output directory");
}

void AddDistortion(CLI::App* cmd, Common& c) {
  cmd->add_option("--distortion", c.distortion, "'hamming' or distortion JSON");
  cmd->add_option("--D", c.d, "Targets, one per measure (comma list, 'inf' allowed)");
}

std::vector<double> Targets(const Common& c, std::size_t measures) {
  auto d = ParseDoubles("D", c.d);
  if (d.size() == 1 && measures > 1) d.assign(measures, d[0]);
  if (d.size() != measures) {
    BadFlag("D", "need " + std::to_string(measures) + " targets, got " + std::to_string(d.size()));
  }
  for (double v : d) {
    if (v < 0 || std::isnan(v)) BadFlag("D", "targets must be nonnegative");
  }
  return d;
}

std::vector<Alphabet> TerminalAlphabets(const SourceModel& model) {
  std::vector<Alphabet> xs;
  for (const auto& t : model.terminals()) {
    for (const auto& l : model.letters()) {
      if (l.name() == t) xs.push_back(l);
    }
  }
  return xs;
}

// ---------------------------------------------------------------------------
// spectrum

struct SpectrumArgs {
  Common common;
  std::string kind = "entropy";
  std::string x, y, given;
  std::string n_grid = "1,16,64,256,1024";
  double epsilon = 0.01;
  std::string spectra_csv;
};

VarSet Names(const std::string& s) {
  VarSet out;
  for (const auto& v : SplitList(s)) out.push_back(v);
  return out;
}

DensityKind ParseKind(const SpectrumArgs& a, const SourceModel& model) {
  VarSet x = a.x.empty() ? model.names() : Names(a.x);
  if (a.kind == "entropy") return EntropyDensity{x};
  if (a.kind == "cond-entropy") return CondEntropyDensity{x, Names(a.given)};
  if (a.kind == "mutual-info") return MutualInfoDensity{x, Names(a.y)};
  if (a.kind == "multi-info") return MultiInfoDensity{x};
  if (a.kind == "cond-mutual-info") return CondMutualInfoDensity{x, Names(a.y), Names(a.given)};
  BadFlag("kind", "unknown density kind '" + a.kind + "'");
}

int CmdSpectrum(const SpectrumArgs& a, Run& run) {
  std::vector<DensitySpectrum> spectra;
  std::string label;
  if (!a.spectra_csv.empty()) {
    std::ifstream in(a.spectra_csv, std::ios::binary);
    if (!in) BadFlag("spectra-csv", "cannot open '" + a.spectra_csv + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    spectra = ParseSpectrumCsv(ss.str());
    label = "csv:" + fs::path(a.spectra_csv).filename().string();
  } else {
    if (a.common.model.empty()) BadFlag("model", "--model or --spectra-csv is required");
    const SourceModel model = LoadModel(a.common.model);
    const DensityKind kind = ParseKind(a, model);
    label = DensityLabel(kind);
    SpectrumOptions options;
    if (!a.common.budget.empty()) {
      const double b = ParseDouble("budget", a.common.budget);
      if (!(b >= 1)) BadFlag("budget", "must be at least 1");
      options.budget = static_cast<std::size_t>(b);
    }
    auto grid = ParseInts("n-grid", a.n_grid);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    run.Write("spectrum.csv", SpectrumCsv({}));
    for (int n : grid) {
      Log(1, "spectrum n=" + std::to_string(n));
      spectra.push_back(ComputeSpectrum(model, n, kind, options));
      run.Append("spectrum.csv", SpectrumCsv({spectra.back()}).substr(17));
    }
  }
  if (!(a.epsilon > 0 && a.epsilon < 0.5)) BadFlag("epsilon", "must lie in (0, 0.5)");
  const auto estimate = SpectralProxies(spectra, a.epsilon);
  run.Write("spectrum.csv", SpectrumCsv(spectra));
  run.Write("estimate.json", EstimateToJson(estimate, label).dump(2) + "\n");
  std::printf("sup_proxy_nats=%s inf_proxy_nats=%s\n", FormatFixed(estimate.sup_proxy).c_str(),
              FormatFixed(estimate.inf_proxy).c_str());
  return kOk;
}

// ---------------------------------------------------------------------------
// region, wz, mixed-region

struct RegionArgs {
  Common common;
  std::string aux_size;
  int restarts = 200;
};

void AddRegionFlags(CLI::App* cmd, RegionArgs& a) {
  AddCommon(cmd, a.common, true);
  AddDistortion(cmd, a.common);
  cmd->add_option("--aux-size", a.aux_size, "Auxiliary alphabet sizes (one value or one per terminal)");
  cmd->add_option("--restarts", a.restarts, "Random restarts of the channel search");
}

RegionOptions MakeRegionOptions(const RegionArgs& a, std::size_t terminals) {
  RegionOptions o;
  o.seed = a.common.seed;
  if (a.restarts < 0) BadFlag("restarts", "must be nonnegative");
  o.restarts = a.restarts;
  if (!a.aux_size.empty()) {
    const auto sizes = ParseInts("aux-size", a.aux_size);
    if (sizes.size() != 1 && sizes.size() != terminals) BadFlag("aux-size", "need one size or one per terminal");
    for (std::size_t m = 0; m < terminals; ++m) {
      o.aux_sizes.push_back(static_cast<std::size_t>(sizes.size() == 1 ? sizes[0] : sizes[m]));
    }
  }
  return o;
}

void EmitFrontier(Run& run, const RegionFrontier& f, const RegionLayout& layout,
                  const std::vector<double>& targets) {
  run.Write("frontier.csv", FrontierCsv(f));
  run.Write("frontier.json", FrontierToJson(f, layout, targets).dump(2) + "\n");
  for (std::size_t a = 1; a <= f.subset_bounds.size(); ++a) {
    std::printf("min_sum_%s_nats=%s\n", SubsetLabel(a, f.terminals).c_str(),
                FormatFixed(f.subset_bounds[a - 1]).c_str());
  }
}

int CmdRegion(const RegionArgs& a, Run& run, const std::string& variant) {
  const SourceModel model = LoadModel(a.common.model);
  const auto measures = LoadDistortion(a.common.distortion, TerminalAlphabets(model));
  const auto targets = Targets(a.common, measures.size());
  const auto layout = LayoutOf(model);
  const auto options = MakeRegionOptions(a, layout.terminals.size());
  RegionFrontier f;
  if (variant == "wz") {
    if (!model.side_info() || layout.terminals.size() != 1) {
      throw InputError(ErrorCode::kInvalidArgument, "/side_info",
                       "wz needs one terminal and a side-information variable");
    }
    f = SearchRegion(model, measures, targets, options);
    std::printf("wz_rate_nats=%s\n", FormatFixed(f.subset_bounds[0]).c_str());
  } else if (variant == "mixed-region") {
    const auto* mix = std::get_if<SourceModel::Mixed>(&model.kind());
    if (mix == nullptr) throw InputError(ErrorCode::kInvalidArgument, "/kind", "mixed-region needs a mixed model");
    f = MixedRegion(*mix->a, *mix->b, mix->alpha, measures, targets, options);
  } else {
    f = SearchRegion(model, measures, targets, options);
  }
  EmitFrontier(run, f, layout, targets);
  return kOk;
}

// ---------------------------------------------------------------------------
// simulate, sw-check

struct SimArgs {
  Common common;
  std::string config;
  std::string rates;
  std::string rates_from;
  int corner = -1;
  double rate_slack = 0.0;
  std::string n_grid = "8,12,16";
  int trials = 200;
  double gamma1 = Slacks{}.gamma1, gamma2 = Slacks{}.gamma2, gamma3 = Slacks{}.gamma3, gamma4 = Slacks{}.gamma4;
  bool no_slack_relation = false;
  int restarts = 0;
  CLI::App* cmd = nullptr;
};

bool Given(const SimArgs& a, const std::string& flag) { return a.cmd->count("--" + flag) > 0; }

std::vector<Channel> IdentityChannels(const std::vector<Alphabet>& xs) {
  std::vector<Channel> out;
  for (std::size_t m = 0; m < xs.size(); ++m) {
    out.push_back(Channel::Identity(xs[m], Alphabet::Indexed("Z" + std::to_string(m + 1), xs[m].size())));
  }
  return out;
}

// Folds an experiment config file into the flags not given explicitly.
void ApplyConfigFile(SimArgs& a) {
  if (a.config.empty()) return;
  const json doc = ReadJsonFile(a.config);
  if (!doc.is_object()) throw InputError(ErrorCode::kParseError, "", "experiment config must be an object");
  const fs::path base = fs::path(a.config).parent_path();
  auto rel = [&](const std::string& p) { return fs::path(p).is_absolute() ? p : (base / p).string(); };
  auto list = [&](const char* key) {
    std::string s;
    for (const auto& v : doc[key]) {
      if (!v.is_number() && !v.is_string()) throw InputError(ErrorCode::kParseError, std::string("/") + key, "expected numbers");
      s += (s.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : FormatFixed(v.get<double>(), 17));
    }
    return s;
  };
  try {
    if (doc.contains("model") && !Given(a, "model")) a.common.model = rel(doc["model"].get<std::string>());
    if (doc.contains("distortion") && !Given(a, "distortion")) {
      const auto d = doc["distortion"].get<std::string>();
      a.common.distortion = d == "hamming" ? d : rel(d);
    }
    if (doc.contains("D") && !Given(a, "D")) a.common.d = list("D");
    if (doc.contains("rates") && !Given(a, "rates")) a.rates = list("rates");
    if (doc.contains("n_grid") && !Given(a, "n-grid")) a.n_grid = list("n_grid");
    if (doc.contains("trials") && !Given(a, "trials")) a.trials = doc["trials"].get<int>();
    if (doc.contains("seed") && !Given(a, "seed")) a.common.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("aux_config") && !Given(a, "rates-from")) a.rates_from = rel(doc["aux_config"].get<std::string>());
    if (doc.contains("corner") && !Given(a, "corner")) a.corner = doc["corner"].get<int>();
    if (doc.contains("rate_slack") && !Given(a, "rate-slack")) a.rate_slack = doc["rate_slack"].get<double>();
    if (doc.contains("enforce_slack_relation") && !Given(a, "no-slack-relation")) {
      a.no_slack_relation = !doc["enforce_slack_relation"].get<bool>();
    }
    if (doc.contains("slacks")) {
      const auto& s = doc["slacks"];
      if (s.contains("gamma1") && !Given(a, "gamma1")) a.gamma1 = s["gamma1"].get<double>();
      if (s.contains("gamma2") && !Given(a, "gamma2")) a.gamma2 = s["gamma2"].get<double>();
      if (s.contains("gamma3") && !Given(a, "gamma3")) a.gamma3 = s["gamma3"].get<double>();
      if (s.contains("gamma4") && !Given(a, "gamma4")) a.gamma4 = s["gamma4"].get<double>();
    }
  } catch (const json::exception& e) {
    throw InputError(ErrorCode::kParseError, "", std::string("experiment config: ") + e.what());
  }
}

void AddSimFlags(CLI::App* cmd, SimArgs& a) {
  a.cmd = cmd;
  AddCommon(cmd, a.common, false);
  AddDistortion(cmd, a.common);
  cmd->add_option("--n-grid", a.n_grid, "Blocklengths (comma list, each <= 24)");
  cmd->add_option("--trials", a.trials, "Trials per blocklength");
  cmd->add_option("--rate-slack", a.rate_slack, "Nats added to every replayed or corner rate");
  cmd->add_option("--gamma1", a.gamma1, "Binning slack");
  cmd->add_option("--gamma2", a.gamma2, "Codebook slack");
  cmd->add_option("--gamma3", a.gamma3, "Multi-information slack");
  cmd->add_option("--gamma4", a.gamma4, "Coupling slack");
  cmd->add_flag("--no-slack-relation", a.no_slack_relation, "Allow gamma2..4 >= gamma1/6");
  cmd->add_option("--budget", a.common.budget, "Decoder tuple cap per trial");
}

CodecConfig BaseCodec(const SimArgs& a) {
  CodecConfig c;
  c.slacks = {a.gamma1, a.gamma2, a.gamma3, a.gamma4};
  c.enforce_slack_relation = !a.no_slack_relation;
  if (a.trials < 1) BadFlag("trials", "must be positive");
  c.trials = a.trials;
  c.seed = a.common.seed;
  if (!a.common.budget.empty()) {
    const double b = ParseDouble("budget", a.common.budget);
    if (!(b >= 1)) BadFlag("budget", "must be at least 1");
    c.tuple_cap = static_cast<std::size_t>(b);
  }
  return c;
}

// Runs the sweep, appending one row per blocklength so a budget failure
// leaves the completed rows on disk.
std::vector<ErrorStats> Sweep(Run& run, const SourceModel& model, CodecConfig config,
                              const std::vector<DistortionMeasure>& measures,
                              const std::vector<double>& targets, const std::vector<int>& grid) {
  run.Write("results.csv", ResultsCsvHeader(config.rates.size(), measures.size()));
  std::vector<ErrorStats> out;
  for (int n : grid) {
    config.n = n;
    Log(1, "simulate n=" + std::to_string(n) + " trials=" + std::to_string(config.trials));
    out.push_back(RunExperiment(model, config, measures, targets));
    run.Append("results.csv", ResultsCsvRow({config.rates, out.back()}));
    std::printf("n=%d p_error=%s ci_halfwidth=%s\n", n, FormatFixed(out.back().p_error).c_str(),
                FormatFixed(out.back().ci_halfwidth).c_str());
  }
  return out;
}

int CmdSimulate(SimArgs& a, Run& run) {
  ApplyConfigFile(a);
  if (a.common.model.empty()) BadFlag("model", "--model (or a config with \"model\") is required");
  const SourceModel model = LoadModel(a.common.model);
  const auto xs = TerminalAlphabets(model);
  const auto measures = LoadDistortion(a.common.distortion, xs);
  const auto targets = Targets(a.common, measures.size());
  CodecConfig config = BaseCodec(a);
  config.channels = IdentityChannels(xs);
  if (!a.rates_from.empty()) {
    const json doc = ReadJsonFile(a.rates_from);
    if (!doc.contains("points") || !doc["points"].is_array() || doc["points"].empty()) {
      throw InputError(ErrorCode::kParseError, "/points", "frontier has no points");
    }
    const int idx = a.corner < 0 ? 0 : a.corner;
    if (idx >= static_cast<int>(doc["points"].size())) BadFlag("corner", "index beyond the frontier");
    const std::string p = "/points/" + std::to_string(idx);
    const json& point = doc["points"][idx];
    const auto cfg = AuxConfigFromJson(point, xs, p);
    config.channels = cfg.channels;
    config.recon = cfg.recon;
    if (!point.contains("rates")) throw InputError(ErrorCode::kParseError, p + "/rates", "missing rates");
    for (const auto& r : point["rates"]) config.rates.push_back(r.get<double>() + a.rate_slack);
  }
  if (!a.rates.empty()) config.rates = ParseDoubles("rates", a.rates);
  if (config.rates.size() != xs.size()) {
    BadFlag("rates", "need " + std::to_string(xs.size()) + " rates (or --rates-from)");
  }
  Sweep(run, model, config, measures, targets, ParseInts("n-grid", a.n_grid));
  return kOk;
}

// Slepian-Wolf check: lossless corner from the region search, rates at the
// chosen corner plus the slack, then a blocklength sweep.
int CmdSwCheck(SimArgs& a, Run& run) {
  ApplyConfigFile(a);
  if (a.common.model.empty()) BadFlag("model", "--model is required");
  const SourceModel model = LoadModel(a.common.model);
  const auto xs = TerminalAlphabets(model);
  const auto measures = HammingMeasures(xs);
  const std::vector<double> targets(measures.size(), 0.0);
  RegionOptions ro;
  ro.seed = a.common.seed;
  ro.restarts = a.restarts;
  const auto frontier = SearchRegion(model, measures, targets, ro);
  const auto corners = frontier.corners();
  const int idx = a.corner < 0 ? 0 : a.corner;
  if (idx >= static_cast<int>(corners.size())) BadFlag("corner", "index beyond the corner list");
  CodecConfig config = BaseCodec(a);
  config.channels = IdentityChannels(xs);
  for (double r : corners[idx]) config.rates.push_back(r + a.rate_slack);
  if (!a.rates.empty()) config.rates = ParseDoubles("rates", a.rates);
  const auto stats = Sweep(run, model, config, measures, targets, ParseInts("n-grid", a.n_grid));
  bool monotone = true;
  for (std::size_t i = 1; i < stats.size(); ++i) {
    monotone = monotone && stats[i].p_error <= stats[i - 1].p_error + stats[i].ci_halfwidth +
                                                   stats[i - 1].ci_halfwidth;
  }
  ordered_json s;
  s["units"] = "nats/symbol";
  s["corner"] = corners[idx];
  s["rates"] = config.rates;
  s["sum_rate"] = std::accumulate(config.rates.begin(), config.rates.end(), 0.0);
  ordered_json sb;
  for (std::size_t m = 1; m <= frontier.subset_bounds.size(); ++m) {
    sb[SubsetLabel(m, frontier.terminals)] = frontier.subset_bounds[m - 1];
  }
  s["min_subset_sums"] = sb;
  ordered_json rows = ordered_json::array();
  for (const auto& e : stats) rows.push_back({{"n", e.n}, {"p_error", e.p_error}, {"ci_halfwidth", e.ci_halfwidth}});
  s["sweep"] = rows;
  s["nonincreasing_within_ci"] = monotone;
  run.Write("sw_check.json", s.dump(2) + "\n");
  std::printf("nonincreasing_within_ci=%s\n", monotone ? "true" : "false");
  return kOk;
}

// ---------------------------------------------------------------------------

std::string SchemaFor(const std::string& command) {
  if (command == "simulate" || command == "sw-check") return "experiment";
  return "model";
}

int ReportError(const std::string& name, const std::string& message, const std::string& pointer,
                const std::string& schema, const std::string& out_dir) {
  ordered_json e;
  e["error"] = name;
  e["message"] = message;
  e["schema"] = {{"document", schema}, {"pointer", pointer}};
  const std::string text = e.dump(2) + "\n";
  std::cerr << text;
  std::error_code ec;
  if (!out_dir.empty() && fs::is_directory(out_dir, ec)) {
    try {
      WriteTextFile((fs::path(out_dir) / "error.json").string(), text);
    } catch (const std::exception&) {
    }
  }
  return 0;
}

int ExitFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInfeasibleDistortion:
      return kInfeasible;
    case ErrorCode::kBudgetExceeded:
      return kBudget;
    default:
      return kInput;
  }
}

}  // namespace
}  // namespace mtrd

int main(int argc, char** argv) {
  using namespace mtrd;
  CLI::App app{"Multiterminal rate-distortion toolkit (all rates in nats/symbol)"};
  app.set_version_flag("--version", MTRD_VERSION);
  app.require_subcommand(1);

  SpectrumArgs spec;
  auto* c_spec = app.add_subcommand("spectrum", "Exact information-density spectra and quantile proxies");
  AddCommon(c_spec, spec.common, false);
  c_spec->add_option("--kind", spec.kind, "entropy|cond-entropy|mutual-info|multi-info|cond-mutual-info");
  c_spec->add_option("--x", spec.x, "Variables (comma list; parts for multi-info)");
  c_spec->add_option("--y", spec.y, "Second variable group");
  c_spec->add_option("--given", spec.given, "Conditioning variables");
  c_spec->add_option("--n-grid", spec.n_grid, "Blocklengths (comma list)");
  c_spec->add_option("--epsilon", spec.epsilon, "Tail level of the quantile proxies");
  c_spec->add_option("--budget", spec.common.budget, "Atom/type cap per blocklength");
  c_spec->add_option("--spectra-csv", spec.spectra_csv, "Read spectra from CSV instead of computing");

  RegionArgs reg, wz, mix;
  auto* c_reg = app.add_subcommand("region", "Achievable rate region frontier");
  AddRegionFlags(c_reg, reg);
  auto* c_wz = app.add_subcommand("wz", "Rate with decoder side information");
  AddRegionFlags(c_wz, wz);
  auto* c_mix = app.add_subcommand("mixed-region", "Region of a two-component mixed source");
  AddRegionFlags(c_mix, mix);

  SimArgs sim, sw;
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo run of the random-binning scheme");
  AddSimFlags(c_sim, sim);
  c_sim->add_option("--config", sim.config, "Experiment config JSON");
  c_sim->add_option("--rates", sim.rates, "Rates per terminal (comma list, nats)");
  c_sim->add_option("--rates-from", sim.rates_from, "frontier.json to replay");
  c_sim->add_option("--corner", sim.corner, "Point index in --rates-from");
  auto* c_sw = app.add_subcommand("sw-check", "Lossless corner plus slack, swept over n");
  AddSimFlags(c_sw, sw);
  c_sw->add_option("--rates", sw.rates, "Override rates (comma list, nats)");
  c_sw->add_option("--corner", sw.corner, "Corner index");
  c_sw->add_option("--restarts", sw.restarts, "Random restarts for the corner search");
  c_sw->add_option("--config", sw.config, "Experiment config JSON");

  std::string command, out_dir;
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string sub;
    for (auto* s : app.get_subcommands()) sub = s->get_name();
    ReportError("UsageError", e.what(), "", SchemaFor(sub), "");
    return kInput;
  }

  std::string line;
  for (int i = 0; i < argc; ++i) line += (i ? " " : "") + std::string(argv[i]);
  const auto* active = app.get_subcommands().front();
  command = active->get_name();

  Common* common = nullptr;
  std::string config_path;
  if (command == "spectrum") common = &spec.common;
  if (command == "region") common = &reg.common;
  if (command == "wz") common = &wz.common;
  if (command == "mixed-region") common = &mix.common;
  if (command == "simulate") common = &sim.common, config_path = sim.config;
  if (command == "sw-check") common = &sw.common, config_path = sw.config;
  out_dir = common->out_dir;
  if (common->threads > 0) omp_set_num_threads(common->threads);

  Run run(line, out_dir);
  std::string pointer;
  try {
    run.Prepare();
    int code = kOk;
    if (command == "spectrum") code = CmdSpectrum(spec, run);
    if (command == "region") code = CmdRegion(reg, run, command);
    if (command == "wz") code = CmdRegion(wz, run, command);
    if (command == "mixed-region") code = CmdRegion(mix, run, command);
    if (command == "simulate") code = CmdSimulate(sim, run);
    if (command == "sw-check") code = CmdSwCheck(sw, run);
    run.Finish(config_path, common->seed);
    return code;
  } catch (const InputError& e) {
    ReportError(std::string(ErrorName(e.code())), e.what(), e.pointer(), SchemaFor(command), out_dir);
    return ExitFor(e.code());
  } catch (const Error& e) {
    ReportError(std::string(ErrorName(e.code())), e.what(), "", SchemaFor(command), out_dir);
    return ExitFor(e.code());
  } catch (const std::exception& e) {
    ReportError("Unexpected", e.what(), "", SchemaFor(command), out_dir);
    return kUnexpected;
  }
}
