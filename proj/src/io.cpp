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

#include "mtrd/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mtrd {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void Bad(const std::string& pointer, const std::string& message) {
  throw InputError(ErrorCode::kParseError, pointer, message);
}

// Runs f, relabelling library errors with the pointer of the input they
// came from.
template <typename F>
auto At(const std::string& pointer, F&& f) {
  try {
    return f();
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    throw InputError(e.code(), pointer, e.what());
  }
}

const json& Field(const json& obj, const std::string& key, const std::string& pointer) {
  if (!obj.is_object()) Bad(pointer, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) Bad(pointer + "/" + key, "missing required field");
  return *it;
}

double Number(const json& v, const std::string& pointer) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
  }
  Bad(pointer, "expected a number");
}

std::vector<double> Numbers(const json& v, const std::string& pointer) {
  if (!v.is_array()) Bad(pointer, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(Number(v[i], pointer + "/" + std::to_string(i)));
  return out;
}

std::string Label(const json& v, const std::string& pointer) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  Bad(pointer, "expected a string or integer symbol");
}

std::vector<Alphabet> ParseAlphabets(const json& v, const std::string& pointer) {
  if (!v.is_array() || v.empty()) Bad(pointer, "expected a nonempty array of alphabets");
  std::vector<Alphabet> out;
  std::set<std::string> names;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = pointer + "/" + std::to_string(i);
    const json& name = Field(v[i], "name", p);
    if (!name.is_string() || name.get<std::string>().empty()) Bad(p + "/name", "expected a nonempty string");
    if (!names.insert(name.get<std::string>()).second) Bad(p + "/name", "duplicate variable name");
    const json& symbols = Field(v[i], "symbols", p);
    if (!symbols.is_array() || symbols.empty()) Bad(p + "/symbols", "expected a nonempty array");
    std::vector<std::string> labels;
    std::set<std::string> seen;
    for (std::size_t k = 0; k < symbols.size(); ++k) {
      labels.push_back(Label(symbols[k], p + "/symbols/" + std::to_string(k)));
      if (!seen.insert(labels.back()).second) Bad(p + "/symbols/" + std::to_string(k), "duplicate symbol");
    }
    out.emplace_back(name.get<std::string>(), std::move(labels));
  }
  return out;
}

json AlphabetsToJson(const std::vector<Alphabet>& alphabets) {
  json out = json::array();
  for (const auto& a : alphabets) out.push_back({{"name", a.name()}, {"symbols", a.symbols()}});
  return out;
}

}  // namespace

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(ErrorCode::kParseError, "", "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(ErrorCode::kParseError, "", "invalid JSON in '" + path + "': " + e.what());
  }
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kInvalidArgument, "cannot write '" + path + "'");
  out << text;
  if (!out) Fail(ErrorCode::kInvalidArgument, "write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Models.

SourceModel ParseModel(const json& doc) {
  if (!doc.is_object()) Bad("", "model must be a JSON object");
  const auto letters = ParseAlphabets(Field(doc, "alphabets", ""), "/alphabets");
  std::optional<std::string> side;
  if (doc.contains("side_info") && !doc["side_info"].is_null()) {
    if (!doc["side_info"].is_string()) Bad("/side_info", "expected a variable name");
    side = doc["side_info"].get<std::string>();
    bool found = false;
    for (const auto& a : letters) found = found || a.name() == *side;
    if (!found) throw InputError(ErrorCode::kUnknownVariable, "/side_info", "side information is not a declared variable");
  }
  const json& kind_v = Field(doc, "kind", "");
  if (!kind_v.is_string()) Bad("/kind", "expected a string");
  const std::string kind = kind_v.get<std::string>();
  const json& joint = Field(doc, "joint", "");
  if (kind == "iid") {
    const auto probs = Numbers(joint, "/joint");
    return At("/joint", [&] { return SourceModel::MakeIid(JointPmf::Make(letters, probs), side); });
  }
  if (kind == "mixed") {
    const double alpha = Number(Field(doc, "alpha", ""), "/alpha");
    if (!joint.is_array() || joint.size() != 2) Bad("/joint", "mixed models need two component tables");
    std::vector<SourceModel> comps;
    for (std::size_t i = 0; i < 2; ++i) {
      const std::string p = "/joint/" + std::to_string(i);
      const auto probs = Numbers(joint[i], p);
      comps.push_back(At(p, [&] { return SourceModel::MakeIid(JointPmf::Make(letters, probs), side); }));
    }
    return At("/alpha", [&] { return SourceModel::MakeMixed(alpha, comps[0], comps[1]); });
  }
  if (kind == "explicit") {
    if (!joint.is_object() || joint.empty()) Bad("/joint", "explicit models need an object of per-n tables");
    std::map<int, JointPmf> tables;
    for (const auto& [key, table] : joint.items()) {
      const std::string p = "/joint/" + key;
      int n = 0;
      try {
        std::size_t used = 0;
        n = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        Bad(p, "table keys must be blocklengths");
      }
      if (n < 1 || n > 64) Bad(p, "blocklength out of range");
      std::vector<Alphabet> vars;
      for (const auto& a : letters) {
        double size = std::pow(static_cast<double>(a.size()), n);
        if (size > 1e7) Bad(p, "table too large");
        vars.push_back(Alphabet::Indexed(a.name(), static_cast<std::size_t>(size)));
      }
      const auto probs = Numbers(table, p);
      tables.emplace(n, At(p, [&] { return JointPmf::Make(vars, probs); }));
    }
    return At("/joint", [&] { return SourceModel::MakeExplicit(letters, tables, side); });
  }
  Bad("/kind", "kind must be one of iid, mixed, explicit");
}

SourceModel LoadModel(const std::string& path) { return ParseModel(ReadJsonFile(path)); }

json ModelToJson(const SourceModel& model) {
  json out;
  out["alphabets"] = AlphabetsToJson(model.letters());
  if (model.side_info()) out["side_info"] = *model.side_info();
  auto probs = [](const JointPmf& j) { return std::vector<double>(j.probs().begin(), j.probs().end()); };
  if (const auto* iid = std::get_if<SourceModel::Iid>(&model.kind())) {
    out["kind"] = "iid";
    out["joint"] = probs(iid->base);
  } else if (const auto* mix = std::get_if<SourceModel::Mixed>(&model.kind())) {
    out["kind"] = "mixed";
    out["alpha"] = mix->alpha;
    out["joint"] = json::array({ModelToJson(*mix->a)["joint"], ModelToJson(*mix->b)["joint"]});
  } else {
    out["kind"] = "explicit";
    json tables = json::object();
    for (const auto& [n, t] : std::get<SourceModel::Explicit>(model.kind()).tables) {
      tables[std::to_string(n)] = probs(t);
    }
    out["joint"] = tables;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Distortion.

std::vector<DistortionMeasure> ParseDistortion(const json& doc, const std::vector<Alphabet>& sources) {
  if (doc.is_string()) {
    if (doc.get<std::string>() == "hamming") return HammingMeasures(sources);
    Bad("", "unknown distortion '" + doc.get<std::string>() + "'");
  }
  std::vector<Alphabet> repro = DefaultReproductions(sources);
  if (doc.contains("reproductions")) {
    repro = ParseAlphabets(doc["reproductions"], "/reproductions");
    if (repro.size() != sources.size()) Bad("/reproductions", "need one reproduction alphabet per terminal");
  }
  const json& measures = Field(doc, "measures", "");
  if (!measures.is_array() || measures.empty()) Bad("/measures", "expected a nonempty array");
  std::vector<DistortionMeasure> out;
  for (std::size_t k = 0; k < measures.size(); ++k) {
    const std::string p = "/measures/" + std::to_string(k);
    const json& m = measures[k];
    bool additive = true;
    std::vector<double> table;
    if (m.is_array()) {
      table = Numbers(m, p);
    } else {
      table = Numbers(Field(m, "table", p), p + "/table");
      if (m.contains("additive")) {
        if (!m["additive"].is_boolean()) Bad(p + "/additive", "expected a boolean");
        additive = m["additive"].get<bool>();
      }
    }
    out.push_back(At(p, [&] {
      return DistortionMeasure::Make(static_cast<int>(k), sources, repro, std::move(table), additive);
    }));
  }
  return out;
}

std::vector<DistortionMeasure> LoadDistortion(const std::string& spec,
                                              const std::vector<Alphabet>& sources) {
  if (spec == "hamming") return HammingMeasures(sources);
  return ParseDistortion(ReadJsonFile(spec), sources);
}

// ---------------------------------------------------------------------------
// CSV and JSON outputs.

std::string FormatFixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

namespace {

std::string Exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string SpectrumCsv(const std::vector<DensitySpectrum>& spectra) {
  std::string out = "n,value_nats,mass\n";
  for (const auto& s : spectra) {
    for (const auto& a : s.atoms) {
      out += std::to_string(s.n) + "," + FormatFixed(a.value, 12) + "," + Exact(a.mass) + "\n";
    }
  }
  return out;
}

std::vector<DensitySpectrum> ParseSpectrumCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("n,value_nats,mass", 0) != 0) {
    Bad("/0", "expected header n,value_nats,mass");
  }
  std::vector<DensitySpectrum> out;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c)) {
      Bad("/" + std::to_string(row), "expected three columns");
    }
    int n;
    double value, mass;
    try {
      n = std::stoi(a);
      value = std::stod(b);
      mass = std::stod(c);
    } catch (const std::exception&) {
      Bad("/" + std::to_string(row), "malformed number");
    }
    if (out.empty() || out.back().n != n) {
      if (!out.empty() && n < out.back().n) Bad("/" + std::to_string(row), "rows must be grouped by ascending n");
      out.push_back(DensitySpectrum{n, {}});
    }
    if (!out.back().atoms.empty() && value < out.back().atoms.back().value) {
      Bad("/" + std::to_string(row), "values must ascend within each n");
    }
    out.back().atoms.push_back({value, mass});
  }
  if (out.empty()) throw InputError(ErrorCode::kEmptyGrid, "", "spectrum file has no rows");
  return out;
}

ordered_json EstimateToJson(const SpectralEstimate& e, const std::string& label) {
  ordered_json out;
  out["density"] = label;
  out["units"] = "nats/symbol";
  out["epsilon"] = e.epsilon;
  out["sup_proxy"] = e.sup_proxy;
  out["inf_proxy"] = e.inf_proxy;
  out["n_grid"] = e.n_grid;
  out["extrapolated"] = e.extrapolated;
  ordered_json traj = ordered_json::array();
  for (const auto& q : e.trajectory) {
    traj.push_back({{"n", q.n}, {"inf_quantile", q.inf_quantile}, {"sup_quantile", q.sup_quantile}});
  }
  out["trajectory"] = traj;
  return out;
}

std::string SubsetLabel(std::size_t mask, std::size_t terminals) {
  std::string out;
  for (std::size_t m = 0; m < terminals; ++m) {
    if (mask >> m & 1) out += (out.empty() ? "" : "+") + std::to_string(m + 1);
  }
  return out;
}

std::string FrontierCsv(const RegionFrontier& frontier) {
  const std::size_t mc = frontier.terminals;
  const std::size_t kc = frontier.points.empty() ? 0 : frontier.points.front().distortion.size();
  std::string out;
  for (std::size_t m = 0; m < mc; ++m) out += "R_" + std::to_string(m + 1) + "_nats,";
  for (std::size_t a = 1; a < (std::size_t{1} << mc); ++a) out += "bound_" + SubsetLabel(a, mc) + "_nats,";
  for (std::size_t k = 0; k < kc; ++k) out += "D_" + std::to_string(k + 1) + "_achieved,";
  out.back() = '\n';
  for (const auto& p : frontier.points) {
    std::string row;
    for (double r : p.rates) row += FormatFixed(r) + ",";
    for (double b : p.bounds) row += FormatFixed(b) + ",";
    for (double d : p.distortion) row += FormatFixed(d) + ",";
    row.back() = '\n';
    out += row;
  }
  return out;
}

ordered_json FrontierToJson(const RegionFrontier& frontier, const RegionLayout& layout,
                            const std::vector<double>& targets) {
  ordered_json out;
  out["inner_approximation"] = frontier.inner_approximation;
  out["units"] = "nats/symbol";
  out["terminals"] = layout.terminals;
  out["side_info"] = layout.side_info ? ordered_json(*layout.side_info) : ordered_json(nullptr);
  ordered_json t = ordered_json::array();
  for (double v : targets) t.push_back(std::isinf(v) ? ordered_json("inf") : ordered_json(v));
  out["targets"] = t;
  ordered_json sb;
  for (std::size_t a = 1; a <= frontier.subset_bounds.size(); ++a) {
    sb[SubsetLabel(a, frontier.terminals)] = frontier.subset_bounds[a - 1];
  }
  out["min_subset_sums"] = sb;
  ordered_json points = ordered_json::array();
  for (const auto& p : frontier.points) {
    ordered_json pj;
    pj["rates"] = p.rates;
    ordered_json bounds;
    for (std::size_t a = 1; a <= p.bounds.size(); ++a) bounds[SubsetLabel(a, frontier.terminals)] = p.bounds[a - 1];
    pj["bounds"] = bounds;
    pj["distortion"] = p.distortion;
    ordered_json channels = ordered_json::array();
    for (const auto& c : p.config.channels) {
      ordered_json rows = ordered_json::array();
      for (std::size_t x = 0; x < c.input().size(); ++x) {
        const auto r = c.row(x);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
      }
      channels.push_back({{"input", c.input().name()}, {"output_size", c.output().size()}, {"rows", rows}});
    }
    pj["channels"] = channels;
    const auto& h = p.config.recon;
    std::vector<std::size_t> domain_sizes, output_sizes;
    for (const auto& a : h.domain()) domain_sizes.push_back(a.size());
    for (const auto& a : h.outputs()) output_sizes.push_back(a.size());
    std::vector<int> undefined;
    for (std::size_t i = 0; i < h.size(); ++i) undefined.push_back(h.undefined(i) ? 1 : 0);
    pj["recon"] = {{"domain_sizes", domain_sizes},
                   {"output_sizes", output_sizes},
                   {"table", h.table()},
                   {"undefined", undefined}};
    points.push_back(pj);
  }
  out["points"] = points;
  return out;
}

AuxConfig AuxConfigFromJson(const json& point, const std::vector<Alphabet>& sources,
                            const std::string& pointer) {
  const json& channels = Field(point, "channels", pointer);
  if (!channels.is_array() || channels.size() != sources.size()) {
    Bad(pointer + "/channels", "need one channel per terminal");
  }
  std::vector<Channel> ch;
  std::vector<Alphabet> domain;
  for (std::size_t m = 0; m < sources.size(); ++m) {
    const std::string p = pointer + "/channels/" + std::to_string(m);
    const json& rows = Field(channels[m], "rows", p);
    if (!rows.is_array() || rows.size() != sources[m].size()) Bad(p + "/rows", "need one row per source symbol");
    std::vector<double> flat;
    std::size_t width = 0;
    for (std::size_t x = 0; x < rows.size(); ++x) {
      const auto r = Numbers(rows[x], p + "/rows/" + std::to_string(x));
      if (x == 0) width = r.size();
      if (r.size() != width || width == 0) Bad(p + "/rows/" + std::to_string(x), "ragged channel rows");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    const Alphabet out = Alphabet::Indexed("Z" + std::to_string(m + 1), width);
    ch.push_back(At(p, [&] { return Channel::Make(sources[m], out, flat); }));
  }
  const json& recon = Field(point, "recon", pointer);
  const std::string rp = pointer + "/recon";
  const json& ds = Field(recon, "domain_sizes", rp);
  const json& os = Field(recon, "output_sizes", rp);
  const auto dsv = Numbers(ds, rp + "/domain_sizes");
  const auto osv = Numbers(os, rp + "/output_sizes");
  if (osv.size() != sources.size()) Bad(rp + "/output_sizes", "need one output alphabet per terminal");
  const std::size_t off = dsv.size() == sources.size() + 1 ? 1 : 0;
  if (dsv.size() != sources.size() + off) Bad(rp + "/domain_sizes", "domain must be (S,) Z_1..Z_M");
  for (std::size_t i = 0; i < dsv.size(); ++i) {
    const std::string name = i < off ? "S" : "Z" + std::to_string(i - off + 1);
    if (i >= off && dsv[i] != static_cast<double>(ch[i - off].output().size())) {
      Bad(rp + "/domain_sizes/" + std::to_string(i), "domain size differs from the channel output");
    }
    domain.push_back(Alphabet::Indexed(name, static_cast<std::size_t>(dsv[i])));
  }
  std::vector<Alphabet> outputs;
  for (std::size_t m = 0; m < osv.size(); ++m) {
    outputs.push_back(Alphabet::Indexed("Y" + std::to_string(m + 1), static_cast<std::size_t>(osv[m])));
  }
  std::vector<std::size_t> table;
  for (double v : Numbers(Field(recon, "table", rp), rp + "/table")) table.push_back(static_cast<std::size_t>(v));
  std::vector<char> undefined;
  if (recon.contains("undefined")) {
    for (double v : Numbers(recon["undefined"], rp + "/undefined")) undefined.push_back(v != 0 ? 1 : 0);
  }
  ReconMap h = At(rp, [&] { return ReconMap(domain, outputs, table, undefined); });
  return AuxConfig{std::move(ch), std::move(h)};
}

std::string ResultsCsvHeader(std::size_t terminals, std::size_t measures) {
  std::string out = "n,";
  for (std::size_t m = 0; m < terminals; ++m) out += "R_" + std::to_string(m + 1) + "_nats,";
  out += "p_error,ci_halfwidth,decode_failures,quantizer_failures";
  for (std::size_t k = 0; k < measures; ++k) out += ",mean_d_" + std::to_string(k + 1);
  return out + "\n";
}

std::string ResultsCsvRow(const ResultRow& row) {
  std::string out = std::to_string(row.stats.n) + ",";
  for (double r : row.rates) out += FormatFixed(r) + ",";
  out += FormatFixed(row.stats.p_error) + "," + FormatFixed(row.stats.ci_halfwidth) + "," +
         std::to_string(row.stats.decode_failures) + "," + std::to_string(row.stats.quantizer_failures);
  for (double d : row.stats.mean_distortion) out += "," + FormatFixed(d);
  return out + "\n";
}

}  // namespace mtrd
