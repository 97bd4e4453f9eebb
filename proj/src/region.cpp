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

#include "mtrd/region.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <set>

#include "mtrd/error.hpp"
#include "mtrd/info.hpp"
#include "mtrd/rng.hpp"

namespace mtrd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Rate tuples closer than this are treated as the same corner.
constexpr double kRateTie = 1e-12;

std::size_t CellCount(const std::vector<Alphabet>& alphabets) {
  std::size_t n = 1;
  for (const auto& a : alphabets) n *= a.size();
  return n;
}

double EntropyOf(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

// Flat index into `sub` of the cell of `full` at `flat`; sub's variables
// must be a subset of full's.
class Projection {
 public:
  Projection(const JointPmf& full, const std::vector<Alphabet>& sub) {
    std::size_t stride = 1;
    for (std::size_t i = sub.size(); i-- > 0;) {
      vars_.push_back(full.IndexOf(sub[i].name()));
      strides_.push_back(stride);
      stride *= sub[i].size();
    }
  }
  std::size_t operator()(const JointPmf& full, std::size_t flat) const {
    std::size_t out = 0;
    for (std::size_t i = 0; i < vars_.size(); ++i) out += full.Digit(flat, vars_[i]) * strides_[i];
    return out;
  }

 private:
  std::vector<std::size_t> vars_;
  std::vector<std::size_t> strides_;
};

std::vector<Alphabet> AlphabetsOf(const JointPmf& j, const VarSet& names) {
  std::vector<Alphabet> out;
  for (const auto& n : names) out.push_back(j.alphabet(n));
  return out;
}

std::vector<Alphabet> ReconDomain(const JointPmf& composed, const RegionLayout& layout) {
  std::vector<Alphabet> domain;
  if (layout.side_info) domain.push_back(composed.alphabet(*layout.side_info));
  for (const auto& z : layout.aux) domain.push_back(composed.alphabet(z));
  return domain;
}

void CheckMeasures(const std::vector<DistortionMeasure>& measures,
                   const std::vector<Alphabet>& sources) {
  if (measures.empty()) Fail(ErrorCode::kInvalidArgument, "at least one distortion measure required");
  for (const auto& d : measures) {
    if (d.sources.size() != sources.size() || d.reproductions.size() != sources.size()) {
      Fail(ErrorCode::kShapeMismatch, "distortion measure does not match the terminal count");
    }
    for (std::size_t m = 0; m < sources.size(); ++m) {
      if (d.sources[m].size() != sources[m].size()) {
        Fail(ErrorCode::kShapeMismatch, "distortion source alphabet size differs for terminal " +
                                            sources[m].name());
      }
      if (d.reproductions[m].size() != measures.front().reproductions[m].size()) {
        Fail(ErrorCode::kShapeMismatch, "distortion measures disagree on reproduction alphabets");
      }
    }
  }
}

// Greedy vertex for one ordering; see CornerPoints.
void GreedyCorner(const std::vector<double>& bounds, const std::vector<std::size_t>& order,
                  std::vector<double>& rates) {
  std::fill(rates.begin(), rates.end(), 0.0);
  std::size_t prefix = 0;
  for (std::size_t m : order) {
    const std::size_t bit = std::size_t{1} << m;
    prefix |= bit;
    double best = 0.0;
    const std::size_t rest = prefix & ~bit;
    for (std::size_t sub = rest;; sub = (sub - 1) & rest) {
      double v = bounds[(sub | bit) - 1];
      for (std::size_t j = 0; j < rates.size(); ++j) {
        if (sub >> j & 1) v -= rates[j];
      }
      best = std::max(best, v);
      if (sub == 0) break;
    }
    rates[m] = best;
  }
}

std::vector<std::vector<std::size_t>> Orderings(std::size_t m) {
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<std::size_t>> out;
  do out.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Distortion measures and layout.

DistortionMeasure DistortionMeasure::Make(int k_index, std::vector<Alphabet> sources,
                                          std::vector<Alphabet> reproductions,
                                          std::vector<double> table, bool additive) {
  if (sources.size() != reproductions.size()) {
    Fail(ErrorCode::kShapeMismatch, "distortion needs one reproduction alphabet per source");
  }
  if (table.size() != CellCount(sources) * CellCount(reproductions)) {
    Fail(ErrorCode::kShapeMismatch, "distortion table has " + std::to_string(table.size()) +
                                        " entries, expected " +
                                        std::to_string(CellCount(sources) * CellCount(reproductions)));
  }
  for (double v : table) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      Fail(ErrorCode::kNegativeMass, "distortion entries must be finite and nonnegative");
    }
  }
  return DistortionMeasure{k_index, std::move(sources), std::move(reproductions), std::move(table),
                           additive};
}

std::size_t DistortionMeasure::source_cells() const { return CellCount(sources); }
std::size_t DistortionMeasure::reproduction_cells() const { return CellCount(reproductions); }

double DistortionMeasure::Max() const {
  return table.empty() ? 0.0 : *std::max_element(table.begin(), table.end());
}

std::vector<Alphabet> DefaultReproductions(const std::vector<Alphabet>& sources) {
  std::vector<Alphabet> out;
  for (std::size_t m = 0; m < sources.size(); ++m) {
    out.push_back(sources[m].Renamed("Y" + std::to_string(m + 1)));
  }
  return out;
}

DistortionMeasure HammingMeasure(const std::vector<Alphabet>& sources, std::size_t m,
                                 int k_index) {
  if (m >= sources.size()) Fail(ErrorCode::kInvalidArgument, "terminal index out of range");
  const auto repro = DefaultReproductions(sources);
  const std::size_t xs = CellCount(sources), ys = CellCount(repro);
  std::size_t stride = 1;
  for (std::size_t i = m + 1; i < sources.size(); ++i) stride *= sources[i].size();
  std::vector<double> table(xs * ys);
  for (std::size_t x = 0; x < xs; ++x) {
    for (std::size_t y = 0; y < ys; ++y) {
      const std::size_t xd = x / stride % sources[m].size(), yd = y / stride % sources[m].size();
      table[x * ys + y] = xd == yd ? 0.0 : 1.0;
    }
  }
  return DistortionMeasure::Make(k_index, sources, repro, std::move(table));
}

std::vector<DistortionMeasure> HammingMeasures(const std::vector<Alphabet>& sources) {
  std::vector<DistortionMeasure> out;
  for (std::size_t m = 0; m < sources.size(); ++m) {
    out.push_back(HammingMeasure(sources, m, static_cast<int>(m)));
  }
  return out;
}

RegionLayout LayoutOf(const SourceModel& model) {
  RegionLayout layout;
  layout.terminals = model.terminals();
  layout.side_info = model.side_info();
  const auto names = model.names();
  for (std::size_t m = 0; m < layout.terminals.size(); ++m) {
    std::string z = "Z" + std::to_string(m + 1);
    if (std::find(names.begin(), names.end(), z) != names.end()) {
      Fail(ErrorCode::kInvalidArgument, "model variable '" + z + "' clashes with an auxiliary name");
    }
    layout.aux.push_back(std::move(z));
  }
  return layout;
}

// ---------------------------------------------------------------------------
// Reconstruction maps.

ReconMap::ReconMap(std::vector<Alphabet> domain, std::vector<Alphabet> outputs,
                   std::vector<std::size_t> table, std::vector<char> undefined)
    : domain_(std::move(domain)),
      outputs_(std::move(outputs)),
      table_(std::move(table)),
      undefined_(std::move(undefined)) {
  if (table_.size() != CellCount(domain_)) {
    Fail(ErrorCode::kShapeMismatch, "recon table size does not match its domain");
  }
  const std::size_t ys = CellCount(outputs_);
  for (std::size_t v : table_) {
    if (v >= ys) Fail(ErrorCode::kShapeMismatch, "recon output index out of range");
  }
  if (undefined_.empty()) undefined_.assign(table_.size(), 0);
  if (undefined_.size() != table_.size()) {
    Fail(ErrorCode::kShapeMismatch, "recon undefined flags do not match its domain");
  }
  out_strides_.assign(outputs_.size(), 1);
  for (std::size_t i = outputs_.size(); i-- > 1;) {
    out_strides_[i - 1] = out_strides_[i] * outputs_[i].size();
  }
}

std::size_t ReconMap::Output(std::size_t domain_flat, std::size_t m) const {
  return table_[domain_flat] / out_strides_[m] % outputs_[m].size();
}

bool ReconMap::any_undefined() const {
  return std::any_of(undefined_.begin(), undefined_.end(), [](char c) { return c != 0; });
}

std::vector<std::size_t> AuxConfig::aux_sizes() const {
  std::vector<std::size_t> out;
  for (const auto& c : channels) out.push_back(c.output().size());
  return out;
}

// ---------------------------------------------------------------------------
// Name-based single-letter quantities.

JointPmf ComposeForRegion(const JointPmf& source, const RegionLayout& layout,
                          const std::vector<Channel>& channels) {
  if (channels.size() != layout.aux.size()) {
    Fail(ErrorCode::kShapeMismatch, "need one test channel per terminal");
  }
  std::vector<Channel> renamed;
  for (std::size_t m = 0; m < channels.size(); ++m) {
    const auto t = channels[m].table();
    renamed.push_back(Channel::Make(channels[m].input(),
                                    channels[m].output().Renamed(layout.aux[m]),
                                    std::vector<double>(t.begin(), t.end())));
  }
  return ComposeWithTestChannels(source, layout.terminals, renamed);
}

double SubsetBound(const JointPmf& composed, const RegionLayout& layout,
                   const std::vector<std::size_t>& subset) {
  if (subset.empty()) Fail(ErrorCode::kEmptySubset, "subset bound over an empty set");
  const std::size_t m_count = layout.terminals.size();
  std::vector<char> in(m_count, 0);
  for (std::size_t m : subset) {
    if (m >= m_count || in[m]) Fail(ErrorCode::kInvalidArgument, "invalid terminal subset");
    in[m] = 1;
  }
  double bound = 0.0;
  VarSet za, rest;
  if (layout.side_info) rest.push_back(*layout.side_info);
  for (std::size_t m = 0; m < m_count; ++m) {
    if (in[m]) {
      bound += MutualInfo(composed, {layout.terminals[m]}, {layout.aux[m]});
      za.push_back(layout.aux[m]);
    } else {
      rest.push_back(layout.aux[m]);
    }
  }
  bound -= MultiInfo(composed, za);
  if (!rest.empty()) bound -= MutualInfo(composed, za, rest);
  return bound;
}

std::vector<double> AllSubsetBounds(const JointPmf& composed, const RegionLayout& layout) {
  const std::size_t m_count = layout.terminals.size();
  std::vector<double> out;
  for (std::size_t mask = 1; mask < (std::size_t{1} << m_count); ++mask) {
    std::vector<std::size_t> subset;
    for (std::size_t m = 0; m < m_count; ++m) {
      if (mask >> m & 1) subset.push_back(m);
    }
    out.push_back(SubsetBound(composed, layout, subset));
  }
  return out;
}

std::pair<double, double> BtIdentityCheck(const JointPmf& composed, const RegionLayout& layout) {
  if (layout.terminals.size() != 2) {
    Fail(ErrorCode::kInvalidArgument, "the Berger-Tung identity needs two terminals");
  }
  const auto& x = layout.terminals;
  const auto& z = layout.aux;
  VarSet src = x;
  if (layout.side_info) src.push_back(*layout.side_info);
  const JointPmf ps = Marginalize(composed, src);
  const Projection to_src(composed, ps.variables());
  const Channel w1 = Condition(composed, {z[0]}, {x[0]});
  const Channel w2 = Condition(composed, {z[1]}, {x[1]});
  const std::size_t ix1 = composed.IndexOf(x[0]), ix2 = composed.IndexOf(x[1]);
  const std::size_t iz1 = composed.IndexOf(z[0]), iz2 = composed.IndexOf(z[1]);
  for (std::size_t f = 0; f < composed.size(); ++f) {
    const std::size_t x1 = composed.Digit(f, ix1), x2 = composed.Digit(f, ix2);
    const double w = (w1.defined(x1) ? w1(x1, composed.Digit(f, iz1)) : 0.0) *
                     (w2.defined(x2) ? w2(x2, composed.Digit(f, iz2)) : 0.0);
    const double expect = ps.prob(to_src(composed, f)) * w;
    if (std::abs(composed.prob(f) - expect) > 1e-10) {
      Fail(ErrorCode::kFactorizationViolated,
           "joint is not source x P(Z1|X1) x P(Z2|X2) at cell " + std::to_string(f));
    }
  }
  const double lhs = MutualInfo(composed, {x[0]}, {z[0]}) - MutualInfo(composed, {z[0]}, {z[1]});
  const double rhs = CondMutualInfo(composed, {x[0]}, {z[0]}, {z[1]});
  return {lhs, rhs};
}

std::vector<double> ExpectedDistortion(const JointPmf& composed, const RegionLayout& layout,
                                       const ReconMap& h,
                                       const std::vector<DistortionMeasure>& measures) {
  const auto xs = AlphabetsOf(composed, layout.terminals);
  CheckMeasures(measures, xs);
  const Projection to_x(composed, xs);
  const Projection to_dom(composed, h.domain());
  std::vector<double> out(measures.size(), 0.0);
  for (std::size_t f = 0; f < composed.size(); ++f) {
    const double p = composed.prob(f);
    if (p == 0.0) continue;
    const std::size_t x = to_x(composed, f), y = h(to_dom(composed, f));
    for (std::size_t k = 0; k < measures.size(); ++k) out[k] += p * measures[k](x, y);
  }
  return out;
}

ReconMap OptimalRecon(const JointPmf& composed, const RegionLayout& layout,
                      const std::vector<DistortionMeasure>& measures) {
  const auto xs = AlphabetsOf(composed, layout.terminals);
  CheckMeasures(measures, xs);
  auto domain = ReconDomain(composed, layout);
  const Projection to_x(composed, xs);
  const Projection to_dom(composed, domain);
  const std::size_t ds = CellCount(domain);
  const std::size_t ys = measures.front().reproduction_cells();
  std::vector<double> score(ds * ys, 0.0), mass(ds, 0.0);
  for (std::size_t f = 0; f < composed.size(); ++f) {
    const double p = composed.prob(f);
    if (p == 0.0) continue;
    const std::size_t x = to_x(composed, f), d = to_dom(composed, f);
    mass[d] += p;
    for (std::size_t y = 0; y < ys; ++y) {
      double sum = 0.0;
      for (const auto& m : measures) sum += m(x, y);
      score[d * ys + y] += p * sum;
    }
  }
  std::vector<std::size_t> table(ds, 0);
  std::vector<char> undefined(ds, 0);
  for (std::size_t d = 0; d < ds; ++d) {
    if (mass[d] == 0.0) {
      undefined[d] = 1;
      continue;
    }
    for (std::size_t y = 1; y < ys; ++y) {
      if (score[d * ys + y] < score[d * ys + table[d]]) table[d] = y;
    }
  }
  return ReconMap(std::move(domain), measures.front().reproductions, std::move(table),
                  std::move(undefined));
}

std::vector<std::vector<double>> CornerPoints(const std::vector<double>& bounds, std::size_t m) {
  if (bounds.size() != (std::size_t{1} << m) - 1) {
    Fail(ErrorCode::kShapeMismatch, "bound vector does not cover every nonempty subset");
  }
  std::vector<std::vector<double>> out;
  std::vector<double> rates(m);
  for (const auto& order : Orderings(m)) {
    GreedyCorner(bounds, order, rates);
    if (std::find(out.begin(), out.end(), rates) == out.end()) out.push_back(rates);
  }
  return out;
}

std::vector<std::vector<double>> RegionFrontier::corners() const {
  std::vector<std::vector<double>> out;
  for (const auto& p : points) out.push_back(p.rates);
  return out;
}

// ---------------------------------------------------------------------------
// Fast evaluator.

RegionEvaluator::RegionEvaluator(std::vector<std::pair<double, JointPmf>> components,
                                 RegionLayout layout, std::vector<DistortionMeasure> measures)
    : layout_(std::move(layout)), measures_(std::move(measures)) {
  if (components.empty()) Fail(ErrorCode::kInvalidArgument, "no source components");
  const JointPmf& first = components.front().second;
  x_alpha_ = AlphabetsOf(first, layout_.terminals);
  if (layout_.side_info) s_alpha_ = first.alphabet(*layout_.side_info);
  CheckMeasures(measures_, x_alpha_);
  for (auto& [weight, base] : components) {
    if (AlphabetsOf(base, layout_.terminals) != x_alpha_ ||
        (s_alpha_ && !(base.alphabet(*layout_.side_info) == *s_alpha_))) {
      Fail(ErrorCode::kAlphabetMismatch, "source components use different alphabets");
    }
    Component c{weight, {}, {}};
    std::vector<std::size_t> xi;
    for (const auto& t : layout_.terminals) xi.push_back(base.IndexOf(t));
    const std::size_t si = s_alpha_ ? base.IndexOf(*layout_.side_info) : 0;
    for (const auto& a : x_alpha_) c.px.emplace_back(a.size(), 0.0);
    for (std::size_t f = 0; f < base.size(); ++f) {
      const double p = base.prob(f);
      if (p == 0.0) continue;
      Cell cell{p, {}, 0, s_alpha_ ? base.Digit(f, si) : 0};
      for (std::size_t m = 0; m < xi.size(); ++m) {
        const std::size_t d = base.Digit(f, xi[m]);
        cell.x.push_back(d);
        cell.x_flat = cell.x_flat * x_alpha_[m].size() + d;
        c.px[m][d] += p;
      }
      c.cells.push_back(std::move(cell));
    }
    components_.push_back(std::move(c));
  }
}

Evaluation RegionEvaluator::Evaluate(const std::vector<Channel>& channels) const {
  const std::size_t mc = num_terminals();
  if (channels.size() != mc) Fail(ErrorCode::kShapeMismatch, "need one test channel per terminal");
  std::vector<std::size_t> zs(mc);
  for (std::size_t m = 0; m < mc; ++m) {
    if (channels[m].input().size() != x_alpha_[m].size()) {
      Fail(ErrorCode::kAlphabetMismatch, "channel input does not match terminal " +
                                             layout_.terminals[m]);
    }
    zs[m] = channels[m].output().size();
  }
  std::size_t zc = 1;
  for (std::size_t v : zs) zc *= v;
  const std::size_t ns = s_alpha_ ? s_alpha_->size() : 1;
  const std::size_t ds = ns * zc;
  const std::size_t xc = CellCount(x_alpha_);
  const std::size_t ys = measures_.front().reproduction_cells();
  const std::size_t kc = measures_.size();
  const std::size_t full = (std::size_t{1} << mc) - 1;

  // proj[B][z]: index of z restricted to the terminals in B.
  std::vector<std::vector<std::size_t>> proj(full + 1, std::vector<std::size_t>(zc, 0));
  std::vector<std::size_t> proj_size(full + 1, 1);
  for (std::size_t b = 0; b <= full; ++b) {
    for (std::size_t z = 0; z < zc; ++z) {
      std::size_t rem = z, idx = 0, mult = 1;
      for (std::size_t m = mc; m-- > 0;) {
        const std::size_t digit = rem % zs[m];
        rem /= zs[m];
        if (b >> m & 1) {
          idx += digit * mult;
          mult *= zs[m];
        }
      }
      proj[b][z] = idx;
      proj_size[b] = mult;
    }
  }

  std::vector<std::vector<double>> joint(components_.size(), std::vector<double>(ds * xc, 0.0));
  std::vector<double> wz;
  for (std::size_t c = 0; c < components_.size(); ++c) {
    auto& jc = joint[c];
    for (const auto& cell : components_[c].cells) {
      wz.assign(1, cell.p);
      for (std::size_t m = 0; m < mc; ++m) {
        const auto row = channels[m].row(cell.x[m]);
        std::vector<double> next(wz.size() * zs[m]);
        for (std::size_t i = 0; i < wz.size(); ++i) {
          for (std::size_t k = 0; k < zs[m]; ++k) next[i * zs[m] + k] = wz[i] * row[k];
        }
        wz.swap(next);
      }
      for (std::size_t z = 0; z < zc; ++z) jc[(cell.s * zc + z) * xc + cell.x_flat] += wz[z];
    }
  }

  // Optimal recon under the weighted mixture.
  std::vector<double> dsum(xc * ys, 0.0);
  for (std::size_t x = 0; x < xc; ++x) {
    for (std::size_t y = 0; y < ys; ++y) {
      for (const auto& d : measures_) dsum[x * ys + y] += d(x, y);
    }
  }
  std::vector<std::size_t> table(ds, 0);
  std::vector<char> undefined(ds, 0);
  std::vector<double> score(ys);
  for (std::size_t d = 0; d < ds; ++d) {
    std::fill(score.begin(), score.end(), 0.0);
    double mass = 0.0;
    for (std::size_t c = 0; c < components_.size(); ++c) {
      const double w = components_[c].weight;
      const double* row = &joint[c][d * xc];
      std::vector<double> sc(ys, 0.0);
      double mc_mass = 0.0;
      for (std::size_t x = 0; x < xc; ++x) {
        if (row[x] == 0.0) continue;
        mc_mass += row[x];
        for (std::size_t y = 0; y < ys; ++y) sc[y] += row[x] * dsum[x * ys + y];
      }
      mass += w * mc_mass;
      for (std::size_t y = 0; y < ys; ++y) score[y] += w * sc[y];
    }
    if (mass == 0.0) {
      undefined[d] = 1;
      continue;
    }
    for (std::size_t y = 1; y < ys; ++y) {
      if (score[y] < score[table[d]]) table[d] = y;
    }
  }

  Evaluation out{std::vector<double>(full, kInf), std::vector<double>(kc, 0.0),
                 ReconMap({}, {}, {0})};
  std::vector<double> i_max(mc, -kInf), mi_min(full, kInf), cpl_min(full, kInf);
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const auto& jc = joint[c];
    for (std::size_t k = 0; k < kc; ++k) {
      double e = 0.0;
      for (std::size_t d = 0; d < ds; ++d) {
        for (std::size_t x = 0; x < xc; ++x) {
          const double p = jc[d * xc + x];
          if (p != 0.0) e += p * measures_[k](x, table[d]);
        }
      }
      out.distortion[k] = std::max(out.distortion[k], e);
    }
    std::vector<double> q(ds, 0.0);
    for (std::size_t d = 0; d < ds; ++d) {
      for (std::size_t x = 0; x < xc; ++x) q[d] += jc[d * xc + x];
    }
    // H(S, Z_B) and H(Z_B) for every B.
    std::vector<double> hsz(full + 1), hz(full + 1);
    for (std::size_t b = 0; b <= full; ++b) {
      std::vector<double> msz(ns * proj_size[b], 0.0), mz(proj_size[b], 0.0);
      for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t z = 0; z < zc; ++z) msz[s * proj_size[b] + proj[b][z]] += q[s * zc + z];
      }
      for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t i = 0; i < proj_size[b]; ++i) mz[i] += msz[s * proj_size[b] + i];
      }
      hsz[b] = EntropyOf(msz);
      hz[b] = EntropyOf(mz);
    }
    for (std::size_t m = 0; m < mc; ++m) {
      double hcond = 0.0;
      for (std::size_t x = 0; x < x_alpha_[m].size(); ++x) {
        const double px = components_[c].px[m][x];
        if (px == 0.0) continue;
        const auto row = channels[m].row(x);
        hcond += px * EntropyOf(std::vector<double>(row.begin(), row.end()));
      }
      i_max[m] = std::max(i_max[m], hz[std::size_t{1} << m] - hcond);
    }
    for (std::size_t a = 1; a <= full; ++a) {
      double single = 0.0;
      for (std::size_t m = 0; m < mc; ++m) {
        if (a >> m & 1) single += hz[std::size_t{1} << m];
      }
      const double mi = (a & (a - 1)) == 0 ? 0.0 : single - hz[a];
      mi_min[a - 1] = std::min(mi_min[a - 1], mi);
      cpl_min[a - 1] = std::min(cpl_min[a - 1], hz[a] + hsz[full & ~a] - hsz[full]);
    }
  }
  for (std::size_t a = 1; a <= full; ++a) {
    double sum = 0.0;
    for (std::size_t m = 0; m < mc; ++m) {
      if (a >> m & 1) sum += i_max[m];
    }
    out.bounds[a - 1] = sum - mi_min[a - 1] - cpl_min[a - 1];
  }

  std::vector<Alphabet> domain;
  if (s_alpha_) domain.push_back(*s_alpha_);
  for (std::size_t m = 0; m < mc; ++m) domain.push_back(channels[m].output().Renamed(layout_.aux[m]));
  out.recon = ReconMap(std::move(domain), measures_.front().reproductions, std::move(table),
                       std::move(undefined));
  return out;
}

std::vector<double> RegionEvaluator::DistortionFloor() const {
  std::vector<double> out(measures_.size(), 0.0);
  for (std::size_t k = 0; k < measures_.size(); ++k) {
    const auto& d = measures_[k];
    const std::size_t ys = d.reproduction_cells();
    for (const auto& c : components_) {
      double e = 0.0;
      for (const auto& cell : c.cells) {
        double best = kInf;
        for (std::size_t y = 0; y < ys; ++y) best = std::min(best, d(cell.x_flat, y));
        e += cell.p * best;
      }
      out[k] = std::max(out[k], e);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Search.

namespace {

using Rows = std::vector<std::vector<double>>;  // per terminal, row-major P(z|x)

struct Candidate {
  std::vector<Channel> channels;
  Evaluation eval;
};

class Searcher {
 public:
  Searcher(const SourceModel& model, const std::vector<DistortionMeasure>& measures,
           const std::vector<double>& targets, const RegionOptions& options)
      : layout_(LayoutOf(model)),
        eval_(model.MemorylessComponents(), layout_, measures),
        targets_(targets),
        options_(options) {
    const std::size_t mc = layout_.num_terminals();
    if (mc == 0 || mc > 3) Fail(ErrorCode::kInvalidArgument, "region search supports 1 to 3 terminals");
    if (targets_.size() != measures.size()) {
      Fail(ErrorCode::kInvalidArgument, "need one distortion target per measure");
    }
    for (double t : targets_) {
      if (std::isnan(t) || t < 0.0) Fail(ErrorCode::kInvalidArgument, "distortion targets must be >= 0");
    }
    if (options_.restarts < 0 || options_.max_sweeps < 0) {
      Fail(ErrorCode::kInvalidArgument, "restarts and sweeps must be nonnegative");
    }
    zs_ = options_.aux_sizes;
    if (zs_.empty()) {
      for (std::size_t m = 0; m < mc; ++m) zs_.push_back(eval_.source_alphabet(m).size() + 2);
    }
    if (zs_.size() != mc) Fail(ErrorCode::kInvalidArgument, "need one auxiliary size per terminal");
    for (std::size_t z : zs_) {
      if (z == 0 || z > 64) Fail(ErrorCode::kInvalidArgument, "auxiliary sizes must lie in [1, 64]");
    }
    const auto floor = eval_.DistortionFloor();
    for (std::size_t k = 0; k < floor.size(); ++k) {
      if (floor[k] > targets_[k] + kDistortionSlack) {
        Fail(ErrorCode::kInfeasibleDistortion,
             "distortion target " + std::to_string(targets_[k]) + " for measure " +
                 std::to_string(k + 1) + " is below the floor " + std::to_string(floor[k]));
      }
    }
    weights_.push_back(std::vector<double>(mc, 1.0));
    if (mc > 1) {
      for (const auto& order : Orderings(mc)) {
        std::vector<double> w(mc);
        for (std::size_t i = 0; i < mc; ++i) w[order[i]] = static_cast<double>(i + 1);
        weights_.push_back(w);
      }
    }
  }

  std::vector<Candidate> Pool() const {
    std::vector<Candidate> out;
    const std::size_t mc = layout_.num_terminals();
    if (options_.include_pool) {
      for (std::size_t mask = 0; mask < (std::size_t{1} << mc); ++mask) {
        std::vector<Channel> ch;
        bool ok = true;
        for (std::size_t m = 0; m < mc; ++m) {
          const Alphabet& x = eval_.source_alphabet(m);
          const Alphabet z = Alphabet::Indexed(layout_.aux[m], zs_[m]);
          if (mask >> m & 1) {
            if (zs_[m] < x.size()) {
              ok = false;
              break;
            }
            ch.push_back(Channel::Identity(x, z));
          } else {
            ch.push_back(Channel::Constant(x, z));
          }
        }
        if (ok) Keep(std::move(ch), out);
      }
    }
    for (const auto& w : options_.witnesses) Keep(w.channels, out);
    return out;
  }

  std::optional<Candidate> Restart(int r) const {
    Rng rng(DeriveSeed(options_.seed, {static_cast<std::uint64_t>(r)}));
    const std::size_t mc = layout_.num_terminals();
    Rows rows(mc);
    for (std::size_t m = 0; m < mc; ++m) {
      const std::size_t xs = eval_.source_alphabet(m).size();
      rows[m].resize(xs * zs_[m]);
      for (std::size_t x = 0; x < xs; ++x) {
        double s = 0.0;
        for (std::size_t z = 0; z < zs_[m]; ++z) s += (rows[m][x * zs_[m] + z] = rng.Exponential());
        for (std::size_t z = 0; z < zs_[m]; ++z) rows[m][x * zs_[m] + z] /= s;
      }
    }
    const auto& w = weights_[static_cast<std::size_t>(r) % weights_.size()];
    for (double mu : {10.0, 1000.0}) Descend(rows, w, mu);
    std::vector<Channel> ch = Channels(rows);
    if (!Feasible(eval_.Evaluate(ch))) {
      if (!Repair(rows)) return std::nullopt;
      ch = Channels(rows);
    }
    std::vector<Candidate> out;
    Keep(std::move(ch), out);
    if (out.empty()) return std::nullopt;
    return std::move(out.front());
  }

  RegionFrontier Build(const std::vector<Candidate>& candidates) const {
    const std::size_t mc = layout_.num_terminals();
    std::vector<FrontierPoint> all;
    for (const auto& c : candidates) {
      for (auto& rates : CornerPoints(c.eval.bounds, mc)) {
        all.push_back(FrontierPoint{std::move(rates), c.eval.bounds, c.eval.distortion,
                                    AuxConfig{c.channels, c.eval.recon}});
      }
    }
    if (all.empty()) {
      Fail(ErrorCode::kInfeasibleDistortion, "no test-channel configuration meets the targets");
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const FrontierPoint& a, const FrontierPoint& b) { return a.rates < b.rates; });
    RegionFrontier out;
    out.terminals = mc;
    for (std::size_t i = 0; i < all.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < all.size() && !dominated; ++j) {
        if (j == i) continue;
        bool le = true, same = true;
        for (std::size_t m = 0; m < mc && le; ++m) {
          le = all[j].rates[m] <= all[i].rates[m] + kRateTie;
          same = same && std::abs(all[j].rates[m] - all[i].rates[m]) <= kRateTie;
        }
        // Coincident tuples: keep the earliest.
        dominated = le && (!same || j < i);
      }
      if (!dominated) out.points.push_back(all[i]);
    }
    out.subset_bounds.assign((std::size_t{1} << mc) - 1, kInf);
    for (const auto& p : out.points) {
      for (std::size_t a = 1; a < (std::size_t{1} << mc); ++a) {
        double s = 0.0;
        for (std::size_t m = 0; m < mc; ++m) {
          if (a >> m & 1) s += p.rates[m];
        }
        out.subset_bounds[a - 1] = std::min(out.subset_bounds[a - 1], s);
      }
    }
    return out;
  }

 private:
  bool Feasible(const Evaluation& e) const {
    for (std::size_t k = 0; k < targets_.size(); ++k) {
      if (e.distortion[k] > targets_[k] + kDistortionSlack) return false;
    }
    return true;
  }

  void Keep(std::vector<Channel> ch, std::vector<Candidate>& out) const {
    Evaluation e = eval_.Evaluate(ch);
    if (Feasible(e)) out.push_back(Candidate{std::move(ch), std::move(e)});
  }

  std::vector<Channel> Channels(const Rows& rows) const {
    std::vector<Channel> ch;
    for (std::size_t m = 0; m < rows.size(); ++m) {
      ch.push_back(Channel::Make(eval_.source_alphabet(m), Alphabet::Indexed(layout_.aux[m], zs_[m]),
                                 rows[m]));
    }
    return ch;
  }

  double Objective(const Rows& rows, const std::vector<double>& w, double mu) const {
    const Evaluation e = eval_.Evaluate(Channels(rows));
    const std::size_t mc = rows.size();
    double best = kInf;
    std::vector<double> rates(mc);
    for (const auto& order : Orderings(mc)) {
      GreedyCorner(e.bounds, order, rates);
      double v = 0.0;
      for (std::size_t m = 0; m < mc; ++m) v += w[m] * rates[m];
      best = std::min(best, v);
    }
    for (std::size_t k = 0; k < targets_.size(); ++k) {
      if (std::isfinite(targets_[k])) best += mu * std::max(0.0, e.distortion[k] - targets_[k]);
    }
    return best;
  }

  // Moves mass between two entries of one channel row: coarse grid, then
  // golden-section refinement around the best grid point.
  double LineSearch(Rows& rows, std::size_t m, std::size_t ia, std::size_t ib,
                    const std::vector<double>& w, double mu, double current) const {
    double& a = rows[m][ia];
    double& b = rows[m][ib];
    const double total = a + b;
    const double a0 = a;
    if (total <= 0.0) return current;
    auto f = [&](double t) {
      a = std::clamp(t, 0.0, total);
      b = std::max(0.0, total - a);
      return Objective(rows, w, mu);
    };
    constexpr int kGrid = 10;
    double best_t = a0, best_v = current;
    for (int i = 0; i <= kGrid; ++i) {
      const double t = total * i / kGrid;
      const double v = f(t);
      if (v < best_v) {
        best_v = v;
        best_t = t;
      }
    }
    double lo = std::max(0.0, best_t - total / kGrid), hi = std::min(total, best_t + total / kGrid);
    constexpr double kPhi = 0.6180339887498949;
    double c = hi - kPhi * (hi - lo), d = lo + kPhi * (hi - lo);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 30 && hi - lo > 1e-10; ++it) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - kPhi * (hi - lo);
        fc = f(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + kPhi * (hi - lo);
        fd = f(d);
      }
    }
    if (fc < best_v) {
      best_v = fc;
      best_t = c;
    }
    if (fd < best_v) {
      best_v = fd;
      best_t = d;
    }
    a = std::clamp(best_t, 0.0, total);
    b = std::max(0.0, total - a);
    return best_v;
  }

  void Descend(Rows& rows, const std::vector<double>& w, double mu) const {
    double value = Objective(rows, w, mu);
    for (int sweep = 0; sweep < options_.max_sweeps; ++sweep) {
      const double start = value;
      for (std::size_t m = 0; m < rows.size(); ++m) {
        const std::size_t zn = zs_[m];
        const std::size_t xs = rows[m].size() / zn;
        for (std::size_t x = 0; x < xs; ++x) {
          for (std::size_t i = 0; i < zn; ++i) {
            for (std::size_t j = i + 1; j < zn; ++j) {
              value = LineSearch(rows, m, x * zn + i, x * zn + j, w, mu, value);
            }
          }
        }
      }
      if (start - value < options_.tolerance) break;
    }
  }

  // Mixes every row toward the identity embedding until the targets hold.
  bool Repair(Rows& rows) const {
    const std::size_t mc = rows.size();
    for (std::size_t m = 0; m < mc; ++m) {
      if (zs_[m] < eval_.source_alphabet(m).size()) return false;
    }
    auto mixed = [&](double lambda) {
      Rows out = rows;
      for (std::size_t m = 0; m < mc; ++m) {
        const std::size_t zn = zs_[m];
        for (std::size_t x = 0; x < out[m].size() / zn; ++x) {
          for (std::size_t z = 0; z < zn; ++z) {
            double& v = out[m][x * zn + z];
            v = (1.0 - lambda) * v + (z == x ? lambda : 0.0);
          }
        }
      }
      return out;
    };
    if (!Feasible(eval_.Evaluate(Channels(mixed(1.0))))) return false;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (Feasible(eval_.Evaluate(Channels(mixed(mid))))) hi = mid; else lo = mid;
    }
    rows = mixed(hi);
    return true;
  }

  RegionLayout layout_;
  RegionEvaluator eval_;
  std::vector<double> targets_;
  RegionOptions options_;
  std::vector<std::size_t> zs_;
  std::vector<std::vector<double>> weights_;
};

RegionFrontier RunSearch(const SourceModel& model, const std::vector<DistortionMeasure>& measures,
                         const std::vector<double>& targets, const RegionOptions& options,
                         bool parallel) {
  const Searcher searcher(model, measures, targets, options);
  std::vector<Candidate> candidates = searcher.Pool();
  std::vector<std::optional<Candidate>> restarts(static_cast<std::size_t>(options.restarts));
  if (parallel) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < options.restarts; ++r) {
      try {
        restarts[static_cast<std::size_t>(r)] = searcher.Restart(r);
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (int r = 0; r < options.restarts; ++r) restarts[static_cast<std::size_t>(r)] = searcher.Restart(r);
  }
  for (auto& c : restarts) {
    if (c) candidates.push_back(std::move(*c));
  }
  return searcher.Build(candidates);
}

}  // namespace

RegionFrontier SearchRegion(const SourceModel& model,
                            const std::vector<DistortionMeasure>& measures,
                            const std::vector<double>& targets, const RegionOptions& options) {
  return RunSearch(model, measures, targets, options, true);
}

RegionFrontier SearchRegionSerial(const SourceModel& model,
                                  const std::vector<DistortionMeasure>& measures,
                                  const std::vector<double>& targets,
                                  const RegionOptions& options) {
  return RunSearch(model, measures, targets, options, false);
}

double WynerZivRate(const SourceModel& model, const std::vector<DistortionMeasure>& measures,
                    const std::vector<double>& targets, const RegionOptions& options) {
  if (model.num_terminals() != 1 || !model.side_info()) {
    Fail(ErrorCode::kInvalidArgument, "Wyner-Ziv needs one terminal and side information");
  }
  return SearchRegion(model, measures, targets, options).subset_bounds.front();
}

RegionFrontier MixedRegion(const SourceModel& a, const SourceModel& b, double alpha,
                           const std::vector<DistortionMeasure>& measures,
                           const std::vector<double>& targets, const RegionOptions& options) {
  return SearchRegion(SourceModel::MakeMixed(alpha, a, b), measures, targets, options);
}

}  // namespace mtrd
