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

#include "mtrd/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mtrd/error.hpp"

namespace mtrd {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string JoinNames(const VarSet& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

// A density is a signed sum of log-marginals: sum_i coef_i ln P(U_i), where
// P is the model law or, for `reference` terms, the reference joint.
struct LogTerm {
  double coef;
  VarSet vars;
  bool reference = false;
};

struct DensityForm {
  std::vector<LogTerm> terms;
  const JointPmf* reference = nullptr;
};

VarSet Cat(const VarSet& a, const VarSet& b) {
  VarSet out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void RequireNonEmpty(const VarSet& v, const char* what) {
  if (v.empty()) Fail(ErrorCode::kInvalidArgument, std::string(what) + " is empty");
}

DensityForm FormOf(const DensityKind& kind) {
  DensityForm f;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, EntropyDensity>) {
          RequireNonEmpty(k.x, "entropy variables");
          f.terms = {{-1.0, k.x}};
        } else if constexpr (std::is_same_v<K, CondEntropyDensity>) {
          RequireNonEmpty(k.x, "entropy variables");
          f.terms = {{-1.0, Cat(k.x, k.given)}};
          if (!k.given.empty()) f.terms.push_back({1.0, k.given});
        } else if constexpr (std::is_same_v<K, MutualInfoDensity>) {
          RequireNonEmpty(k.x, "first argument");
          RequireNonEmpty(k.y, "second argument");
          f.terms = {{1.0, Cat(k.x, k.y)}, {-1.0, k.x}, {-1.0, k.y}};
        } else if constexpr (std::is_same_v<K, MultiInfoDensity>) {
          if (k.parts.empty()) Fail(ErrorCode::kEmptySubset, "multi-information over empty set");
          f.terms = {{1.0, k.parts}};
          for (const auto& p : k.parts) f.terms.push_back({-1.0, {p}});
        } else if constexpr (std::is_same_v<K, CondMutualInfoDensity>) {
          RequireNonEmpty(k.a, "first argument");
          RequireNonEmpty(k.b, "second argument");
          f.terms = {{1.0, Cat(Cat(k.a, k.b), k.given)}, {-1.0, Cat(k.a, k.given)},
                     {-1.0, Cat(k.b, k.given)}};
          if (!k.given.empty()) f.terms.push_back({1.0, k.given});
        } else {
          RequireNonEmpty(k.x, "divergence variables");
          f.reference = &k.reference;
          f.terms = {{1.0, Cat(k.x, k.given)}, {-1.0, Cat(k.x, k.given), true}};
          if (!k.given.empty()) {
            f.terms.push_back({-1.0, k.given});
            f.terms.push_back({1.0, k.given, true});
          }
        }
      },
      kind);
  return f;
}

// Involved variables in the order the law declares them.
VarSet Involved(const DensityForm& f, const JointPmf& law) {
  std::vector<char> used(law.num_variables(), 0);
  for (const auto& t : f.terms) {
    for (const auto& v : t.vars) used[law.IndexOf(v)] = 1;
  }
  VarSet out;
  for (std::size_t v = 0; v < law.num_variables(); ++v) {
    if (used[v]) out.push_back(law.variables()[v].name());
  }
  return out;
}

// For every cell of `from`, the flat index of its projection into `to`.
std::vector<std::size_t> Projection(const JointPmf& from, const JointPmf& to) {
  std::vector<std::size_t> pos(to.num_variables());
  for (std::size_t k = 0; k < to.num_variables(); ++k) {
    pos[k] = from.IndexOf(to.variables()[k].name());
    if (!from.variables()[pos[k]].SameSymbols(to.variables()[k])) {
      Fail(ErrorCode::kAlphabetMismatch,
           "reference alphabet differs for '" + to.variables()[k].name() + "'");
    }
  }
  std::vector<std::size_t> out(from.size());
  for (std::size_t f = 0; f < from.size(); ++f) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < pos.size(); ++k) idx += from.Digit(f, pos[k]) * to.stride(k);
    out[f] = idx;
  }
  return out;
}

// Per-cell log values of every term over the involved marginal of `law`.
struct TermTables {
  JointPmf marginal;
  // logs[i][u]: ln P_i(projection of cell u); -inf where zero.
  std::vector<std::vector<double>> logs;
};

TermTables BuildTermTables(const DensityForm& f, const JointPmf& law, const VarSet& involved) {
  TermTables tt{Marginalize(law, involved), {}};
  for (const auto& term : f.terms) {
    const JointPmf& source = term.reference ? *f.reference : law;
    const JointPmf table = Marginalize(source, term.vars);
    const auto proj = Projection(tt.marginal, table);
    std::vector<double> logs(tt.marginal.size());
    for (std::size_t u = 0; u < logs.size(); ++u) {
      const double p = table.prob(proj[u]);
      logs[u] = p > 0.0 ? std::log(p) : kNegInf;
    }
    tt.logs.push_back(std::move(logs));
  }
  return tt;
}

void SortAndMerge(std::vector<Atom>& atoms, double tol) {
  std::erase_if(atoms, [](const Atom& a) { return !(a.mass > 0.0); });
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.value < b.value; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (out > 0 && atoms[i].value - atoms[out - 1].value <= tol) {
      Atom& acc = atoms[out - 1];
      const double m = acc.mass + atoms[i].mass;
      acc.value += (atoms[i].value - acc.value) * (atoms[i].mass / m);
      acc.mass = m;
    } else {
      atoms[out++] = atoms[i];
    }
  }
  atoms.resize(out);
}

// Single-letter density atoms of a memoryless law.
std::vector<Atom> LetterAtoms(const DensityForm& f, const JointPmf& law) {
  const VarSet involved = Involved(f, law);
  const TermTables tt = BuildTermTables(f, law, involved);
  std::vector<Atom> atoms;
  for (std::size_t u = 0; u < tt.marginal.size(); ++u) {
    const double p = tt.marginal.prob(u);
    if (p <= 0.0) continue;
    double v = 0.0;
    for (std::size_t i = 0; i < f.terms.size(); ++i) {
      const double l = tt.logs[i][u];
      if (l == kNegInf) {
        Fail(ErrorCode::kUndefinedDensity, "reference law vanishes on the support");
      }
      v += f.terms[i].coef * l;
    }
    atoms.push_back({v, p});
  }
  return atoms;
}

DensitySpectrum IidSpectrum(const DensityForm& f, const JointPmf& base, int n,
                            const SpectrumOptions& opt) {
  std::vector<Atom> letter = LetterAtoms(f, base);
  SortAndMerge(letter, opt.resolution);
  std::vector<Atom> cur{{0.0, 1.0}};
  std::vector<Atom> next;
  for (int t = 1; t <= n; ++t) {
    next.clear();
    next.reserve(cur.size() * letter.size());
    for (const Atom& a : cur) {
      for (const Atom& b : letter) next.push_back({a.value + b.value, a.mass * b.mass});
    }
    SortAndMerge(next, opt.resolution * t);
    if (next.size() > opt.budget) {
      Fail(ErrorCode::kBudgetExceeded, "spectrum at n=" + std::to_string(n) + " exceeds " +
                                           std::to_string(opt.budget) + " atoms");
    }
    cur.swap(next);
  }
  for (Atom& a : cur) a.value /= n;
  return {n, std::move(cur)};
}

double LogAddExp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double Dot(const std::vector<int>& counts, const std::vector<double>& logs) {
  double s = 0.0;
  for (std::size_t u = 0; u < counts.size(); ++u) {
    if (counts[u] == 0) continue;
    if (logs[u] == kNegInf) return kNegInf;
    s += counts[u] * logs[u];
  }
  return s;
}

// Two memoryless components mixed with weights (w, 1 - w). Sequences are
// grouped by joint type over the involved variables; the density of every
// type is evaluated with mixture probabilities and its mass is the mixture
// mass of the type class.
DensitySpectrum MixedSpectrum(const DensityForm& f, const JointPmf& a, const JointPmf& b,
                              double w, int n, const SpectrumOptions& opt) {
  const VarSet involved = Involved(f, a);
  const TermTables ta = BuildTermTables(f, a, involved);
  const TermTables tb = BuildTermTables(f, b, involved);
  std::vector<std::size_t> support;
  for (std::size_t u = 0; u < ta.marginal.size(); ++u) {
    if (ta.marginal.prob(u) > 0.0 || tb.marginal.prob(u) > 0.0) support.push_back(u);
  }
  const std::size_t k = support.size();
  const double types = std::exp(std::lgamma(n + static_cast<double>(k)) - std::lgamma(n + 1.0) -
                                std::lgamma(static_cast<double>(k)));
  if (types > static_cast<double>(opt.budget)) {
    Fail(ErrorCode::kBudgetExceeded, "mixed spectrum at n=" + std::to_string(n) + " needs " +
                                         std::to_string(types) + " types");
  }
  auto restrict = [&](const std::vector<double>& full) {
    std::vector<double> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = full[support[i]];
    return out;
  };
  auto log_marginal = [&](const TermTables& tt) {
    std::vector<double> out(k);
    for (std::size_t i = 0; i < k; ++i) {
      const double p = tt.marginal.prob(support[i]);
      out[i] = p > 0.0 ? std::log(p) : kNegInf;
    }
    return out;
  };
  const auto la = log_marginal(ta);
  const auto lb = log_marginal(tb);
  std::vector<std::vector<double>> term_a, term_b;
  for (std::size_t i = 0; i < f.terms.size(); ++i) {
    term_a.push_back(restrict(ta.logs[i]));
    term_b.push_back(restrict(tb.logs[i]));
  }
  const double lw = std::log(w);
  const double lw1 = std::log1p(-w);
  const double lfact_n = std::lgamma(n + 1.0);

  std::vector<Atom> atoms;
  std::vector<int> counts(k, 0);
  // Enumerate compositions of n into k parts in lexicographic order.
  auto emit = [&] {
    double lmult = lfact_n;
    for (int c : counts) lmult -= std::lgamma(c + 1.0);
    const double lmass = LogAddExp(lw + Dot(counts, la), lw1 + Dot(counts, lb));
    if (lmass == kNegInf) return;
    double v = 0.0;
    for (std::size_t i = 0; i < f.terms.size(); ++i) {
      double l;
      if (f.terms[i].reference) {
        l = Dot(counts, term_a[i]);
      } else {
        l = LogAddExp(lw + Dot(counts, term_a[i]), lw1 + Dot(counts, term_b[i]));
      }
      if (l == kNegInf) Fail(ErrorCode::kUndefinedDensity, "reference law vanishes on the support");
      v += f.terms[i].coef * l;
    }
    atoms.push_back({v / n, std::exp(lmult + lmass)});
  };
  auto rec = [&](auto&& self, std::size_t idx, int left) -> void {
    if (idx + 1 == k) {
      counts[idx] = left;
      emit();
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[idx] = c;
      self(self, idx + 1, left - c);
    }
  };
  if (k > 0) rec(rec, 0, n);
  SortAndMerge(atoms, opt.resolution);
  return {n, std::move(atoms)};
}

DensitySpectrum ExplicitSpectrum(const DensityForm& f, const JointPmf& table, int n,
                                 const SpectrumOptions& opt) {
  if (f.reference) {
    Fail(ErrorCode::kInvalidArgument, "divergence densities need a memoryless model");
  }
  std::vector<Atom> atoms = LetterAtoms(f, table);
  for (Atom& a : atoms) a.value /= n;
  SortAndMerge(atoms, opt.resolution);
  return {n, std::move(atoms)};
}

}  // namespace

std::string DensityLabel(const DensityKind& kind) {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, EntropyDensity>) {
          return "H(" + JoinNames(k.x) + ")";
        } else if constexpr (std::is_same_v<K, CondEntropyDensity>) {
          return "H(" + JoinNames(k.x) + "|" + JoinNames(k.given) + ")";
        } else if constexpr (std::is_same_v<K, MutualInfoDensity>) {
          return "I(" + JoinNames(k.x) + ";" + JoinNames(k.y) + ")";
        } else if constexpr (std::is_same_v<K, MultiInfoDensity>) {
          return "I^" + std::to_string(k.parts.size()) + "(" + JoinNames(k.parts) + ")";
        } else if constexpr (std::is_same_v<K, CondMutualInfoDensity>) {
          return "I(" + JoinNames(k.a) + ";" + JoinNames(k.b) + "|" + JoinNames(k.given) + ")";
        } else {
          return "D(" + JoinNames(k.x) + "|" + JoinNames(k.given) + "||ref)";
        }
      },
      kind);
}

double DensitySpectrum::TotalMass() const {
  double s = 0.0;
  for (const Atom& a : atoms) s += a.mass;
  return s;
}

double DensitySpectrum::Mean() const {
  double s = 0.0;
  for (const Atom& a : atoms) s += a.value * a.mass;
  return s / TotalMass();
}

double DensitySpectrum::Variance() const {
  const double mu = Mean();
  double s = 0.0;
  for (const Atom& a : atoms) s += (a.value - mu) * (a.value - mu) * a.mass;
  return s / TotalMass();
}

double DensitySpectrum::Quantile(double p) const {
  if (atoms.empty()) Fail(ErrorCode::kInvalidArgument, "quantile of an empty spectrum");
  const double target = p * TotalMass();
  double acc = 0.0;
  for (const Atom& a : atoms) {
    acc += a.mass;
    if (acc >= target) return a.value;
  }
  return atoms.back().value;
}

double DensitySpectrum::MassBelow(double threshold) const {
  double s = 0.0;
  for (const Atom& a : atoms) {
    if (a.value < threshold) s += a.mass;
  }
  return s;
}

DensitySpectrum ComputeSpectrum(const SourceModel& model, int n, const DensityKind& kind,
                                const SpectrumOptions& options) {
  if (n < 1) Fail(ErrorCode::kInvalidArgument, "blocklength must be >= 1");
  const DensityForm form = FormOf(kind);
  if (const auto* iid = std::get_if<SourceModel::Iid>(&model.kind())) {
    return IidSpectrum(form, iid->base, n, options);
  }
  if (const auto* ex = std::get_if<SourceModel::Explicit>(&model.kind())) {
    auto it = ex->tables.find(n);
    if (it == ex->tables.end()) {
      Fail(ErrorCode::kMissingBlocklength, "no explicit table for n=" + std::to_string(n));
    }
    return ExplicitSpectrum(form, it->second, n, options);
  }
  const auto comps = model.MemorylessComponents();
  return MixedSpectrum(form, comps[0].second, comps[1].second, comps[0].first, n, options);
}

std::vector<DensitySpectrum> ComputeSpectraSerial(const SourceModel& model,
                                                  const std::vector<int>& n_grid,
                                                  const DensityKind& kind,
                                                  const SpectrumOptions& options) {
  std::vector<DensitySpectrum> out;
  for (int n : n_grid) out.push_back(ComputeSpectrum(model, n, kind, options));
  return out;
}

std::vector<DensitySpectrum> ComputeSpectra(const SourceModel& model,
                                            const std::vector<int>& n_grid,
                                            const DensityKind& kind,
                                            const SpectrumOptions& options) {
  std::vector<DensitySpectrum> out(n_grid.size());
  std::vector<std::exception_ptr> errors(n_grid.size());
  const long count = static_cast<long>(n_grid.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      out[i] = ComputeSpectrum(model, n_grid[i], kind, options);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

SpectralEstimate SpectralProxies(const std::vector<DensitySpectrum>& spectra, double epsilon) {
  if (spectra.empty()) Fail(ErrorCode::kEmptyGrid, "no spectra supplied");
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    Fail(ErrorCode::kInvalidArgument, "epsilon must lie in (0, 0.5)");
  }
  SpectralEstimate est;
  est.epsilon = epsilon;
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    if (i > 0 && spectra[i].n <= spectra[i - 1].n) {
      Fail(ErrorCode::kInvalidArgument, "n_grid must be strictly ascending");
    }
    est.n_grid.push_back(spectra[i].n);
    est.trajectory.push_back(
        {spectra[i].n, spectra[i].Quantile(epsilon), spectra[i].Quantile(1.0 - epsilon)});
  }
  est.inf_proxy = est.trajectory.back().inf_quantile;
  est.sup_proxy = est.trajectory.back().sup_quantile;
  return est;
}

TailCheck DivergenceTailCheck(const JointPmf& law, const JointPmf& reference, const VarSet& x,
                              const VarSet& given, int n, double gamma,
                              const SpectrumOptions& options) {
  if (!(gamma > 0.0)) Fail(ErrorCode::kInvalidArgument, "gamma must be positive");
  const VarSet needed = [&] {
    VarSet v = x;
    v.insert(v.end(), given.begin(), given.end());
    return v;
  }();
  // Q(x|y) must be defined wherever P(y) > 0.
  if (!given.empty()) {
    const JointPmf py = Marginalize(law, given);
    const JointPmf qy = Marginalize(reference, given);
    const auto proj = Projection(py, qy);
    for (std::size_t u = 0; u < py.size(); ++u) {
      if (py.prob(u) > 0.0 && qy.prob(proj[u]) <= 0.0) {
        Fail(ErrorCode::kUndefinedDensity, "reference conditional undefined on the support");
      }
    }
  }
  const DensitySpectrum s = ComputeSpectrum(SourceModel::MakeIid(Marginalize(law, needed)), n,
                                            DivergenceDensity{x, given, reference}, options);
  return {s.MassBelow(-gamma), std::exp(-n * gamma)};
}

}  // namespace mtrd
