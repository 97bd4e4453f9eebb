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

#include "mtrd/info.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mtrd/error.hpp"

namespace mtrd {

namespace {

void CheckDisjoint(std::initializer_list<const VarSet*> sets) {
  std::set<std::string> seen;
  for (const VarSet* s : sets) {
    for (const auto& v : *s) {
      if (!seen.insert(v).second) {
        Fail(ErrorCode::kInvalidArgument, "variable '" + v + "' appears in two argument sets");
      }
    }
  }
}

VarSet Union(std::initializer_list<const VarSet*> sets) {
  VarSet out;
  for (const VarSet* s : sets) out.insert(out.end(), s->begin(), s->end());
  return out;
}

}  // namespace

double Entropy(const JointPmf& j, const VarSet& x) {
  const JointPmf m = Marginalize(j, x);
  double h = 0.0;
  for (double p : m.probs()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double CondEntropy(const JointPmf& j, const VarSet& x, const VarSet& given) {
  CheckDisjoint({&x, &given});
  if (given.empty()) return Entropy(j, x);
  return Entropy(j, Union({&x, &given})) - Entropy(j, given);
}

double MutualInfo(const JointPmf& j, const VarSet& x, const VarSet& y) {
  CheckDisjoint({&x, &y});
  return Entropy(j, x) + Entropy(j, y) - Entropy(j, Union({&x, &y}));
}

double CondMutualInfo(const JointPmf& j, const VarSet& a, const VarSet& b, const VarSet& given) {
  CheckDisjoint({&a, &b, &given});
  if (given.empty()) return MutualInfo(j, a, b);
  return Entropy(j, Union({&a, &given})) + Entropy(j, Union({&b, &given})) -
         Entropy(j, Union({&a, &b, &given})) - Entropy(j, given);
}

double MultiInfo(const JointPmf& j, const VarSet& parts) {
  if (parts.empty()) Fail(ErrorCode::kEmptySubset, "multi-information over an empty set");
  CheckDisjoint({&parts});
  if (parts.size() == 1) {
    j.IndexOf(parts.front());
    return 0.0;
  }
  double sum = 0.0;
  for (const auto& p : parts) sum += Entropy(j, {p});
  return sum - Entropy(j, parts);
}

ClassicalQuantities Classical(const JointPmf& j, const VarSet& x, const VarSet& y) {
  return {Entropy(j, x), CondEntropy(j, x, y), MutualInfo(j, x, y)};
}

}  // namespace mtrd
