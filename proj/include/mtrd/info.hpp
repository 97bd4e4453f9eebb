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

#ifndef MTRD_INFO_HPP_
#define MTRD_INFO_HPP_

#include "mtrd/joint_pmf.hpp"

namespace mtrd {

// Classical information quantities of a finite joint, in nats. 0 ln 0 = 0.
// Variable sets must be nonempty, known, and (where several are given)
// pairwise disjoint; violations throw UnknownVariable / InvalidArgument.

double Entropy(const JointPmf& j, const VarSet& x);
double CondEntropy(const JointPmf& j, const VarSet& x, const VarSet& given);
double MutualInfo(const JointPmf& j, const VarSet& x, const VarSet& y);
// I(a; b | given). An empty `given` reduces to MutualInfo.
double CondMutualInfo(const JointPmf& j, const VarSet& a, const VarSet& b, const VarSet& given);
// sum_m H(Z_m) - H((Z_m)_m): the classical value of the multi-way density
// comparing a joint to the product of its marginals. Zero for one part.
double MultiInfo(const JointPmf& j, const VarSet& parts);

struct ClassicalQuantities {
  double entropy;       // H(X)
  double cond_entropy;  // H(X|Y)
  double mutual_info;   // I(X;Y)
};

ClassicalQuantities Classical(const JointPmf& j, const VarSet& x, const VarSet& y);

}  // namespace mtrd

#endif  // MTRD_INFO_HPP_
