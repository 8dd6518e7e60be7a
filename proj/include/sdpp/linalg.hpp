// Copyright 2026 The sdpushpull Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SDPP_LINALG_HPP
#define SDPP_LINALG_HPP

#include <Eigen/Dense>

namespace sdpp {

/// Largest singular value (operator 2-norm).
double operator_norm_2(const Eigen::MatrixXd& m);

/// Diagonal similarity scaling with powers of two (Osborne balancing).
/// Leaves the spectrum unchanged but shrinks the norm spread, which keeps
/// eigenvalue computations accurate for badly scaled matrices.
Eigen::MatrixXd balance(Eigen::MatrixXd m);

/// Spectral radius via the dense eigensolver on a balanced copy.
double spectral_radius(const Eigen::MatrixXd& m);

/// 2-norm condition number of the unit-column eigenvector basis of m.
/// Large values flag a nearly defective matrix.
double eigenbasis_condition(const Eigen::MatrixXd& m);

}  // namespace sdpp

#endif  // SDPP_LINALG_HPP
