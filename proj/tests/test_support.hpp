// Copyright (c) 2026 The mgfusion Authors
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

// Shared generators for the unit and acceptance suites.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mgfusion/numeric.hpp"

namespace mgf::test {

inline std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "mgfusion_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

inline Vec random_logits(std::mt19937_64& rng, std::size_t n, double bound = 10.0) {
  std::uniform_real_distribution<double> u(-bound, bound);
  Vec v(n);
  for (double& x : v) x = u(rng);
  return v;
}

/// Random point on the simplex; some entries zeroed to exercise 0 ln 0.
inline Vec random_distribution(std::mt19937_64& rng, std::size_t n, bool allow_zeros = true) {
  std::exponential_distribution<double> e(1.0);
  Vec p(n);
  double z = 0.0;
  for (double& x : p) {
    x = (allow_zeros && rng() % 5 == 0) ? 0.0 : e(rng);
    z += x;
  }
  if (z == 0.0) {
    p[rng() % n] = 1.0;
    return p;
  }
  for (double& x : p) x /= z;
  return p;
}

}  // namespace mgf::test
