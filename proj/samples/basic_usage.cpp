/*
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <cstdio>

#include "mpbound/mpbound.hpp"

int main() {
  using namespace mpbound;

  const RoundedValue r = round(1.00048828125, fp16());
  std::printf("round(1.00048828125, fp16) = %g  inexact=%d  delta=%g\n", r.value, r.inexact, r.delta);

  const double u = unit_roundoff(fp16());
  std::printf("gamma(2, u16) = %.9g\n", gamma(2, u));
  std::printf("p_b(1, u16, 2) = %.9g\n", prob_bound(1.0, u, 2));

  const TensorCoreConfig cfg = tc_fp16_fp32();
  const RoundedValue d = mpfma(1.5, 1.25, 0.5, cfg);
  std::printf("mpfma(1.5, 1.25, 0.5) in %s = %g\n", to_string(cfg).c_str(), d.value);

  const GemmShape shape{16, 64, 8, 4, 4, 4};
  const double lambda = auto_lambda_gemm(shape, 0.99, cfg);
  std::printf("lambda for 0.99 coverage: %.6g\n", lambda);
  const auto records = gemm_experiment(shape, 1, 7, lambda, cfg, ExecPolicy{});
  const CoverageSummary s = coverage_summary(records);
  std::printf("gemm: n=%zu within dbea=%.3f within vibea=%.3f\n", s.n, s.frac_within_dbea, s.frac_within_vibea);
  return 0;
}
