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
// Generated by tests/golden/gen_goldens.py (mpmath, 50 digits). Do not edit.
#pragma once

namespace mpbound::golden {

// gamma(2, 2^-11) = 0.0009775171065493646138807429
inline constexpr double kGamma_2_u16 = 0x1.0040100401004p-10;
// gamma(1, 0.5) = 1.0
inline constexpr double kGamma_1_half = 0x1.0000000000000p+0;
// gamma(4095, 2^-24) = 0.0002441406104445320581661576
inline constexpr double kGamma_4095_u32 = 0x1.fffffdffe0000p-13;
// gamma(1024, 2^-11) = 1.0
inline constexpr double kGamma_1024_u16 = 0x1.0000000000000p+0;
// sigma_sq(1, 0.5) = 0.09478827939056351661716566
inline constexpr double kSigmaSq_1_half = 0x1.8440b7006ce05p-4;
// sigma_sq(1, 2^-11) = 7.947286854283168159664425e-8
inline constexpr double kSigmaSq_1_u16 = 0x1.555557d27d2dbp-24;
// sigma_sq(1, 2^-24) = 1.184237892933502273172349e-15
inline constexpr double kSigmaSq_1_u32 = 0x1.555555555555fp-50;
// prob_bound(1, 2^-11, 1024) = 0.532976912589253480072772
inline constexpr double kProbBound_1_u16_1024 = 0x1.10e259923012fp-1;
// prob_bound(1, 2^-11, 2) = 0.1691904170501944555978628
inline constexpr double kProbBound_1_u16_2 = 0x1.5a80816037ad5p-3;
// prob_bound(0.5, 2^-11, 2) = -0.5160890175948521570724933
inline constexpr double kProbBound_half_u16_2 = -0x1.083cd1d8ca10bp-1;
// prob_bound(2, 2^-11, 2) = 0.833277258033473933821751
inline constexpr double kProbBound_2_u16_2 = 0x1.aaa351178236cp-1;
// prob_bound(3, 2^-24, 4096) = 0.9999949814784173461863703
inline constexpr double kProbBound_3_u32_4096 = 0x1.ffff579b3a54dp-1;
// gamma_tilde(1024, 2^-11, 1) = 0.01574770858668574745853507
inline constexpr double kGammaTilde_1024_u16_1 = 0x1.0202ad5778e46p-6;
// tc_zeta(4096, 1024, fp16-fp32) = 0.0003051943942820736886403178
inline constexpr double kTcZetaDet_4096_1024_acc32 = 0x1.4004ff13ec4fbp-12;
// tc_zeta(1024, 256, fp16-fp16) = 1.283484320557491289198606
inline constexpr double kTcZetaDet_1024_256_acc16 = 0x1.48926dadb9240p+0;
// tc_zeta probabilistic, lambda 2 = 0.0000114432258906599353651859
inline constexpr double kTcZetaProb_4096_1024_acc32_l2 = 0x1.7ff88fda22f5cp-17;
// tc_repr_coef fp16-fp32 = 0.00128229342702585517322092
inline constexpr double kTcReprDet_4096_1024_acc32 = 0x1.50254154f151cp-10;
// tc_repr_coef prob, lambda 2 = 0.0009882553222233230026476698
inline constexpr double kTcReprProb_4096_1024_acc32_l2 = 0x1.0310b127fbf78p-10;
// tc_probability(1,1,4,4,1,acc32,1) = -6.062824819305960489024576
inline constexpr double kTcProb_q1_b4_acc32_l1 = -0x1.8405526412f52p+2;
// tc_probability(1,1,4,4,1,acc16,3) = 0.6075335381429242018752391
inline constexpr double kTcProb_q1_b4_acc16_l3 = 0x1.370ea2cb18141p-1;
// tc_probability(2,3,16,4,4,acc32,5) = 0.8906182574724107324912619
inline constexpr double kTcProb_q4_b4_acc32_l5 = 0x1.c7ff1dc22107bp-1;
// tc_probability(8,8,256,4,64,acc32,8) = 0.9877638869952635389074685
inline constexpr double kTcProb_q64_b4_acc32_l8 = 0x1.f9bc302da105bp-1;
// mpfma_repr_coefs fp16-fp32 deterministic, coef_ab = 0.000977636432371591377133032
inline constexpr double kMpfmaReprDet_acc32_ab = 0x1.0048120485215p-10;
// mpfma_repr_coefs fp16-fp32 deterministic, coef_c = 0.0000001788139449843131231597396
inline constexpr double kMpfmaReprDet_acc32_c = 0x1.8000018000008p-23;
// mpfma_repr_coefs fp16-fp16 deterministic, coef_ab = 0.001955272864736070381231672
inline constexpr double kMpfmaReprDet_acc16_ab = 0x1.0048120481205p-9;
// lambda_for_probability(0.99, 2^-11, 4096) = 1.907229649103267859931255
inline constexpr double kLambda_099_u16_4096 = 0x1.e84033c8dc2efp+0;

}  // namespace mpbound::golden
