// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tbnrf/photon_stats.hpp"

namespace tbnrf {

/// Multimode twin-beam state plus the transmission channel acting on arm 2.
/// mean_m is the total detected mean of arm 1; arm 2 sees t*mean_m.
struct TwbParams {
    double mean_m = 0.0;   ///< detected mean of arm 1, photons/shot
    double modes = 1.0;    ///< TWB Schmidt modes, >= 1 (non-integer ok)
    double eta1 = 1.0;     ///< detection efficiency, arm 1, in (0,1]
    double eta2 = 1.0;     ///< detection efficiency, arm 2, in (0,1]
    double transmittance = 1.0;  ///< channel transmittance on arm 2, in (0,1]
};

void validate(const TwbParams& p);

/// Per-shot count statistics of the two arms.
struct ShotMoments {
    double mean1 = 0.0;
    double mean2 = 0.0;
    double var_diff = 0.0;  ///< variance of k1 - k2
};

/// R = var(k1-k2) / (<k1> + <k2>). R < 1 certifies sub-shot-noise
/// correlations. Throws std::domain_error when mean1 + mean2 == 0
/// (shot-noise level undefined).
double nrf_from_moments(const ShotMoments& s);

/// Noise reduction factor of a detected multimode thermal twin beam,
/// no added noise.
double nrf_twb(double m1, double m2, double eta1, double eta2, double mu);

/// NRF with independent noise added on both arms; noise1/noise2 are the
/// detected moments of the two sources.
double nrf_noisy_two_arm(double m1, double m2, double eta1, double eta2, double mu,
                         const MomentPair& noise1, const MomentPair& noise2);

/// NRF with noise on arm 2 only.
double nrf_noisy_one_arm(double m1, double m2, double eta1, double eta2, double mu,
                         const MomentPair& noise);

/// Generic kernel: arm 2 attenuated by p.transmittance (folded into its
/// effective efficiency) and carrying the given noise source.
double nrf_noisy_lossy(const TwbParams& p, const NoiseModel& noise);

// Closed-form specializations for the three benchmark noise sources.
// Kept as independent transcriptions and cross-checked against
// nrf_noisy_lossy; all require eta1 == eta2. For nrf_fock, mean_noise is
// the DETECTED Fock mean and the subtracted excess term uses eta*t.
double nrf_coherent(const TwbParams& p, double mean_noise);
double nrf_thermal(const TwbParams& p, double mean_noise, double modes_noise);
double nrf_fock(const TwbParams& p, double mean_noise);

/// Additive term breakdown of the generic one-arm formula:
/// R = 1 + correlation + imbalance + excess.
struct NrfTerms {
    double correlation = 0.0;  ///< -2 sqrt(eta1 eta2 m1 m2) / S
    double imbalance = 0.0;    ///< (m1-m2)^2 / (mu S)
    double excess = 0.0;       ///< (var_N - mean_N) / S
    double total() const { return 1.0 + correlation + imbalance + excess; }
};

NrfTerms nrf_terms(const TwbParams& p, const NoiseModel& noise);

}  // namespace tbnrf
