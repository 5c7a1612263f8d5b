/*
 * rstar: desk-scale 4D cone-beam CT artifact laboratory
 *
 * Copyright 2026 the rstar developers
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <vector>

#include "rstar/io.hpp"
#include "rstar/scan_geometry.hpp"

namespace rstar {

// Breathing amplitude convention used everywhere: 0 = end-exhale,
// 1 = end-inhale.  Cycles are anchored at end-inhale peaks; within one cycle
// the amplitude follows a raised cosine  a(tau) = peak * (0.5 + 0.5*cos(2*pi*tau)).

struct BreathingParams {
  double mean_period = 4.0;    // s
  double period_jitter = 0.0;  // fractional sigma of per-cycle period
  double peak_jitter = 0.0;    // fractional sigma of per-cycle peak amplitude
  double duration = 60.0;      // s
  std::uint64_t seed = 0;

  void validate() const {
    if (!(mean_period > 0.0)) throw DomainError("breathing: mean_period <= 0");
    if (period_jitter < 0.0 || peak_jitter < 0.0)
      throw DomainError("breathing: negative jitter");
    if (!(duration > 0.0)) throw DomainError("breathing: duration <= 0");
    if (duration < mean_period)
      throw DomainError("breathing: duration shorter than one cycle");
  }
};

class BreathingSignal {
public:
  BreathingSignal(std::vector<double> peak_times, std::vector<double> peaks);

  // Peaks bracket [0, duration]; peak_times[k] is the end-inhale anchor
  // starting cycle k.
  const std::vector<double>& peak_times() const { return peak_times_; }
  const std::vector<double>& peaks() const { return peaks_; }
  double duration() const { return peak_times_.back(); }

  int cycle_of(double t) const;
  // Normalized position in the cycle containing t, in [0, 1).
  double cycle_fraction(double t) const;
  double amplitude_at(double t) const;
  // True while the amplitude is rising (second half of the cycle).
  bool inhaling_at(double t) const { return cycle_fraction(t) >= 0.5; }

private:
  std::vector<double> peak_times_;
  std::vector<double> peaks_;
};

BreathingSignal synthesize_breathing(const BreathingParams& params);

// Evenly sampled export of the waveform (sample_rate in Hz).
std::vector<SignalSample> sample_breathing(const BreathingSignal& signal,
                                           double sample_rate);

// Mean amplitude of the unit raised cosine over phase bin i of n (the
// representative amplitude used when voxelizing ground-truth phases).
double phase_mean_amplitude(int phase, int n_phases);
std::vector<double> phase_mean_amplitudes(int n_phases);

// Phase-number sorting: position of t inside its breathing cycle, n equal
// time bins, phase 0 starting at the end-inhale peak.  Every time must be
// covered by a complete cycle of the signal.
std::vector<int> phase_sort(const std::vector<double>& times,
                            const BreathingSignal& signal, int n_phases);

// Amplitude sorting on an arbitrary surrogate: n/2 equal-count amplitude bins
// (quantiles of the observed values), exhale maps to phases 0..n/2-1 in order
// of falling amplitude and inhale to n/2..n-1 in order of rising amplitude,
// so the phase sequence runs peak -> valley -> peak like the phase-number
// sort.  n_phases must be even.  Equal-count binning makes the labels
// invariant under any strictly increasing rescaling of the surrogate.
std::vector<int> amplitude_sort(const std::vector<double>& amplitudes,
                                const std::vector<bool>& inhaling,
                                int n_phases);

// Convenience overload evaluating the true signal at the given times.
std::vector<int> amplitude_sort(const std::vector<double>& times,
                                const BreathingSignal& signal, int n_phases);

// Amsterdam Shroud: each view's detector is summed along u and differentiated
// along v; column j of the returned image is that profile for view j.
// Height is nv-1 (forward differences), width is the view count.
struct ShroudImage {
  int height = 0;
  int width = 0;
  std::vector<float> data;  // row-major, row = v index
  float& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
  float at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
};

ShroudImage amsterdam_shroud(const ProjectionSet& proj);

// Breathing surrogate from a shroud: adjacent columns are aligned by the
// integer vertical shift maximizing their normalized cross-correlation
// (|shift| <= max_shift); the negated cumulative shift is detrended and
// min-max normalized so 1 sits at end-inhale (diaphragm most caudal).
std::vector<double> shroud_surrogate(const ShroudImage& shroud, int max_shift = 16);

// Rising/falling branch flags for a sampled surrogate (moving-average
// smoothing of width `smooth`, then sign of the forward difference).
std::vector<bool> surrogate_inhaling_flags(const std::vector<double>& surrogate,
                                           int smooth = 3);

}  // namespace rstar
