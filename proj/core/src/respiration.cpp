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

#include "rstar/respiration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rstar/rng.hpp"

namespace rstar {

BreathingSignal::BreathingSignal(std::vector<double> peak_times,
                                 std::vector<double> peaks)
    : peak_times_(std::move(peak_times)), peaks_(std::move(peaks)) {
  if (peak_times_.size() < 2) throw DomainError("breathing signal: need >= 1 cycle");
  if (peaks_.size() + 1 != peak_times_.size())
    throw DomainError("breathing signal: need one peak per cycle");
  for (std::size_t i = 1; i < peak_times_.size(); ++i)
    if (!(peak_times_[i] > peak_times_[i - 1]))
      throw DomainError("breathing signal: peak times must increase");
  for (double p : peaks_)
    if (!(p > 0.0 && p <= 1.0))
      throw DomainError("breathing signal: peaks must lie in (0, 1]");
}

int BreathingSignal::cycle_of(double t) const {
  if (t < peak_times_.front() || t >= peak_times_.back())
    throw DomainError("breathing signal: time outside covered cycles");
  const auto it = std::upper_bound(peak_times_.begin(), peak_times_.end(), t);
  return static_cast<int>(it - peak_times_.begin()) - 1;
}

double BreathingSignal::cycle_fraction(double t) const {
  const int k = cycle_of(t);
  return (t - peak_times_[k]) / (peak_times_[k + 1] - peak_times_[k]);
}

double BreathingSignal::amplitude_at(double t) const {
  const int k = cycle_of(t);
  const double tau = (t - peak_times_[k]) / (peak_times_[k + 1] - peak_times_[k]);
  return peaks_[k] * (0.5 + 0.5 * std::cos(2.0 * kPi * tau));
}

BreathingSignal synthesize_breathing(const BreathingParams& params) {
  params.validate();
  Rng rng(derive_seed(params.seed, "breathing"));
  std::vector<double> peak_times{0.0};
  std::vector<double> peaks;
  // One spare cycle past the end keeps every t in [0, duration] covered.
  while (peak_times.back() < params.duration + params.mean_period) {
    double period = params.mean_period;
    if (params.period_jitter > 0.0)
      period *= std::max(0.3, 1.0 + params.period_jitter * rng.normal());
    double peak = 1.0;
    if (params.peak_jitter > 0.0)
      peak = std::clamp(1.0 + params.peak_jitter * rng.normal(), 0.2, 1.0);
    peak_times.push_back(peak_times.back() + period);
    peaks.push_back(peak);
  }
  return BreathingSignal(std::move(peak_times), std::move(peaks));
}

std::vector<SignalSample> sample_breathing(const BreathingSignal& signal,
                                           double sample_rate) {
  if (!(sample_rate > 0.0)) throw DomainError("sample_breathing: rate <= 0");
  const double duration = signal.duration();
  std::vector<SignalSample> out;
  for (std::size_t i = 0;; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    if (t >= duration) break;
    out.push_back({t, signal.amplitude_at(t)});
  }
  return out;
}

double phase_mean_amplitude(int phase, int n_phases) {
  if (n_phases <= 0 || phase < 0 || phase >= n_phases)
    throw DomainError("phase_mean_amplitude: bad phase index");
  const double t0 = 2.0 * kPi * phase / n_phases;
  const double t1 = 2.0 * kPi * (phase + 1) / n_phases;
  return 0.5 + 0.5 * (std::sin(t1) - std::sin(t0)) / (t1 - t0);
}

std::vector<double> phase_mean_amplitudes(int n_phases) {
  std::vector<double> out(static_cast<std::size_t>(n_phases));
  for (int i = 0; i < n_phases; ++i) out[static_cast<std::size_t>(i)] = phase_mean_amplitude(i, n_phases);
  return out;
}

std::vector<int> phase_sort(const std::vector<double>& times,
                            const BreathingSignal& signal, int n_phases) {
  if (n_phases <= 0) throw DomainError("phase_sort: n_phases <= 0");
  std::vector<int> phases(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double tau = signal.cycle_fraction(times[i]);
    phases[i] = std::min(n_phases - 1, static_cast<int>(tau * n_phases));
  }
  return phases;
}

std::vector<int> amplitude_sort(const std::vector<double>& amplitudes,
                                const std::vector<bool>& inhaling,
                                int n_phases) {
  if (n_phases <= 0 || n_phases % 2 != 0)
    throw DomainError("amplitude_sort: n_phases must be positive and even");
  if (amplitudes.size() != inhaling.size())
    throw DomainError("amplitude_sort: amplitude/branch size mismatch");
  if (amplitudes.size() < static_cast<std::size_t>(n_phases))
    throw DomainError("amplitude_sort: fewer samples than phases");

  // Equal-count bin edges from the pooled amplitude distribution.
  std::vector<double> sorted = amplitudes;
  std::sort(sorted.begin(), sorted.end());
  const int half = n_phases / 2;
  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(half) - 1);
  for (int k = 1; k < half; ++k)
    edges.push_back(sorted[sorted.size() * static_cast<std::size_t>(k) / half]);

  std::vector<int> phases(amplitudes.size());
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    const int bin = static_cast<int>(
        std::upper_bound(edges.begin(), edges.end(), amplitudes[i]) - edges.begin());
    // bin 0 holds the lowest amplitudes.  Exhale runs peak -> valley over
    // phases 0..half-1, inhale valley -> peak over half..n-1.
    phases[i] = inhaling[i] ? half + bin : (half - 1) - bin;
  }
  return phases;
}

std::vector<int> amplitude_sort(const std::vector<double>& times,
                                const BreathingSignal& signal, int n_phases) {
  std::vector<double> amps(times.size());
  std::vector<bool> inhaling(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    amps[i] = signal.amplitude_at(times[i]);
    inhaling[i] = signal.inhaling_at(times[i]);
  }
  return amplitude_sort(amps, inhaling, n_phases);
}

ShroudImage amsterdam_shroud(const ProjectionSet& proj) {
  const ScanGeometry& g = proj.geometry();
  if (g.nv < 2) throw DomainError("amsterdam_shroud: need at least two detector rows");
  ShroudImage shroud;
  shroud.height = static_cast<int>(g.nv) - 1;
  shroud.width = static_cast<int>(proj.view_count());
  shroud.data.assign(static_cast<std::size_t>(shroud.height) * shroud.width, 0.0f);
  std::vector<double> colsum(g.nv);
  for (std::size_t j = 0; j < proj.view_count(); ++j) {
    const float* view = proj.view_data(j);
    for (std::uint32_t iv = 0; iv < g.nv; ++iv) {
      double s = 0.0;
      const float* row = view + static_cast<std::size_t>(iv) * g.nu;
      for (std::uint32_t iu = 0; iu < g.nu; ++iu) s += row[iu];
      colsum[iv] = s;
    }
    for (int r = 0; r < shroud.height; ++r)
      shroud.at(r, static_cast<int>(j)) =
          static_cast<float>(colsum[static_cast<std::size_t>(r) + 1] - colsum[r]);
  }
  return shroud;
}

namespace {

// Normalized cross-correlation of two shroud columns at a vertical shift.
double column_ncc(const ShroudImage& s, int col_a, int col_b, int shift) {
  const int lo = std::max(0, -shift);
  const int hi = std::min(s.height, s.height - shift);
  const int n = hi - lo;
  if (n < 8) return -2.0;
  double ma = 0.0, mb = 0.0;
  for (int r = lo; r < hi; ++r) {
    ma += s.at(r, col_a);
    mb += s.at(r + shift, col_b);
  }
  ma /= n;
  mb /= n;
  double num = 0.0, da = 0.0, db = 0.0;
  for (int r = lo; r < hi; ++r) {
    const double a = s.at(r, col_a) - ma;
    const double b = s.at(r + shift, col_b) - mb;
    num += a * b;
    da += a * a;
    db += b * b;
  }
  if (da <= 0.0 || db <= 0.0) return -2.0;
  return num / std::sqrt(da * db);
}

}  // namespace

std::vector<double> shroud_surrogate(const ShroudImage& shroud, int max_shift) {
  if (shroud.width < 2) throw DomainError("shroud_surrogate: need >= 2 views");
  if (max_shift < 1 || max_shift >= shroud.height)
    throw DomainError("shroud_surrogate: bad max_shift");

  std::vector<double> cumulative(static_cast<std::size_t>(shroud.width), 0.0);
  for (int j = 0; j + 1 < shroud.width; ++j) {
    int best_shift = 0;
    double best = -3.0;
    for (int s = -max_shift; s <= max_shift; ++s) {
      const double ncc = column_ncc(shroud, j, j + 1, s);
      if (ncc > best) {
        best = ncc;
        best_shift = s;
      }
    }
    // Sub-row refinement: fit a parabola through the NCC at the best shift
    // and its neighbours.  Adjacent views move a fraction of a row, so the
    // integer argmax alone would quantize most steps to zero.
    double shift = best_shift;
    if (best_shift > -max_shift && best_shift < max_shift) {
      const double nm = column_ncc(shroud, j, j + 1, best_shift - 1);
      const double np = column_ncc(shroud, j, j + 1, best_shift + 1);
      const double denom = nm - 2.0 * best + np;
      if (nm > -2.0 && np > -2.0 && denom < 0.0) {
        const double frac = 0.5 * (nm - np) / denom;
        if (frac > -0.5 && frac < 0.5) shift += frac;
      }
    }
    // A positive shift means the profile moved down (larger v) from view j to
    // j+1, i.e. towards exhale; breathing amplitude moves opposite to it.
    cumulative[static_cast<std::size_t>(j) + 1] =
        cumulative[static_cast<std::size_t>(j)] - shift;
  }

  // Remove the linear trend (least squares) to suppress slow drift.
  const std::size_t n = cumulative.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += static_cast<double>(i);
    sy += cumulative[i];
    sxx += static_cast<double>(i) * i;
    sxy += static_cast<double>(i) * cumulative[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  const double intercept = (sy - slope * sx) / n;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = cumulative[i] - (intercept + slope * static_cast<double>(i));

  const auto [mn, mx] = std::minmax_element(out.begin(), out.end());
  const double span = *mx - *mn;
  if (span <= 0.0) throw DomainError("shroud_surrogate: flat surrogate");
  for (double& v : out) v = (v - *mn) / span;
  return out;
}

std::vector<bool> surrogate_inhaling_flags(const std::vector<double>& surrogate,
                                           int smooth) {
  if (surrogate.size() < 3) throw DomainError("surrogate_inhaling_flags: too short");
  if (smooth < 1) throw DomainError("surrogate_inhaling_flags: smooth < 1");
  const int n = static_cast<int>(surrogate.size());
  std::vector<double> sm(surrogate.size());
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    int cnt = 0;
    for (int k = -smooth / 2; k <= smooth / 2; ++k) {
      const int j = std::clamp(i + k, 0, n - 1);
      acc += surrogate[static_cast<std::size_t>(j)];
      ++cnt;
    }
    sm[static_cast<std::size_t>(i)] = acc / cnt;
  }
  std::vector<bool> inhaling(surrogate.size());
  for (int i = 0; i < n; ++i) {
    const int j = std::min(i, n - 2);
    inhaling[static_cast<std::size_t>(i)] =
        sm[static_cast<std::size_t>(j) + 1] > sm[static_cast<std::size_t>(j)];
  }
  return inhaling;
}

}  // namespace rstar
