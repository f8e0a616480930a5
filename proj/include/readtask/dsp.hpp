#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "readtask/corpus.hpp"

namespace readtask::dsp {

struct FrequencyBand {
  std::string name;
  double low_hz = 0.0;
  double high_hz = 0.0;
};

// theta (4-8), alpha (8.5-13), beta (13.5-30), gamma (30.5-49.5), broadband (0.1-50).
// Also resolves the sub-band halves "theta1", "theta2", ... "gamma2".
FrequencyBand band_by_name(std::string_view name);

// The four oscillatory bands in canonical order theta, alpha, beta, gamma.
const std::array<std::string, 4>& oscillatory_bands();

// Splits a band into two halves of equal width, named <name>1 and <name>2.
std::array<FrequencyBand, 2> split_band(const FrequencyBand& band);

enum class PowerMode { amplitude, amplitude_squared };

PowerMode parse_power_mode(std::string_view s);
std::string_view power_mode_name(PowerMode m);

// One second-order section, transposed direct form II, a0 == 1.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

// Digital Butterworth band-pass designed by bilinear transform of the analog
// prototype. `order` is the low-pass prototype order, so the band-pass has
// 2*order poles split into `order` sections.
std::vector<Biquad> butterworth_bandpass(int order, double low_hz, double high_hz,
                                         double sample_rate_hz);

// Single forward pass with zero initial state.
std::vector<double> sosfilt(std::span<const Biquad> sos, std::span<const double> x);

// Zero-phase filtering: odd-reflection padding, steady-state initial
// conditions, forward then backward pass. Output has the input's length.
std::vector<double> filtfilt(std::span<const Biquad> sos, std::span<const double> x,
                             std::size_t padlen);

inline constexpr int kFilterOrder = 4;

// Minimum signal length accepted by bandpass().
std::size_t min_signal_length(int order = kFilterOrder);

// 4th-order Butterworth applied forward-backward.
std::vector<double> bandpass(std::span<const double> signal, const FrequencyBand& band,
                             double sample_rate_hz);

// |analytic signal|, built in the frequency domain.
std::vector<double> hilbert_envelope(std::span<const double> signal);

struct Segment {
  double onset_ms = 0.0;
  double duration_ms = 0.0;
};

// Per-channel band-limited envelope (amplitude or amplitude squared) of a
// whole recording. Computed once per sentence and band, then averaged over
// fixation segments with segment_mean().
using ChannelEnvelopes = std::vector<std::vector<double>>;

ChannelEnvelopes channel_envelopes(const ContinuousEeg& eeg, const FrequencyBand& band,
                                   PowerMode mode = PowerMode::amplitude);

// Mean of each channel over the union of the segments' samples.
std::vector<double> segment_mean(const ChannelEnvelopes& env, double sample_rate_hz,
                                 std::span<const Segment> segments);

std::vector<double> segment_band_power(const ContinuousEeg& eeg, const FrequencyBand& band,
                                       std::span<const Segment> segments,
                                       PowerMode mode = PowerMode::amplitude);

}  // namespace readtask::dsp
