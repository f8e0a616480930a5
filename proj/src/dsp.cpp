#include "readtask/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "readtask/error.hpp"

namespace readtask::dsp {

using cplx = std::complex<double>;

FrequencyBand band_by_name(std::string_view name) {
  if (name == "theta") return {"theta", 4.0, 8.0};
  if (name == "alpha") return {"alpha", 8.5, 13.0};
  if (name == "beta") return {"beta", 13.5, 30.0};
  if (name == "gamma") return {"gamma", 30.5, 49.5};
  if (name == "broadband") return {"broadband", 0.1, 50.0};
  if (name.size() > 1 && (name.back() == '1' || name.back() == '2')) {
    const auto parent = band_by_name(name.substr(0, name.size() - 1));
    if (parent.name != "broadband") return split_band(parent)[name.back() == '1' ? 0 : 1];
  }
  throw ParameterError("unknown frequency band '" + std::string(name) +
                       "' (valid: theta, alpha, beta, gamma, broadband, or <band>1/<band>2)");
}

const std::array<std::string, 4>& oscillatory_bands() {
  static const std::array<std::string, 4> bands{"theta", "alpha", "beta", "gamma"};
  return bands;
}

std::array<FrequencyBand, 2> split_band(const FrequencyBand& band) {
  const double mid = 0.5 * (band.low_hz + band.high_hz);
  return {FrequencyBand{band.name + "1", band.low_hz, mid},
          FrequencyBand{band.name + "2", mid, band.high_hz}};
}

PowerMode parse_power_mode(std::string_view s) {
  if (s == "amplitude") return PowerMode::amplitude;
  if (s == "amplitude_squared") return PowerMode::amplitude_squared;
  throw ParameterError("unknown power mode '" + std::string(s) +
                       "' (valid: amplitude, amplitude_squared)");
}

std::string_view power_mode_name(PowerMode m) {
  return m == PowerMode::amplitude ? "amplitude" : "amplitude_squared";
}

// --------------------------------------------------------------------------
// Filter design

std::vector<Biquad> butterworth_bandpass(int order, double low_hz, double high_hz,
                                         double sample_rate_hz) {
  if (order < 1) throw ParameterError("filter order must be ≥ 1");
  if (!(sample_rate_hz > 0.0)) throw ParameterError("sample rate must be > 0");
  const double nyquist = sample_rate_hz / 2.0;
  if (!(low_hz > 0.0 && low_hz < high_hz))
    throw ParameterError("band edges must satisfy 0 < low < high");
  if (high_hz >= nyquist)
    throw ParameterError("band edge " + std::to_string(high_hz) + " Hz is at or above Nyquist (" +
                         std::to_string(nyquist) + " Hz)");

  const double pi = std::numbers::pi;
  const double fs2 = 2.0 * sample_rate_hz;
  // Pre-warped analog edges.
  const double w1 = fs2 * std::tan(pi * low_hz / sample_rate_hz);
  const double w2 = fs2 * std::tan(pi * high_hz / sample_rate_hz);
  const double w0sq = w1 * w2;
  const double bw = w2 - w1;

  // Analog band-pass poles, grouped so each section holds a conjugate pair
  // (or, for the real prototype pole, the two roots of its own quadratic).
  std::vector<std::pair<cplx, cplx>> pole_pairs;
  for (int k = 0; k < (order + 1) / 2; ++k) {
    const double theta = pi * (2.0 * k + order + 1) / (2.0 * order);
    const cplx p = std::polar(1.0, theta);
    const cplx pb = p * bw;
    const cplx disc = std::sqrt(pb * pb - 4.0 * w0sq);
    const cplx s1 = (pb + disc) / 2.0;
    const cplx s2 = (pb - disc) / 2.0;
    if (std::abs(p.imag()) < 1e-12) {
      pole_pairs.emplace_back(s1, s2);
    } else {
      pole_pairs.emplace_back(s1, std::conj(s1));
      pole_pairs.emplace_back(s2, std::conj(s2));
    }
  }

  auto bilinear = [&](cplx s) { return (fs2 + s) / (fs2 - s); };

  std::vector<Biquad> sos;
  for (const auto& [pa, pb] : pole_pairs) {
    const cplx za = bilinear(pa);
    const cplx zb = bilinear(pb);
    Biquad q;
    // One zero at z = 1 (from s = 0) and one at z = -1 (from s = inf).
    q.b0 = 1.0;
    q.b1 = 0.0;
    q.b2 = -1.0;
    q.a1 = -(za + zb).real();
    q.a2 = (za * zb).real();
    sos.push_back(q);
  }

  // Unity gain at the digital image of the analog centre frequency.
  const double wc = 2.0 * std::atan(std::sqrt(w0sq) / fs2);
  const cplx z = std::polar(1.0, wc);
  const cplx zi = 1.0 / z;
  double gain = 1.0;
  for (const auto& q : sos) {
    const cplx num = q.b0 + q.b1 * zi + q.b2 * zi * zi;
    const cplx den = 1.0 + q.a1 * zi + q.a2 * zi * zi;
    gain *= std::abs(num / den);
  }
  const double per_section = std::pow(gain, -1.0 / static_cast<double>(sos.size()));
  for (auto& q : sos) {
    q.b0 *= per_section;
    q.b1 *= per_section;
    q.b2 *= per_section;
  }
  return sos;
}

namespace {

struct State {
  double z1 = 0, z2 = 0;
};

void run_sections(std::span<const Biquad> sos, std::vector<State>& st, std::vector<double>& x) {
  for (std::size_t s = 0; s < sos.size(); ++s) {
    const auto& q = sos[s];
    auto& z = st[s];
    for (double& v : x) {
      const double y = q.b0 * v + z.z1;
      z.z1 = q.b1 * v - q.a1 * y + z.z2;
      z.z2 = q.b2 * v - q.a2 * y;
      v = y;
    }
  }
}

// Steady-state section states for a unit step input (scaled by the caller).
std::vector<State> step_states(std::span<const Biquad> sos) {
  std::vector<State> st(sos.size());
  double in = 1.0;
  for (std::size_t s = 0; s < sos.size(); ++s) {
    const auto& q = sos[s];
    const double out = in * (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    st[s].z2 = q.b2 * in - q.a2 * out;
    st[s].z1 = q.b1 * in - q.a1 * out + st[s].z2;
    in = out;
  }
  return st;
}

std::vector<State> scaled(const std::vector<State>& st, double k) {
  auto out = st;
  for (auto& z : out) {
    z.z1 *= k;
    z.z2 *= k;
  }
  return out;
}

}  // namespace

std::vector<double> sosfilt(std::span<const Biquad> sos, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  std::vector<State> st(sos.size());
  run_sections(sos, st, y);
  return y;
}

std::vector<double> filtfilt(std::span<const Biquad> sos, std::span<const double> x,
                             std::size_t padlen) {
  const std::size_t n = x.size();
  if (n < 2) throw LengthError("signal too short to filter");
  padlen = std::min(padlen, n - 1);

  std::vector<double> ext(n + 2 * padlen);
  for (std::size_t i = 0; i < padlen; ++i) ext[i] = 2.0 * x[0] - x[padlen - i];
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(padlen));
  for (std::size_t i = 0; i < padlen; ++i) ext[padlen + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];

  const auto zi = step_states(sos);
  auto st = scaled(zi, ext.front());
  run_sections(sos, st, ext);
  std::reverse(ext.begin(), ext.end());
  st = scaled(zi, ext.front());
  run_sections(sos, st, ext);
  std::reverse(ext.begin(), ext.end());

  return {ext.begin() + static_cast<std::ptrdiff_t>(padlen),
          ext.begin() + static_cast<std::ptrdiff_t>(padlen + n)};
}

std::size_t min_signal_length(int order) { return 3 * (2 * static_cast<std::size_t>(order) + 1); }

std::vector<double> bandpass(std::span<const double> signal, const FrequencyBand& band,
                             double sample_rate_hz) {
  const auto sos = butterworth_bandpass(kFilterOrder, band.low_hz, band.high_hz, sample_rate_hz);
  if (signal.size() < min_signal_length())
    throw LengthError("signal length " + std::to_string(signal.size()) + " is below the minimum " +
                      std::to_string(min_signal_length()) + " for a order-" +
                      std::to_string(kFilterOrder) + " band-pass");
  // Pad by roughly three periods of the lower band edge so start-up
  // transients fall outside the signal.
  const auto padlen = std::max<std::size_t>(
      min_signal_length(), static_cast<std::size_t>(std::ceil(3.0 * sample_rate_hz / band.low_hz)));
  return filtfilt(sos, signal, padlen);
}

// --------------------------------------------------------------------------
// Hilbert envelope

namespace {
// FFTW's planner is not thread-safe; execution on distinct arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

namespace {

// Burg estimate of an all-pole model, returned as prediction coefficients c
// with x[t] ~ sum_j c[j] x[t - 1 - j]. Stops early once the residual energy
// is negligible (an exact sinusoid needs order 2).
std::vector<double> burg_coefficients(const std::vector<double>& x, std::size_t order) {
  const std::size_t n = x.size();
  std::vector<double> f(x), b(x), a{1.0};
  double energy = 0.0;
  for (double v : x) energy += v * v;
  for (std::size_t m = 0; m < order && m + 1 < n; ++m) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = m + 1; i < n; ++i) {
      num += f[i] * b[i - 1];
      den += f[i] * f[i] + b[i - 1] * b[i - 1];
    }
    if (!(den > 1e-18 * energy)) break;
    const double k = -2.0 * num / den;
    std::vector<double> next(a.size() + 1, 0.0);
    for (std::size_t j = 0; j < next.size(); ++j)
      next[j] = (j < a.size() ? a[j] : 0.0) + k * (m + 1 - j < a.size() ? a[m + 1 - j] : 0.0);
    a = std::move(next);
    for (std::size_t i = n - 1; i >= m + 1; --i) {
      const double fi = f[i];
      f[i] = fi + k * b[i - 1];
      b[i] = b[i - 1] + k * fi;
    }
  }
  std::vector<double> c;
  for (std::size_t j = 1; j < a.size(); ++j) c.push_back(-a[j]);
  return c;
}

// Appends `count` samples predicted from the tail of `x`.
void extrapolate(std::vector<double>& x, const std::vector<double>& c, std::size_t count) {
  for (std::size_t t = 0; t < count; ++t) {
    double v = 0.0;
    for (std::size_t j = 0; j < c.size() && j < x.size(); ++j) v += c[j] * x[x.size() - 1 - j];
    x.push_back(v);
  }
}

}  // namespace

std::vector<double> hilbert_envelope(std::span<const double> signal) {
  const std::size_t n = signal.size();
  if (n < 16) throw LengthError("hilbert_envelope needs at least 16 samples");
  for (double v : signal)
    if (!std::isfinite(v)) throw NumericError("hilbert_envelope: non-finite input sample");

  // The circular transform treats the record as periodic; a jump between the
  // last and first sample leaks into the interior. Both ends are extended by
  // linear prediction first and the extension is cut off afterwards.
  double mean = 0.0;
  for (double v : signal) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> centred(n);
  for (std::size_t i = 0; i < n; ++i) centred[i] = signal[i] - mean;
  const auto coeffs = burg_coefficients(centred, std::min<std::size_t>(32, n / 4));
  const std::size_t pad = n;
  std::vector<double> right = centred;
  extrapolate(right, coeffs, pad);
  std::vector<double> left(centred.rbegin(), centred.rend());
  extrapolate(left, coeffs, pad);

  const std::size_t m = n + 2 * pad;
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m));
  fftw_plan fwd, inv;
  {
    std::lock_guard lock(fftw_planner_mutex());
    fwd = fftw_plan_dft_1d(static_cast<int>(m), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    inv = fftw_plan_dft_1d(static_cast<int>(m), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < m; ++i) {
    double v;
    if (i < pad) v = left[n + pad - 1 - i];
    else v = right[i - pad];
    buf[i][0] = v + mean;
    buf[i][1] = 0.0;
  }
  fftw_execute(fwd);
  // Keep DC (and Nyquist for even lengths), double positive, zero negative.
  const std::size_t half = m / 2;
  for (std::size_t k = 1; k < m; ++k) {
    double h;
    if (m % 2 == 0)
      h = k < half ? 2.0 : (k == half ? 1.0 : 0.0);
    else
      h = k <= half ? 2.0 : 0.0;
    buf[k][0] *= h;
    buf[k][1] *= h;
  }
  fftw_execute(inv);
  std::vector<double> env(n);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::hypot(buf[pad + i][0], buf[pad + i][1]) * inv_m;
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  fftw_free(buf);
  return env;
}

// --------------------------------------------------------------------------
// Segment band power

ChannelEnvelopes channel_envelopes(const ContinuousEeg& eeg, const FrequencyBand& band,
                                   PowerMode mode) {
  ChannelEnvelopes out(eeg.channels);
  std::vector<double> x(eeg.samples);
  for (std::size_t c = 0; c < eeg.channels; ++c) {
    const auto ch = eeg.channel(c);
    std::copy(ch.begin(), ch.end(), x.begin());
    auto env = hilbert_envelope(bandpass(x, band, eeg.sample_rate_hz));
    if (mode == PowerMode::amplitude_squared)
      for (double& v : env) v *= v;
    out[c] = std::move(env);
  }
  return out;
}

std::vector<double> segment_mean(const ChannelEnvelopes& env, double sample_rate_hz,
                                 std::span<const Segment> segments) {
  if (segments.empty()) throw DataError("no fixations");
  if (env.empty()) throw DataError("no channels");
  const std::size_t total = env.front().size();
  const double extent_ms = static_cast<double>(total) * 1000.0 / sample_rate_hz;
  std::vector<char> mask(total, 0);
  for (const auto& seg : segments) {
    if (seg.onset_ms < 0.0 || seg.duration_ms < 0.0 ||
        seg.onset_ms + seg.duration_ms > extent_ms + 1e-6)
      throw RangeError("segment [" + std::to_string(seg.onset_ms) + ", " +
                       std::to_string(seg.onset_ms + seg.duration_ms) +
                       "] ms lies outside the recording (" + std::to_string(extent_ms) + " ms)");
    const auto begin = static_cast<std::size_t>(std::floor(seg.onset_ms * sample_rate_hz / 1000.0));
    auto end = static_cast<std::size_t>(
        std::ceil((seg.onset_ms + seg.duration_ms) * sample_rate_hz / 1000.0 - 1e-9));
    end = std::min(std::max(end, begin + 1), total);
    for (std::size_t t = begin; t < end; ++t) mask[t] = 1;
  }
  const auto count = static_cast<double>(std::count(mask.begin(), mask.end(), 1));
  if (count == 0.0) throw DataError("no fixations");
  std::vector<double> out(env.size());
  for (std::size_t c = 0; c < env.size(); ++c) {
    double s = 0.0;
    for (std::size_t t = 0; t < total; ++t)
      if (mask[t]) s += env[c][t];
    out[c] = s / count;
  }
  return out;
}

std::vector<double> segment_band_power(const ContinuousEeg& eeg, const FrequencyBand& band,
                                       std::span<const Segment> segments, PowerMode mode) {
  if (segments.empty()) throw DataError("no fixations");
  return segment_mean(channel_envelopes(eeg, band, mode), eeg.sample_rate_hz, segments);
}

}  // namespace readtask::dsp
