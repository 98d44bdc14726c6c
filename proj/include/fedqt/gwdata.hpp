// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fedqt::gwdata {

/// Chirp-plus-ringdown synthesis parameters. Frequencies are in cycles
/// per sample, times in samples. The seed is carried for config plumbing;
/// synthesis itself is deterministic.
struct WaveformSpec {
    int setting_id = 1;
    int total_samples = 300;
    int merger_index = 200;
    double base_frequency = 0.02;
    double amplitude_floor = 1.0;
    double ringdown_frequency = 0.12;
    double ringdown_decay = 15.0;
    std::uint64_t seed = 0;
};

/// The three built-in waveform settings (distinct chirp rates and merger
/// placements). Rejects any other id.
WaveformSpec default_spec(int setting_id);

/// Inspiral-merger-ringdown-like series of length total_samples:
/// a (t_c - t + eps)^(-1/4) envelope with instantaneous frequency
/// f0 (t_c - t + eps)^(-3/8) up to the merger, then an exponentially
/// damped ringdown that inherits the merger amplitude and phase. The
/// result is rescaled so max |h| = 0.8.
Eigen::VectorXd synthesize(const WaveformSpec &spec);

/// CSV exchange format: UTF-8, LF line endings, header `t,h`, one
/// `index,value` row per sample with 17 significant digits.
void save_series_csv(const std::string &path, const Eigen::VectorXd &series);
Eigen::VectorXd load_series_csv(const std::string &path);

/// One supervised example: `lookback` consecutive samples and the sample
/// immediately after them.
struct Window {
    Eigen::VectorXd inputs;
    double target = 0.0;
    Eigen::Index target_index = 0;
};

enum class Normalization {
    kNone,   // series is already in the modelling range
    kMinMax, // rescale to [-0.8, 0.8] (for externally loaded series)
};

struct SeriesDataset {
    std::vector<Window> train;
    std::vector<Window> test;
    Eigen::Index split_index = 0;
    double scale = 1.0;
    Eigen::VectorXd series; // after normalization
};

/// Sliding windows over the series with targets split at
/// floor(split_fraction * length): train targets strictly before the
/// split index, test targets at or after it. Requires length >=
/// lookback + 1 (at least one window).
SeriesDataset make_dataset(const Eigen::VectorXd &series, int lookback,
                           double split_fraction = 2.0 / 3.0,
                           Normalization normalization = Normalization::kNone);

} // namespace fedqt::gwdata
