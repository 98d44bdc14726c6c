// SPDX-License-Identifier: Apache-2.0
#include <fedqt/gwdata.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace fedqt::gwdata {

namespace {

void check_spec(const WaveformSpec &spec) {
    if (spec.total_samples < 1) {
        throw std::invalid_argument("waveform needs at least 1 sample");
    }
    if (spec.merger_index <= 0 || spec.merger_index >= spec.total_samples) {
        throw std::invalid_argument(
            "merger index " + std::to_string(spec.merger_index) +
            " must lie strictly inside the series of " +
            std::to_string(spec.total_samples) + " samples");
    }
    if (!(spec.amplitude_floor > 0.0)) {
        throw std::invalid_argument("amplitude floor must be positive");
    }
    if (!(spec.ringdown_decay > 0.0)) {
        throw std::invalid_argument("ringdown decay must be positive");
    }
    if (!std::isfinite(spec.base_frequency) ||
        !std::isfinite(spec.ringdown_frequency)) {
        throw std::invalid_argument("frequencies must be finite");
    }
}

double parse_double(const std::string &field, std::size_t line_no,
                    const char *what) {
    double value = 0.0;
    const char *begin = field.data();
    const char *end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": cannot parse " + what + " from '" +
                                 field + "'");
    }
    return value;
}

} // namespace

WaveformSpec default_spec(int setting_id) {
    WaveformSpec spec;
    spec.setting_id = setting_id;
    switch (setting_id) {
    case 1:
        spec.merger_index = 200;
        spec.base_frequency = 0.02;
        spec.ringdown_frequency = 0.12;
        spec.ringdown_decay = 15.0;
        break;
    case 2:
        spec.merger_index = 180;
        spec.base_frequency = 0.03;
        spec.ringdown_frequency = 0.16;
        spec.ringdown_decay = 10.0;
        break;
    case 3:
        spec.merger_index = 220;
        spec.base_frequency = 0.015;
        spec.ringdown_frequency = 0.10;
        spec.ringdown_decay = 20.0;
        break;
    default:
        throw std::invalid_argument("waveform setting must be 1, 2 or 3, got " +
                                    std::to_string(setting_id));
    }
    return spec;
}

Eigen::VectorXd synthesize(const WaveformSpec &spec) {
    check_spec(spec);
    const int T = spec.total_samples;
    const int tc = spec.merger_index;
    const double eps = spec.amplitude_floor;

    Eigen::VectorXd h(T);
    double phase = 0.0;
    for (int t = 0; t < tc; ++t) {
        const double remain = static_cast<double>(tc - t) + eps;
        const double amp = std::pow(remain, -0.25);
        const double freq = spec.base_frequency * std::pow(remain, -0.375);
        phase += 2.0 * M_PI * freq;
        h[t] = amp * std::cos(phase);
    }
    // The ringdown inherits the amplitude envelope and phase accumulated
    // through the merger sample itself.
    const double merger_amp = std::pow(eps, -0.25);
    const double merger_phase =
        phase + 2.0 * M_PI * spec.base_frequency * std::pow(eps, -0.375);
    for (int t = tc; t < T; ++t) {
        const double dt = static_cast<double>(t - tc);
        h[t] = merger_amp * std::exp(-dt / spec.ringdown_decay) *
               std::cos(2.0 * M_PI * spec.ringdown_frequency * dt +
                        merger_phase);
    }

    const double peak = h.cwiseAbs().maxCoeff();
    if (!(peak > 0.0)) {
        throw std::invalid_argument("degenerate waveform: all samples zero");
    }
    h *= 0.8 / peak;
    return h;
}

void save_series_csv(const std::string &path, const Eigen::VectorXd &series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << "t,h\n";
    char buf[64];
    for (Eigen::Index t = 0; t < series.size(); ++t) {
        std::snprintf(buf, sizeof(buf), "%lld,%.17g\n",
                      static_cast<long long>(t), series[t]);
        out << buf;
    }
    if (!out) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

Eigen::VectorXd load_series_csv(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> values;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line_no == 1) {
            if (line != "t,h") {
                throw std::runtime_error(
                    "line 1: expected header 't,h', got '" + line + "'");
            }
            continue;
        }
        if (line.empty()) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": expected 'index,value'");
        }
        parse_double(line.substr(0, comma), line_no, "sample index");
        const double value =
            parse_double(line.substr(comma + 1), line_no, "sample value");
        if (!std::isfinite(value)) {
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": non-finite sample value");
        }
        values.push_back(value);
    }
    if (values.empty()) {
        throw std::runtime_error("'" + path + "' contains no samples");
    }
    return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                             static_cast<Eigen::Index>(
                                                 values.size()));
}

SeriesDataset make_dataset(const Eigen::VectorXd &series, int lookback,
                           double split_fraction,
                           Normalization normalization) {
    if (lookback < 1) {
        throw std::invalid_argument("lookback must be >= 1");
    }
    const Eigen::Index T = series.size();
    if (T < lookback + 1) {
        throw std::invalid_argument(
            "series of " + std::to_string(T) +
            " samples is too short for lookback " + std::to_string(lookback) +
            " (need at least lookback + 1)");
    }
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
        throw std::invalid_argument("split fraction must be in (0, 1)");
    }

    SeriesDataset ds;
    ds.series = series;
    if (normalization == Normalization::kMinMax) {
        const double lo = series.minCoeff();
        const double hi = series.maxCoeff();
        if (!(hi > lo)) {
            throw std::invalid_argument(
                "constant series cannot be min-max rescaled");
        }
        ds.scale = 1.6 / (hi - lo);
        ds.series = ((series.array() - lo) * ds.scale - 0.8).matrix();
    }

    // floor(split_fraction * T), with a guard so the exact rational 2/3
    // lands on floor(2T/3) despite 2.0/3.0 rounding down in binary.
    ds.split_index = static_cast<Eigen::Index>(
        std::floor(split_fraction * static_cast<double>(T) + 1e-9));

    for (Eigen::Index t = lookback; t < T; ++t) {
        Window w;
        w.inputs = ds.series.segment(t - lookback, lookback);
        w.target = ds.series[t];
        w.target_index = t;
        (t < ds.split_index ? ds.train : ds.test).push_back(std::move(w));
    }
    return ds;
}

} // namespace fedqt::gwdata
