// Loading external series, preprocessing, supervised windowing, and the
// chronological split + standardization that every model consumes.
//
// Dataset persistence is a raw little-endian double blob (X rows, Y rows,
// preprocessed series) next to a JSON sidecar carrying shapes, the window
// config, the fitted scaler and the split bounds.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "matrix.hpp"
#include "series.hpp"

namespace rf {

struct WindowConfig {
    size_t past_len = 32;   // n
    size_t horizon = 16;    // m
    size_t stride = 1;

    void validate() const {
        if (past_len < 1 || horizon < 1 || stride < 1)
            throw std::invalid_argument("WindowConfig: n, m, stride must all be >= 1");
    }
};

struct Scaler {
    double mean = 0.0;
    double std = 1.0;

    double apply(double v) const { return (v - mean) / std; }
    double invert(double v) const { return v * std + mean; }
};

struct DaylightFilter {
    double lat_deg = 56.0;
    double lon_deg = 5.0;
    double zenith_max_deg = 80.0;
};

struct PreprocessSpec {
    bool log_transform = false;
    std::optional<DaylightFilter> daylight;
};

struct WindowedDataset {
    Matrix X;               // N x n, standardized pasts
    Matrix Y;               // N x m, standardized futures
    size_t train_end = 0;   // rows [0, train_end) are training
    size_t val_end = 0;     // rows [train_end, val_end) are validation
    Scaler scaler;
    WindowConfig config;
    std::vector<double> series;  // preprocessed source series (unscaled)

    size_t n_windows() const { return X.rows(); }
    size_t n_train() const { return train_end; }
    size_t n_val() const { return val_end - train_end; }
    size_t n_test() const { return X.rows() - val_end; }
};

// ------------------------------------------------------------------ CSV in

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

// ISO 8601 "YYYY-MM-DD[ T]HH:MM[:SS]" (UTC assumed) or plain epoch seconds.
inline double parse_timestamp(const std::string& raw, size_t row) {
    const std::string s = trim(raw);
    if (s.empty()) throw std::runtime_error("empty timestamp at data row " + std::to_string(row));
    if (s.find('-') == std::string::npos) {
        try {
            return std::stod(s);
        } catch (...) {
            throw std::runtime_error("unparseable timestamp '" + s + "' at data row " +
                                     std::to_string(row));
        }
    }
    int year, month, day, hour = 0, minute = 0, second = 0;
    char sep;
    std::istringstream in(s);
    in >> year >> sep >> month >> sep >> day;
    if (!in) throw std::runtime_error("unparseable timestamp '" + s + "' at data row " +
                                      std::to_string(row));
    if (in.peek() == 'T' || in.peek() == ' ') {
        in.get();
        in >> hour >> sep >> minute;
        if (in.peek() == ':') {
            in.get();
            in >> second;
        }
    }
    // days since 1970-01-01, civil-calendar algorithm
    const int y = year - (month <= 2 ? 1 : 0);
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (month + (month > 2 ? -3 : 9)) + 2u) / 5u + day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    const long long days = static_cast<long long>(era) * 146097 + static_cast<long long>(doe) -
                           719468;
    return static_cast<double>(days) * 86400.0 + hour * 3600.0 + minute * 60.0 + second;
}

}  // namespace detail

struct LoadedSeries {
    TimeSeries series;
    std::vector<double> timestamps;  // epoch seconds; empty when no column given
};

inline LoadedSeries load_csv(const std::string& path, const std::string& value_column,
                             const std::optional<std::string>& timestamp_column = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path);
    const auto header = detail::split_csv_line(line);
    auto find_col = [&](const std::string& name) -> size_t {
        for (size_t i = 0; i < header.size(); ++i)
            if (detail::trim(header[i]) == name) return i;
        throw std::runtime_error("unknown column '" + name + "' in " + path);
    };
    const size_t vcol = find_col(value_column);
    std::optional<size_t> tcol;
    if (timestamp_column) tcol = find_col(*timestamp_column);

    LoadedSeries out;
    out.series.name = value_column;
    out.series.source = SeriesSource::file;
    size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (vcol >= fields.size())
            throw std::runtime_error("short row " + std::to_string(row) + " in " + path);
        const std::string v = detail::trim(fields[vcol]);
        double value;
        try {
            value = std::stod(v);
        } catch (...) {
            throw std::runtime_error("unparseable value '" + v + "' at data row " +
                                     std::to_string(row) + " in " + path);
        }
        if (!std::isfinite(value))
            throw std::runtime_error("missing/non-finite value at data row " +
                                     std::to_string(row) + " in " + path);
        out.series.values.push_back(value);
        if (tcol) {
            if (*tcol >= fields.size())
                throw std::runtime_error("short row " + std::to_string(row) + " in " + path);
            out.timestamps.push_back(detail::parse_timestamp(fields[*tcol], row));
            if (out.timestamps.size() > 1 &&
                out.timestamps.back() <= out.timestamps[out.timestamps.size() - 2])
                throw std::runtime_error("non-monotone timestamps at data row " +
                                         std::to_string(row) + " in " + path);
        }
        ++row;
    }
    if (out.series.values.empty()) throw std::runtime_error("empty series in " + path);
    return out;
}

// ------------------------------------------------------------ preprocessing

// Solar zenith angle in degrees from Cooper declination + hour angle.
// Solar time is UTC hour + lon/15 (equation of time omitted; the filter
// threshold tolerates the resulting ~1 degree error near the cutoff).
inline double solar_zenith_deg(double epoch_seconds, double lat_deg, double lon_deg) {
    constexpr double kDegToRad = M_PI / 180.0;
    const double days = epoch_seconds / 86400.0;
    double day_in_year = std::fmod(days, 365.25);
    if (day_in_year < 0) day_in_year += 365.25;
    const int doy = static_cast<int>(day_in_year) + 1;
    const double decl = 23.45 * std::sin(2.0 * M_PI * (284.0 + doy) / 365.0);
    double utc_hour = std::fmod(epoch_seconds, 86400.0) / 3600.0;
    if (utc_hour < 0) utc_hour += 24.0;
    const double solar_hour = utc_hour + lon_deg / 15.0;
    const double hour_angle = 15.0 * (solar_hour - 12.0);
    const double cz = std::sin(lat_deg * kDegToRad) * std::sin(decl * kDegToRad) +
                      std::cos(lat_deg * kDegToRad) * std::cos(decl * kDegToRad) *
                          std::cos(hour_angle * kDegToRad);
    return std::acos(std::clamp(cz, -1.0, 1.0)) / kDegToRad;
}

// Log transform clips calm-wind values in [0, 0.1) up to 0.1 before log;
// strictly negative values are treated as corrupt input and rejected.
inline TimeSeries preprocess(const TimeSeries& series, const PreprocessSpec& spec,
                             const std::vector<double>& timestamps = {}) {
    series.validate();
    if (spec.daylight && timestamps.size() != series.values.size())
        throw std::runtime_error("daylight filter requested but timestamps are missing");
    TimeSeries out;
    out.name = series.name;
    out.source = series.source;
    out.seed = series.seed;
    for (size_t i = 0; i < series.values.size(); ++i) {
        if (spec.daylight) {
            const double z = solar_zenith_deg(timestamps[i], spec.daylight->lat_deg,
                                              spec.daylight->lon_deg);
            if (z >= spec.daylight->zenith_max_deg) continue;
        }
        double v = series.values[i];
        if (spec.log_transform) {
            if (v < 0.0)
                throw std::runtime_error("log transform: negative value at index " +
                                         std::to_string(i));
            v = std::log(std::max(v, 0.1));
        }
        out.values.push_back(v);
    }
    if (out.values.empty()) throw std::runtime_error("preprocess: no samples survived filtering");
    return out;
}

// ---------------------------------------------------------------- windowing

struct RawWindows {
    Matrix X;  // N x n
    Matrix Y;  // N x m
};

inline RawWindows make_windows(const TimeSeries& series, const WindowConfig& cfg) {
    cfg.validate();
    const size_t T = series.values.size();
    const size_t n = cfg.past_len, m = cfg.horizon;
    if (T < n + m)
        throw std::runtime_error("series too short for windows: T=" + std::to_string(T) +
                                 " < n+m=" + std::to_string(n + m));
    const size_t N = (T - n - m) / cfg.stride + 1;
    RawWindows w{Matrix(N, n), Matrix(N, m)};
    for (size_t i = 0; i < N; ++i) {
        const size_t base = i * cfg.stride;
        for (size_t j = 0; j < n; ++j) w.X(i, j) = series.values[base + j];
        for (size_t j = 0; j < m; ++j) w.Y(i, j) = series.values[base + n + j];
    }
    return w;
}

struct SplitFractions {
    double train = 0.70;
    double val = 0.15;
};

// Chronological split; scaler fitted over all elements of training X and Y
// jointly (a single scalar mean/std), then applied to every split.
inline WindowedDataset split_and_scale(const RawWindows& raw, const WindowConfig& cfg,
                                       const std::vector<double>& source_series,
                                       const SplitFractions& frac = {}) {
    const size_t N = raw.X.rows();
    if (N < 10) throw std::runtime_error("split_and_scale: need at least 10 windows");
    const size_t train_end = static_cast<size_t>(std::floor(frac.train * N));
    const size_t val_end = static_cast<size_t>(std::floor((frac.train + frac.val) * N));
    if (train_end == 0 || val_end <= train_end || val_end >= N)
        throw std::runtime_error("split_and_scale: degenerate split sizes");

    double sum = 0.0;
    size_t count = 0;
    for (size_t i = 0; i < train_end; ++i) {
        for (size_t j = 0; j < raw.X.cols(); ++j) sum += raw.X(i, j);
        for (size_t j = 0; j < raw.Y.cols(); ++j) sum += raw.Y(i, j);
        count += raw.X.cols() + raw.Y.cols();
    }
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (size_t i = 0; i < train_end; ++i) {
        for (size_t j = 0; j < raw.X.cols(); ++j) ss += (raw.X(i, j) - mean) * (raw.X(i, j) - mean);
        for (size_t j = 0; j < raw.Y.cols(); ++j) ss += (raw.Y(i, j) - mean) * (raw.Y(i, j) - mean);
    }
    const double var = ss / static_cast<double>(count);
    if (!(var > 0.0) || std::sqrt(var) < 1e-12)
        throw std::runtime_error("split_and_scale: zero variance in training data");

    WindowedDataset ds;
    ds.scaler = Scaler{mean, std::sqrt(var)};
    ds.config = cfg;
    ds.train_end = train_end;
    ds.val_end = val_end;
    ds.series = source_series;
    ds.X = raw.X;
    ds.Y = raw.Y;
    for (double& v : ds.X.raw()) v = ds.scaler.apply(v);
    for (double& v : ds.Y.raw()) v = ds.scaler.apply(v);
    return ds;
}

inline WindowedDataset build_dataset(const TimeSeries& series, const WindowConfig& cfg,
                                     const SplitFractions& frac = {}) {
    const RawWindows raw = make_windows(series, cfg);
    return split_and_scale(raw, cfg, series.values, frac);
}

// -------------------------------------------------------------- persistence

namespace detail {

inline void write_doubles(std::ofstream& out, const double* p, size_t count) {
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(count * 8));
}

inline void read_doubles(std::ifstream& in, double* p, size_t count) {
    in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(count * 8));
    if (!in) throw std::runtime_error("dataset blob truncated");
}

}  // namespace detail

inline void save_dataset(const WindowedDataset& ds, const std::string& path) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + path);
        out.write("RFDS", 4);
        detail::write_doubles(out, ds.X.data(), ds.X.size());
        detail::write_doubles(out, ds.Y.data(), ds.Y.size());
        detail::write_doubles(out, ds.series.data(), ds.series.size());
        if (!out) throw std::runtime_error("write failed: " + path);
    }
    nlohmann::json j{
        {"format", "rf-dataset-v1"},
        {"n_windows", ds.X.rows()},
        {"past_len", ds.config.past_len},
        {"horizon", ds.config.horizon},
        {"stride", ds.config.stride},
        {"train_end", ds.train_end},
        {"val_end", ds.val_end},
        {"scaler", {{"mean", ds.scaler.mean}, {"std", ds.scaler.std}}},
        {"series_len", ds.series.size()},
    };
    std::ofstream side(path + ".json");
    if (!side) throw std::runtime_error("cannot open for writing: " + path + ".json");
    side << j.dump(2) << '\n';
}

inline WindowedDataset load_dataset(const std::string& path) {
    std::ifstream side(path + ".json");
    if (!side) throw std::runtime_error("missing dataset sidecar: " + path + ".json");
    nlohmann::json j;
    side >> j;
    WindowedDataset ds;
    const size_t N = j.at("n_windows").get<size_t>();
    ds.config.past_len = j.at("past_len").get<size_t>();
    ds.config.horizon = j.at("horizon").get<size_t>();
    ds.config.stride = j.at("stride").get<size_t>();
    ds.train_end = j.at("train_end").get<size_t>();
    ds.val_end = j.at("val_end").get<size_t>();
    ds.scaler.mean = j.at("scaler").at("mean").get<double>();
    ds.scaler.std = j.at("scaler").at("std").get<double>();
    const size_t series_len = j.at("series_len").get<size_t>();

    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("missing dataset blob: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "RFDS")
        throw std::runtime_error("bad dataset magic in " + path);
    ds.X = Matrix(N, ds.config.past_len);
    ds.Y = Matrix(N, ds.config.horizon);
    ds.series.resize(series_len);
    detail::read_doubles(in, ds.X.data(), ds.X.size());
    detail::read_doubles(in, ds.Y.data(), ds.Y.size());
    detail::read_doubles(in, ds.series.data(), series_len);
    return ds;
}

}  // namespace rf
