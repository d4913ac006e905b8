// TimeSeries: a univariate real-valued sequence with provenance metadata,
// plus CSV read/write in the two-column `index,value` form the CLI emits.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rf {

enum class SeriesSource { synthetic, file };

struct TimeSeries {
    std::vector<double> values;
    std::string name;
    SeriesSource source = SeriesSource::synthetic;
    std::optional<uint64_t> seed;

    size_t length() const { return values.size(); }

    void validate() const {
        if (values.empty()) throw std::runtime_error("TimeSeries '" + name + "' is empty");
        for (size_t i = 0; i < values.size(); ++i)
            if (!std::isfinite(values[i]))
                throw std::runtime_error("TimeSeries '" + name + "': non-finite value at index " +
                                         std::to_string(i));
    }
};

inline void write_series_csv(const TimeSeries& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "index,value\n";
    out.precision(17);
    for (size_t i = 0; i < s.values.size(); ++i) out << i << ',' << s.values[i] << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace rf
