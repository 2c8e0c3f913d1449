#pragma once

#include <cstdio>
#include <string>
#include <variant>
#include <vector>

namespace frugal {

using MetricCell = std::variant<long long, double>;

// CSV with a versioned comment line on top. Formatting is fixed so the same
// sequence of values always produces the same bytes; nothing time- or
// environment-dependent is ever written.
class MetricsWriter {
public:
    MetricsWriter(const std::string& path, const std::vector<std::string>& columns);
    ~MetricsWriter();

    MetricsWriter(const MetricsWriter&) = delete;
    MetricsWriter& operator=(const MetricsWriter&) = delete;

    void row(const std::vector<MetricCell>& cells);
    void flush();

    static std::string format_cell(const MetricCell& cell);

private:
    FILE* f_ = nullptr;
    size_t columns_ = 0;
};

struct MetricsTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

// Reads a metrics CSV back; every cell is parsed as a double.
MetricsTable read_metrics(const std::string& path);

}  // namespace frugal
