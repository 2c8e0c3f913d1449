#include "frugal/metrics.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace frugal {

namespace {
constexpr const char* kMagicLine = "# frugal-metrics v1";
}

MetricsWriter::MetricsWriter(const std::string& path, const std::vector<std::string>& columns)
    : columns_(columns.size()) {
    if (columns.empty()) {
        throw std::invalid_argument("MetricsWriter: need at least one column");
    }
    f_ = std::fopen(path.c_str(), "wb");
    if (f_ == nullptr) {
        throw std::runtime_error("MetricsWriter: cannot open " + path);
    }
    std::fprintf(f_, "%s\n", kMagicLine);
    for (size_t i = 0; i < columns.size(); ++i) {
        std::fprintf(f_, "%s%s", i == 0 ? "" : ",", columns[i].c_str());
    }
    std::fprintf(f_, "\n");
}

MetricsWriter::~MetricsWriter() {
    if (f_ != nullptr) {
        std::fclose(f_);
    }
}

std::string MetricsWriter::format_cell(const MetricCell& cell) {
    char buf[40];
    if (std::holds_alternative<long long>(cell)) {
        std::snprintf(buf, sizeof(buf), "%lld", std::get<long long>(cell));
    } else {
        std::snprintf(buf, sizeof(buf), "%.12g", std::get<double>(cell));
    }
    return buf;
}

void MetricsWriter::row(const std::vector<MetricCell>& cells) {
    if (cells.size() != columns_) {
        throw std::invalid_argument("MetricsWriter: cell count does not match header");
    }
    for (size_t i = 0; i < cells.size(); ++i) {
        const std::string s = format_cell(cells[i]);
        std::fprintf(f_, "%s%s", i == 0 ? "" : ",", s.c_str());
    }
    std::fprintf(f_, "\n");
}

void MetricsWriter::flush() { std::fflush(f_); }

int MetricsTable::column(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return static_cast<int>(i);
    }
    return -1;
}

MetricsTable read_metrics(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("read_metrics: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line != kMagicLine) {
        throw std::runtime_error("read_metrics: " + path + " is not a metrics file");
    }
    MetricsTable t;
    if (!std::getline(in, line)) {
        throw std::runtime_error("read_metrics: " + path + " has no header row");
    }
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) {
        t.columns.push_back(cell);
    }
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) {
            row.push_back(std::stod(cell));
        }
        if (row.size() != t.columns.size()) {
            throw std::runtime_error("read_metrics: ragged row in " + path);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace frugal
