#pragma once
// Experiment reports: a config echo, CSV tables, fitted models, named scalar
// metrics and pass/fail flags. Serialized deterministically (shortest
// round-trip decimal for every double).

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ks/dd.hpp"

namespace ks {

inline constexpr int kReportSchemaVersion = 1;

// Shortest round-trip decimal; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

struct Table {
    std::string name;  // "" for the main table
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    // Appends name_hi, name_lo, name (the float64 convenience column).
    static void dd_columns(std::vector<std::string>& columns, const std::string& name);
    static void dd_cells(std::vector<std::string>& row, DD v);
};

struct Fit {
    std::string name;
    std::string model;  // e.g. "log lambda = a - c i^(1/d)"
    std::vector<std::pair<std::string, double>> params;
    double r2 = 0.0;
    std::size_t count = 0;
    double x_first = 0.0;  // fitted window
    double x_last = 0.0;

    double param(const std::string& key) const;
};

struct Flag {
    std::string name;
    bool pass = false;
    double value = 0.0;
    std::string op;  // "<=", ">=", "==", "<", ">"
    double threshold = 0.0;
};

// Compares value against threshold with op.
Flag make_flag(std::string name, double value, const std::string& op, double threshold);

struct PlotSeries {
    std::string label;
    std::string x_label;
    std::string y_label;
    std::vector<std::pair<double, double>> points;
};

struct Report {
    std::string id;
    int schema = kReportSchemaVersion;
    std::vector<std::pair<std::string, std::string>> config;
    Table rows;
    std::vector<Table> extra;  // written as <id>.<name>.csv
    std::vector<Fit> fits;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<Flag> flags;
    std::vector<PlotSeries> plots;
    std::vector<std::string> notes;

    bool all_pass() const;
    const Flag& flag(const std::string& name) const;
    const Fit& fit(const std::string& name) const;
    double metric(const std::string& name) const;
    const Table& table(const std::string& name) const;

    void echo(const std::string& key, const std::string& value) { config.emplace_back(key, value); }
    void echo(const std::string& key, double value) { config.emplace_back(key, format_double(value)); }
    void metric(const std::string& key, double value) { metrics.emplace_back(key, value); }
};

std::string to_csv(const Table& t);
std::string to_json(const Report& r);
std::string to_gnuplot(const Report& r);

// Writes <id>.csv, <id>.json, <id>.gp.dat and one CSV per extra table into
// dir (created if missing). Returns the paths written. Throws
// std::filesystem::filesystem_error or std::ios_base::failure on I/O errors.
std::vector<std::filesystem::path> write_report(const Report& r, const std::filesystem::path& dir);

}  // namespace ks
