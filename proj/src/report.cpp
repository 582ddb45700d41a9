#include "ks/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace ks {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void Table::dd_columns(std::vector<std::string>& columns, const std::string& name) {
    columns.push_back(name + "_hi");
    columns.push_back(name + "_lo");
    columns.push_back(name);
}

void Table::dd_cells(std::vector<std::string>& row, DD v) {
    row.push_back(format_double(v.hi));
    row.push_back(format_double(v.lo));
    row.push_back(format_double(dd::to_double(v)));
}

double Fit::param(const std::string& key) const {
    for (const auto& [k, v] : params)
        if (k == key) return v;
    throw std::out_of_range("fit '" + name + "' has no parameter '" + key + "'");
}

Flag make_flag(std::string name, double value, const std::string& op, double threshold) {
    bool pass = false;
    if (op == "<=") pass = value <= threshold;
    else if (op == ">=") pass = value >= threshold;
    else if (op == "<") pass = value < threshold;
    else if (op == ">") pass = value > threshold;
    else if (op == "==") pass = value == threshold;
    else throw std::invalid_argument("make_flag: unknown comparison '" + op + "'");
    return {std::move(name), pass, value, op, threshold};
}

bool Report::all_pass() const {
    for (const auto& f : flags)
        if (!f.pass) return false;
    return true;
}

const Flag& Report::flag(const std::string& name) const {
    for (const auto& f : flags)
        if (f.name == name) return f;
    throw std::out_of_range("report '" + id + "' has no flag '" + name + "'");
}

const Fit& Report::fit(const std::string& name) const {
    for (const auto& f : fits)
        if (f.name == name) return f;
    throw std::out_of_range("report '" + id + "' has no fit '" + name + "'");
}

double Report::metric(const std::string& name) const {
    for (const auto& [k, v] : metrics)
        if (k == name) return v;
    throw std::out_of_range("report '" + id + "' has no metric '" + name + "'");
}

const Table& Report::table(const std::string& name) const {
    if (name.empty() || name == rows.name) return rows;
    for (const auto& t : extra)
        if (t.name == name) return t;
    throw std::out_of_range("report '" + id + "' has no table '" + name + "'");
}

namespace {

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

// Doubles go through format_double so JSON output matches the CSV text;
// non-finite values become strings.
nlohmann::ordered_json number(double v) {
    if (!std::isfinite(v)) return format_double(v);
    return nlohmann::ordered_json::parse(format_double(v));
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open '" + p.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw std::ios_base::failure("write failed for '" + p.string() + "'");
}

}  // namespace

std::string to_csv(const Table& t) {
    std::string s;
    for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + csv_cell(t.columns[i]);
    s += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + csv_cell(row[i]);
        s += "\n";
    }
    return s;
}

std::string to_json(const Report& r) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["schema_version"] = r.schema;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.config) cfg[k] = v;
    j["config"] = cfg;
    j["row_count"] = r.rows.rows.size();
    nlohmann::ordered_json fits = nlohmann::ordered_json::array();
    for (const auto& f : r.fits) {
        nlohmann::ordered_json o;
        o["name"] = f.name;
        o["model"] = f.model;
        nlohmann::ordered_json p = nlohmann::ordered_json::object();
        for (const auto& [k, v] : f.params) p[k] = number(v);
        o["params"] = p;
        o["r2"] = number(f.r2);
        o["count"] = f.count;
        o["window"] = {number(f.x_first), number(f.x_last)};
        fits.push_back(o);
    }
    j["fits"] = fits;
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.metrics) metrics[k] = number(v);
    j["metrics"] = metrics;
    nlohmann::ordered_json flags = nlohmann::ordered_json::array();
    for (const auto& f : r.flags) {
        nlohmann::ordered_json o;
        o["name"] = f.name;
        o["pass"] = f.pass;
        o["value"] = number(f.value);
        o["op"] = f.op;
        o["threshold"] = number(f.threshold);
        flags.push_back(o);
    }
    j["flags"] = flags;
    j["all_pass"] = r.all_pass();
    j["notes"] = r.notes;
    return j.dump(2) + "\n";
}

std::string to_gnuplot(const Report& r) {
    std::string s = "# " + r.id + "\n";
    bool first = true;
    for (const auto& p : r.plots) {
        if (!first) s += "\n\n";
        first = false;
        s += "# series: " + p.label + "\n# " + p.x_label + " " + p.y_label + "\n";
        for (const auto& [x, y] : p.points) s += format_double(x) + " " + format_double(y) + "\n";
    }
    return s;
}

std::vector<std::filesystem::path> write_report(const Report& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> paths;
    auto put = [&](const std::string& name, const std::string& content) {
        paths.push_back(dir / name);
        write_file(paths.back(), content);
    };
    put(r.id + ".csv", to_csv(r.rows));
    put(r.id + ".json", to_json(r));
    put(r.id + ".gp.dat", to_gnuplot(r));
    for (const auto& t : r.extra) put(r.id + "." + t.name + ".csv", to_csv(t));
    return paths;
}

}  // namespace ks
