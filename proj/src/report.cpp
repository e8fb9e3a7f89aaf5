#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "bsde/errors.hpp"
#include "bsde/harness.hpp"

namespace bsde {

namespace {

using nlohmann::json;

constexpr const char* kHeader = "problem,scheme,backend,mesh,beta,n,err_y,err_z,metric_t2,runtime_ms";

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw InvalidArgument("bad number in report: " + s);
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

void write_csv(std::ostream& os, const ConvergenceReport& r) {
    os << kHeader << '\n';
    os << std::setprecision(17);
    for (const auto& row : r.rows) {
        os << row.problem << ',' << row.scheme << ',' << row.backend << ',' << row.mesh << ',' << row.beta << ','
           << row.n << ',' << row.err_y << ',' << row.err_z << ',' << row.metric_t2 << ',' << row.runtime_ms << '\n';
    }
    os << "fitted_slope,";
    if (std::isfinite(r.fitted_slope)) os << r.fitted_slope;
    else os << "nan";
    os << '\n';
}

ConvergenceReport read_csv(std::istream& is) {
    ConvergenceReport r;
    std::string line;
    if (!std::getline(is, line) || line != kHeader) throw InvalidArgument("unexpected CSV header");
    bool footer = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() == 2 && cells[0] == "fitted_slope") {
            r.fitted_slope = parse_double(cells[1]);
            footer = true;
            continue;
        }
        if (cells.size() != 10) throw InvalidArgument("CSV row has " + std::to_string(cells.size()) + " cells");
        ReportRow row;
        row.problem = cells[0];
        row.scheme = cells[1];
        row.backend = cells[2];
        row.mesh = cells[3];
        row.beta = parse_double(cells[4]);
        row.n = std::stoi(cells[5]);
        row.err_y = parse_double(cells[6]);
        row.err_z = parse_double(cells[7]);
        row.metric_t2 = parse_double(cells[8]);
        row.runtime_ms = parse_double(cells[9]);
        r.rows.push_back(std::move(row));
    }
    if (!footer) throw InvalidArgument("CSV report lacks the fitted_slope footer");
    return r;
}

void write_json(std::ostream& os, const ConvergenceReport& r) {
    json doc;
    doc["config"] = r.config;
    doc["fitted_slope"] = number(r.fitted_slope);
    doc["floor"] = r.floor;
    doc["excluded_n"] = r.excluded;
    doc["rows"] = json::array();
    for (const auto& row : r.rows) {
        json jr{{"problem", row.problem}, {"scheme", row.scheme},   {"backend", row.backend},
                {"mesh", row.mesh},       {"beta", row.beta},       {"n", row.n},
                {"err_y", row.err_y},     {"err_z", row.err_z},     {"metric_t2", row.metric_t2},
                {"runtime_ms", row.runtime_ms}};
        jr["per_index"] = json::array();
        for (const auto& e : row.per_index)
            jr["per_index"].push_back(
                {{"i", e.i}, {"t", e.t}, {"err_y", e.err_y}, {"err_z", e.err_z}, {"metric", e.metric}});
        doc["rows"].push_back(std::move(jr));
    }
    os << doc.dump(2) << '\n';
}

ConvergenceReport read_json(std::istream& is) {
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed JSON report: ") + e.what());
    }
    ConvergenceReport r;
    r.config = doc.at("config").get<std::map<std::string, std::string>>();
    r.fitted_slope = number(doc.at("fitted_slope"));
    r.floor = doc.at("floor").get<double>();
    r.excluded = doc.at("excluded_n").get<std::vector<int>>();
    for (const auto& jr : doc.at("rows")) {
        ReportRow row;
        row.problem = jr.at("problem");
        row.scheme = jr.at("scheme");
        row.backend = jr.at("backend");
        row.mesh = jr.at("mesh");
        row.beta = jr.at("beta");
        row.n = jr.at("n");
        row.err_y = jr.at("err_y");
        row.err_z = jr.at("err_z");
        row.metric_t2 = jr.at("metric_t2");
        row.runtime_ms = jr.at("runtime_ms");
        for (const auto& e : jr.at("per_index"))
            row.per_index.push_back({e.at("i"), e.at("t"), e.at("err_y"), e.at("err_z"), e.at("metric")});
        r.rows.push_back(std::move(row));
    }
    return r;
}

}  // namespace bsde
