#include "mirrorshift/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "mirrorshift/errors.hpp"

namespace mirrorshift {

namespace {

constexpr const char* kCsvHeader = "tau,mu,mu_dot,flux_plus,flux_minus,alpha,err";

double parse_field(const std::string& text, std::size_t line_no) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%zu", line_no);
    const char* begin = text.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw DomainError(std::string("csv line ") + buf + ": bad numeric field '" + text + "'");
    return v;
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& os, const MassShiftSeries& series) {
    os << kCsvHeader << '\n';
    for (const MassShiftSample& s : series) {
        os << format_double(s.tau) << ',' << format_double(s.mu) << ','
           << format_double(s.mu_dot) << ',' << format_double(s.flux_plus) << ','
           << format_double(s.flux_minus) << ',' << format_double(s.alpha) << ','
           << format_double(s.err) << '\n';
    }
}

void write_json(std::ostream& os, const MassShiftSeries& series, const RunMetadata& meta) {
    nlohmann::ordered_json doc;
    doc["metadata"] = {
        {"command", meta.command},   {"trajectory", meta.trajectory},
        {"a", meta.a},               {"rel_tol", meta.rel_tol},
        {"abs_tol", meta.abs_tol},   {"window_lambda", meta.window_lambda},
        {"version", meta.version},
    };
    nlohmann::ordered_json samples = nlohmann::ordered_json::array();
    for (const MassShiftSample& s : series) {
        samples.push_back({
            {"tau", s.tau},
            {"mu", s.mu},
            {"mu_dot", s.mu_dot},
            {"flux_plus", s.flux_plus},
            {"flux_minus", s.flux_minus},
            {"alpha", s.alpha},
            {"err", s.err},
            {"converged", s.converged},
        });
    }
    doc["samples"] = std::move(samples);
    os << doc.dump(2) << '\n';
}

MassShiftSeries read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw DomainError("csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader)
        throw DomainError("csv: unexpected header '" + line + "'");

    MassShiftSeries series;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        double values[7];
        for (double& v : values) {
            if (!std::getline(row, field, ','))
                throw DomainError("csv: short row at line " + std::to_string(line_no));
            v = parse_field(field, line_no);
        }
        if (std::getline(row, field, ','))
            throw DomainError("csv: extra fields at line " + std::to_string(line_no));
        MassShiftSample s;
        s.tau = values[0];
        s.mu = values[1];
        s.mu_dot = values[2];
        s.flux_plus = values[3];
        s.flux_minus = values[4];
        s.alpha = values[5];
        s.err = values[6];
        series.push_back(s);
    }
    return series;
}

} // namespace mirrorshift
