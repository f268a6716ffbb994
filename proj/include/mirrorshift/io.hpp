#pragma once

#include <iosfwd>
#include <string>

#include "mirrorshift/massshift.hpp"

namespace mirrorshift {

/// Run description embedded in JSON output.
struct RunMetadata {
    std::string command;
    std::string trajectory;
    double a = 0.0;
    double rel_tol = 0.0;
    double abs_tol = 0.0;
    double window_lambda = 0.0;
    std::string version;
};

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

/// CSV with header "tau,mu,mu_dot,flux_plus,flux_minus,alpha,err", one row
/// per sample, LF line endings, full round-trip precision.
void write_csv(std::ostream& os, const MassShiftSeries& series);

/// Same samples as a JSON document with run metadata attached.
void write_json(std::ostream& os, const MassShiftSeries& series, const RunMetadata& meta);

/// Parses write_csv output (round-trip checks and downstream tooling).
MassShiftSeries read_csv(std::istream& is);

} // namespace mirrorshift
