#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

namespace tacgap::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kParameter = 2, kNumerical = 3, kCheckFailed = 4 };

// ParameterError -> 2; NumericalError and anything else -> 3.
int exit_code_for(const std::exception& e);

// Entry point of the `tacgap` tool. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "lo:hi[,lo:hi...]" -> flat list lo1, hi1, lo2, hi2, ...; ParameterError on
// malformed text or pieces that are not increasing and disjoint.
std::vector<double> parse_intervals(const std::string& text);

// "v1[,v2...]" -> list of reals.
std::vector<double> parse_list(const std::string& text);

// steps points from lo to hi inclusive (steps == 1 requires lo == hi).
std::vector<double> linspace(double lo, double hi, int steps);

// %.17g
std::string format_real(double v);

}  // namespace tacgap::cli
