#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace sgame {

// Minimal delimited-text helpers. Fields are taken verbatim between
// delimiters; quoting is not interpreted (none of the pipeline's columns
// carry embedded delimiters).

std::vector<std::string> split_delimited(const std::string& line, char delimiter);

// Reads one line, tolerating trailing '\r'. Returns false at end of stream.
bool read_csv_line(std::istream& in, std::string& line);

// Shortest decimal form that round-trips the exact double (std::to_chars).
std::string format_double(double v);

// Strict numeric parses; throw std::invalid_argument on any trailing garbage.
double parse_double(const std::string& field);
long long parse_int(const std::string& field);

std::string join(const std::vector<std::string>& fields, char delimiter);

}  // namespace sgame
