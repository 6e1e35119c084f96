#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace effortlab {

// "key = value" lines; '#' starts a comment; blank lines ignored. Throws
// kFormat naming the offending line.
std::map<std::string, std::string> ParseKeyValue(std::string_view text);

double ParseDouble(std::string_view text, std::string_view what);
long long ParseInteger(std::string_view text, std::string_view what);
std::vector<double> ParseDoubleList(std::string_view text, std::string_view what);

// Shortest representation that round-trips through ParseDouble.
std::string FormatDouble(double v);

}  // namespace effortlab
