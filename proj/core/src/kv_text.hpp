#pragma once

// Line-oriented "key = value" text used by the persisted artifacts.

#include "hybridml/common.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace hybridml::kv {

using Table = std::map<std::string, std::string>;

/// Reads until EOF or a line equal to `end_marker` (if non-empty). '#' starts a comment line.
Table read(std::istream& in, const std::string& module, const std::string& end_marker = "");

const std::string& require(const Table& t, const std::string& key, const std::string& module);

std::vector<double> parse_doubles(const std::string& text, const std::string& module);
std::vector<long long> parse_ints(const std::string& text, const std::string& module);
double parse_double(const std::string& text, const std::string& module);
long long parse_int(const std::string& text, const std::string& module);

std::string join(const Vector& v);
std::string join(const std::vector<double>& v);
std::string join(const IndexList& v);

void expect_header(const Table& t, const std::string& format, int version, const std::string& module);

}  // namespace hybridml::kv
