#include "kv_text.hpp"

#include <charconv>
#include <sstream>

namespace hybridml::kv {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace

Table read(std::istream& in, const std::string& module, const std::string& end_marker) {
  Table t;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(line);
    if (!end_marker.empty() && s == end_marker) return t;
    if (s.empty() || s.front() == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw Error(module, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    t[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
  if (!end_marker.empty()) throw Error(module, "missing terminator '" + end_marker + "'");
  return t;
}

const std::string& require(const Table& t, const std::string& key, const std::string& module) {
  const auto it = t.find(key);
  if (it == t.end()) throw Error(module, "missing key '" + key + "'");
  return it->second;
}

double parse_double(const std::string& text, const std::string& module) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(module, "not a number: '" + text + "'");
  }
}

long long parse_int(const std::string& text, const std::string& module) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(module, "not an integer: '" + text + "'");
  }
  return v;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& module) {
  std::vector<double> out;
  for (const auto& item : split_commas(text)) out.push_back(parse_double(item, module));
  return out;
}

std::vector<long long> parse_ints(const std::string& text, const std::string& module) {
  std::vector<long long> out;
  for (const auto& item : split_commas(text)) out.push_back(parse_int(item, module));
  return out;
}

std::string join(const Vector& v) {
  std::string s;
  for (Index i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v(i));
  }
  return s;
}

std::string join(const std::vector<double>& v) {
  return join(Vector(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()))));
}

std::string join(const IndexList& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

void expect_header(const Table& t, const std::string& format, int version, const std::string& module) {
  if (require(t, "format", module) != format) throw Error(module, "expected format '" + format + "'");
  if (parse_int(require(t, "version", module), module) != version) {
    throw Error(module, "unsupported " + format + " version");
  }
}

}  // namespace hybridml::kv
