#include "model_io.hpp"

#include "kv_text.hpp"

namespace hybridml::model_io {

namespace {
constexpr const char* kModule = "model-io";
}

Writer& Writer::field(const std::string& name, double v) {
  out_ << name << ' ' << format_double(v) << '\n';
  return *this;
}

Writer& Writer::field(const std::string& name, long long v) {
  out_ << name << ' ' << v << '\n';
  return *this;
}

Writer& Writer::field(const std::string& name, const std::string& v) {
  out_ << name << ' ' << v << '\n';
  return *this;
}

Writer& Writer::field(const std::string& name, const Vector& v) {
  out_ << name << ' ' << v.size();
  for (Index i = 0; i < v.size(); ++i) out_ << ' ' << format_double(v(i));
  out_ << '\n';
  return *this;
}

Writer& Writer::field(const std::string& name, const std::vector<double>& v) {
  return field(name, Vector(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()))));
}

std::string Reader::next() {
  std::string tok;
  if (!(in_ >> tok)) throw Error(kModule, "unexpected end of model file");
  return tok;
}

void Reader::expect(const std::string& name) {
  const auto tok = next();
  if (tok != name) throw Error(kModule, "expected field '" + name + "', found '" + tok + "'");
}

double Reader::real(const std::string& name) {
  expect(name);
  return kv::parse_double(next(), kModule);
}

long long Reader::integer(const std::string& name) {
  expect(name);
  return kv::parse_int(next(), kModule);
}

std::string Reader::word(const std::string& name) {
  expect(name);
  return next();
}

Vector Reader::vector(const std::string& name) {
  expect(name);
  const auto n = kv::parse_int(next(), kModule);
  if (n < 0) throw Error(kModule, "negative length for '" + name + "'");
  Vector v(static_cast<Index>(n));
  for (Index i = 0; i < v.size(); ++i) v(i) = kv::parse_double(next(), kModule);
  return v;
}

std::vector<double> Reader::list(const std::string& name) {
  const Vector v = vector(name);
  return {v.data(), v.data() + v.size()};
}

}  // namespace hybridml::model_io
