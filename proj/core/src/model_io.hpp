#pragma once

// Whitespace-token text used by the versioned model files. Every value is preceded by its
// field name so files stay readable and field order is checked on load.

#include "hybridml/common.hpp"

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace hybridml::model_io {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  Writer& field(const std::string& name, double v);
  Writer& field(const std::string& name, long long v);
  Writer& field(const std::string& name, const std::string& v);
  Writer& field(const std::string& name, const Vector& v);
  Writer& field(const std::string& name, const std::vector<double>& v);

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  double real(const std::string& name);
  long long integer(const std::string& name);
  std::string word(const std::string& name);
  Vector vector(const std::string& name);
  std::vector<double> list(const std::string& name);

 private:
  std::string next();
  void expect(const std::string& name);

  std::istream& in_;
};

}  // namespace hybridml::model_io
