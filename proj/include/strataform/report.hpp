#pragma once

#include <string>
#include <vector>

#include "strataform/rational.hpp"

namespace strataform {
namespace io {

// Structured text report: versioned header, command echo, key = value lines
// in insertion order with optional [section] groupings. Byte-stable for
// identical inputs and seed.
class Report {
 public:
  explicit Report(std::string command) : command_(std::move(command)) {}

  void section(const std::string& name) { lines_.push_back({LineKind::Section, name, ""}); }
  void set(const std::string& key, const std::string& value) {
    lines_.push_back({LineKind::Entry, key, value});
  }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, long value) { set(key, std::to_string(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }
  void set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, bool value) { set(key, value ? std::string("true") : std::string("false")); }
  void set(const std::string& key, double value);
  void set(const std::string& key, const Rat& value) { set(key, value.str()); }
  void warn(const std::string& msg) { lines_.push_back({LineKind::Warning, "", msg}); }

  std::string text() const;

 private:
  enum class LineKind { Entry, Section, Warning };
  struct Line {
    LineKind kind;
    std::string key;
    std::string value;
  };
  std::string command_;
  std::vector<Line> lines_;
};

}  // namespace io
}  // namespace strataform
