#include "strataform/report.hpp"

#include <cstdio>

namespace strataform {
namespace io {

void Report::set(const std::string& key, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  set(key, std::string(buf));
}

std::string Report::text() const {
  std::string out = "report v1\ncommand = " + command_ + "\n";
  for (auto& line : lines_) {
    switch (line.kind) {
      case LineKind::Section:
        out += "[" + line.key + "]\n";
        break;
      case LineKind::Entry:
        out += line.key + " = " + line.value + "\n";
        break;
      case LineKind::Warning:
        out += "warning = " + line.value + "\n";
        break;
    }
  }
  return out;
}

}  // namespace io
}  // namespace strataform
