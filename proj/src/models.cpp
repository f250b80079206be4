#include "strataform/models.hpp"

#include <map>
#include <stdexcept>

namespace strataform {
namespace models {

namespace {

const std::map<std::string, std::string>& registry() {
  static const std::map<std::string, std::string> reg = {
      {"r3flat",
       "manifest v1\n"
       "chart M (x1, x2, x3)\n"
       "form omega on M = dx1^dx2, closed\n"
       "frame F on M = [ d/dx3 ]\n"
       "point p0 on M = (0, 0, 0)\n"},
      {"r4flat",
       "manifest v1\n"
       "chart M (x1, x2, x3, x4)\n"
       "form omega on M = dx1^dx2, closed\n"
       "frame F on M = [ d/dx3, d/dx4 ]\n"
       "point p0 on M = (0, 0, 0, 0)\n"},
      {"curved3d",
       "manifest v1\n"
       "chart M (x1, x2, x3)\n"
       "form omega on M = dx1^dx2 + x1*dx1^dx2, closed\n"
       "frame F on M = [ d/dx3 ]\n"
       "point p0 on M = (0, 0, 0)\n"},
      {"model4d",
       "manifest v1\n"
       "chart M (x1, x2, x3, x4)\n"
       "form omega on M = x1*dx1^dx2 + dx3^dx4, closed\n"
       "tube T on M = (fibers: x1; scale: 1)\n"
       "point p0 on M = (0, 0, 0, 0)\n"},
      {"model4d-triple",
       "manifest v1\n"
       "chart M (x1, x2, x3, x4)\n"
       "form omega on M = x1*dx1^dx2 + x3*dx3^dx4, closed\n"
       "point p0 on M = (0, 0, 0, 0)\n"},
      {"symplectic2d",
       "manifest v1\n"
       "chart M (x1, x2)\n"
       "form omega on M = dx1^dx2, closed\n"
       "point p0 on M = (0, 0)\n"},
  };
  return reg;
}

}  // namespace

std::vector<std::string> list() {
  std::vector<std::string> names;
  for (auto& [k, v] : registry()) names.push_back(k);
  return names;
}

bool exists(const std::string& name) { return registry().count(name) > 0; }

std::string manifest_text(const std::string& name) {
  auto it = registry().find(name);
  if (it == registry().end())
    throw std::invalid_argument("unknown model '" + name + "'");
  return it->second;
}

io::Manifest load(const std::string& name) { return io::parse_manifest(manifest_text(name)); }

}  // namespace models
}  // namespace strataform
