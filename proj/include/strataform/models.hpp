#pragma once

#include <string>
#include <vector>

#include "strataform/manifest.hpp"

namespace strataform {
namespace models {

// Built-in model manifests used by the CLI and the acceptance suite.
std::vector<std::string> list();
bool exists(const std::string& name);
std::string manifest_text(const std::string& name);
io::Manifest load(const std::string& name);

}  // namespace models
}  // namespace strataform
