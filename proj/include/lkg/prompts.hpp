#pragma once

// Versioned prompt templates (assets/prompts/*.txt, embedded at build time).
// Placeholders are written {{NAME}}.

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lkg::prompts {

const std::map<std::string, std::string, std::less<>>& templates();

// Template body without its leading "## prompt" header line.
std::string_view body(std::string_view name);
// Version string from the header line ("v1").
std::string version(std::string_view name);

std::string render(std::string_view name, const std::vector<std::pair<std::string, std::string>>& vars);

}  // namespace lkg::prompts
