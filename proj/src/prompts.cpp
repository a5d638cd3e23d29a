#include "lkg/prompts.hpp"

#include "lkg/error.hpp"

namespace lkg::prompts {

namespace {

const std::string& raw(std::string_view name) {
  const auto& t = templates();
  auto it = t.find(name);
  if (it == t.end()) throw Error(ErrorCode::ResourceMissing, "no prompt template named '" + std::string(name) + "'");
  return it->second;
}

}  // namespace

std::string_view body(std::string_view name) {
  std::string_view s = raw(name);
  if (s.starts_with("## ")) {
    auto nl = s.find('\n');
    s = nl == std::string_view::npos ? std::string_view{} : s.substr(nl + 1);
  }
  return s;
}

std::string version(std::string_view name) {
  std::string_view s = raw(name);
  auto nl = s.find('\n');
  auto header = s.substr(0, nl);
  auto v = header.find(" v");
  if (v == std::string_view::npos) return "v0";
  auto end = header.find(' ', v + 1);
  return std::string(header.substr(v + 1, end == std::string_view::npos ? std::string_view::npos : end - v - 1));
}

std::string render(std::string_view name, const std::vector<std::pair<std::string, std::string>>& vars) {
  std::string out(body(name));
  for (const auto& [key, value] : vars) {
    const std::string token = "{{" + key + "}}";
    std::size_t pos = 0;
    while ((pos = out.find(token, pos)) != std::string::npos) {
      out.replace(pos, token.size(), value);
      pos += value.size();
    }
  }
  // Unfilled placeholders render empty.
  std::size_t pos = 0;
  while ((pos = out.find("{{", pos)) != std::string::npos) {
    auto end = out.find("}}", pos);
    if (end == std::string::npos) break;
    out.erase(pos, end + 2 - pos);
  }
  return out;
}

}  // namespace lkg::prompts
