#include "calderon/config.hpp"

#include <fstream>
#include <sstream>

namespace calderon {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config config;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto fail = [&](const std::string& msg) {
      return ParseError(origin + ":" + std::to_string(lineno) + ": " + msg);
    };
    if (stripped.front() == '[') {
      if (stripped.back() != ']') throw fail("unterminated section header");
      section = trim(stripped.substr(1, stripped.size() - 2));
      if (section.empty()) throw fail("empty section name");
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) throw fail("expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    if (key.empty()) throw fail("empty key");
    config.set(section.empty() ? key : section + "." + key, trim(stripped.substr(eq + 1)));
  }
  return config;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_string(text.str(), path);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

Real Config::get_real(const std::string& key, Real fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  size_t pos = 0;
  Real v = 0;
  try {
    v = std::stod(it->second, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != it->second.size())
    throw ParseError("config key '" + key + "' is not a number: '" + it->second + "'");
  return v;
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(it->second, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != it->second.size())
    throw ParseError("config key '" + key + "' is not an integer: '" + it->second + "'");
  return static_cast<int>(v);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ParseError("config key '" + key + "' is not a boolean: '" + v + "'");
}

Vector Config::get_vector(const std::string& key, const Vector& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<Real> parts;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    size_t pos = 0;
    Real v = 0;
    const std::string token = item;
    try {
      v = std::stod(token, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    // allow surrounding whitespace inside each comma token
    if (pos == std::string::npos ||
        token.find_first_not_of(" \t", pos) != std::string::npos)
      throw ParseError("config key '" + key + "' is not a comma-separated number list: '" +
                       it->second + "'");
    parts.push_back(v);
  }
  if (parts.empty())
    throw ParseError("config key '" + key + "' is not a comma-separated number list: '" +
                     it->second + "'");
  Vector out(static_cast<Index>(parts.size()));
  for (Index i = 0; i < out.size(); ++i) out(i) = parts[i];
  return out;
}

}  // namespace calderon
