#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "cvlab/error.hpp"
#include "cvlab/profile.hpp"

namespace cvlab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view s, const std::string& what) {
  s = trim(s);
  if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw ModelError("cannot read " + what + " from '" + std::string(s) + "'");
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ProfileFields parse_profile_text(std::string_view text) {
  ProfileFields out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    // Comments run to end of line unless inside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ModelError("profile line " + std::to_string(line_no) + ": expected key=value");
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ModelError("profile line " + std::to_string(line_no) + ": empty key");
    out[std::string(key)] = std::string(value);
  }
  return out;
}

ProfileFields read_profile_file(const std::string& path) { return parse_profile_text(slurp(path)); }

void read_samples_csv(const std::string& path, std::vector<double>& t, std::vector<double>& v) {
  t.clear();
  v.clear();
  std::istringstream in(slurp(path));
  std::string line;
  bool header = true;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    std::string_view l = trim(line);
    if (l.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto comma = l.find(',');
    if (comma == std::string_view::npos)
      throw ModelError(path + ":" + std::to_string(row) + ": expected two columns");
    t.push_back(parse_real(l.substr(0, comma), "t"));
    v.push_back(parse_real(l.substr(comma + 1), "value"));
  }
  if (t.empty()) throw ModelError(path + ": no samples");
}

GeneratorProfile profile_from_fields(const ProfileFields& fields, const std::string& base_dir) {
  auto get = [&](const char* key) -> const std::string* {
    auto it = fields.find(key);
    return it == fields.end() ? nullptr : &it->second;
  };
  const std::string* kind_s = get("kind");
  if (!kind_s) throw ModelError("profile is missing kind=");
  if (*kind_s == "family") throw ModelError("kind=family describes a metric family, not a profile");
  const ProfileKind kind = parse_kind(*kind_s);

  const std::string* expr = get("expr");
  const std::string* samples = get("samples");
  if ((expr != nullptr) == (samples != nullptr))
    throw ModelError("profile needs exactly one of expr= or samples=");

  if (expr) {
    double end = std::numeric_limits<double>::infinity();
    if (const std::string* de = get("domain_end")) end = parse_real(*de, "domain_end");
    return GeneratorProfile::closed_form(kind, parse_expression(*expr), end);
  }
  std::filesystem::path p(*samples);
  if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
  std::vector<double> t, v;
  read_samples_csv(p.string(), t, v);
  return GeneratorProfile::sampled(kind, std::move(t), std::move(v));
}

}  // namespace cvlab
