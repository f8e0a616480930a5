#include "readtask/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "readtask/error.hpp"

namespace readtask {

namespace {

class LineParser {
public:
  LineParser(std::string_view text, const std::string& origin, std::size_t line)
      : s_(text), origin_(origin), line_(line) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(origin_, line_, what); }

  std::vector<std::string> key() {
    std::vector<std::string> parts;
    do {
      skip_ws();
      const auto start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                                  s_[pos_] == '-'))
        ++pos_;
      if (pos_ == start) fail("expected a key");
      parts.emplace_back(s_.substr(start, pos_ - start));
    } while (consume('.'));
    return parts;
  }

  nlohmann::json value(bool allow_bare) {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return string();
    if (c == '[') return array();
    const auto start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' && s_[pos_] != ' ' &&
           s_[pos_] != '\t')
      ++pos_;
    const std::string_view word = s_.substr(start, pos_ - start);
    if (word == "true") return true;
    if (word == "false") return false;
    std::int64_t i = 0;
    auto [pi, ei] = std::from_chars(word.data(), word.data() + word.size(), i);
    if (ei == std::errc{} && pi == word.data() + word.size()) return i;
    double d = 0;
    auto [pd, ed] = std::from_chars(word.data(), word.data() + word.size(), d);
    if (ed == std::errc{} && pd == word.data() + word.size()) return d;
    if (allow_bare && !word.empty()) return std::string(word);
    fail("invalid value '" + std::string(word) + "' (strings need double quotes)");
  }

  std::size_t pos() const { return pos_; }
  std::size_t size() const { return s_.size(); }

private:
  nlohmann::json string() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) break;
        const char e = s_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
      }
      out.push_back(c);
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  nlohmann::json array() {
    ++pos_;
    nlohmann::json out = nlohmann::json::array();
    if (consume(']')) return out;
    while (true) {
      out.push_back(value(false));
      if (consume(']')) return out;
      if (!consume(',')) fail("expected ',' or ']' in array");
      if (consume(']')) return out;
    }
  }

  std::string_view s_;
  const std::string& origin_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ".") + p;
  return out;
}

}  // namespace

nlohmann::json parse_config(std::string_view text, const std::string& origin) {
  nlohmann::json root = nlohmann::json::object();
  std::vector<std::string> table;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    start = end + 1;

    LineParser p(line, origin, line_no);
    if (p.at_end_or_comment()) continue;
    if (p.consume('[')) {
      table = p.key();
      if (!p.consume(']')) p.fail("expected ']' after table name");
      if (!p.at_end_or_comment()) p.fail("unexpected text after table header");
      nlohmann::json* node = &root;
      for (const auto& k : table) {
        auto& child = (*node)[k];
        if (child.is_null()) child = nlohmann::json::object();
        if (!child.is_object()) p.fail("table '" + join(table) + "' conflicts with a value");
        node = &child;
      }
      continue;
    }
    auto key = p.key();
    if (!p.consume('=')) p.fail("expected '=' after key");
    auto value = p.value(false);
    if (!p.at_end_or_comment()) p.fail("unexpected text after value");

    auto full = table;
    full.insert(full.end(), key.begin(), key.end());
    nlohmann::json* node = &root;
    for (std::size_t i = 0; i + 1 < full.size(); ++i) {
      auto& child = (*node)[full[i]];
      if (child.is_null()) child = nlohmann::json::object();
      if (!child.is_object()) p.fail("key '" + join(full) + "' conflicts with a value");
      node = &child;
    }
    if (node->contains(full.back())) p.fail("duplicate key '" + join(full) + "'");
    (*node)[full.back()] = std::move(value);
    if (end == text.size()) break;
  }
  return root;
}

nlohmann::json load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

nlohmann::json parse_config_value(std::string_view text) {
  const std::string origin = "<value>";
  LineParser p(text, origin, 1);
  auto v = p.value(true);
  if (!p.at_end_or_comment()) p.fail("unexpected text after value");
  return v;
}

void set_config_path(nlohmann::json& cfg, std::string_view dotted, nlohmann::json value) {
  nlohmann::json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string part(dotted.substr(start, dot == std::string_view::npos ? dotted.npos : dot - start));
    if (part.empty()) throw UsageError("invalid config key '" + std::string(dotted) + "'");
    if (dot == std::string_view::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    auto& child = (*node)[part];
    if (!child.is_object()) child = nlohmann::json::object();
    node = &child;
    start = dot + 1;
  }
}

}  // namespace readtask
