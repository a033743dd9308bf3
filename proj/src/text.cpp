#include "asyt/text.hpp"

#include <algorithm>

namespace asyt::text {

namespace {
bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
}  // namespace

std::string_view trim(std::string_view s) noexcept {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::optional<std::string> normalize_tag(std::string_view raw) {
  std::string_view t = trim(raw);
  if (t.empty()) return std::nullopt;
  std::string out;
  out.reserve(t.size());
  for (char ch : t) {
    auto c = static_cast<unsigned char>(ch);
    if (is_space(c)) return std::nullopt;
    if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    out.push_back(static_cast<char>(c));
  }
  return out;
}

std::vector<std::string_view> split(std::string_view s, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::size_t scalar_count(std::string_view utf8) noexcept {
  return static_cast<std::size_t>(std::count_if(utf8.begin(), utf8.end(), [](char c) {
    return !is_continuation(static_cast<unsigned char>(c));
  }));
}

std::size_t scalar_prefix_bytes(std::string_view utf8, std::size_t n) noexcept {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < utf8.size(); ++i) {
    if (!is_continuation(static_cast<unsigned char>(utf8[i]))) {
      if (seen == n) return i;
      ++seen;
    }
  }
  return utf8.size();
}

std::size_t last_scalar_bytes(std::string_view utf8) noexcept {
  if (utf8.empty()) return 0;
  std::size_t i = utf8.size() - 1;
  while (i > 0 && is_continuation(static_cast<unsigned char>(utf8[i]))) --i;
  return utf8.size() - i;
}

std::vector<std::string> scalars(std::string_view utf8) {
  std::vector<std::string> out;
  for (char c : utf8) {
    if (!is_continuation(static_cast<unsigned char>(c)) || out.empty()) out.emplace_back();
    out.back().push_back(c);
  }
  return out;
}

}  // namespace asyt::text
