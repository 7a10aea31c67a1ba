#include "relict/uri.hpp"

#include <cctype>

#include <fmt/format.h>

#include "relict/error.hpp"
#include "relict/text.hpp"

namespace relict {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool valid_scheme(std::string_view scheme) {
  if (scheme.empty() || !std::isalpha(static_cast<unsigned char>(scheme[0]))) return false;
  for (char c : scheme) {
    const auto u = static_cast<unsigned char>(c);
    if (!std::isalnum(u) && c != '+' && c != '-' && c != '.') return false;
  }
  return true;
}

}  // namespace

std::optional<std::string> try_normalize_uri(std::string_view raw) {
  std::string_view s = trim(raw);
  if (s.empty()) return std::nullopt;

  if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);

  std::string scheme = "http";
  if (const auto sep = s.find("://"); sep != std::string_view::npos &&
                                      valid_scheme(s.substr(0, sep))) {
    scheme = text::to_lower_ascii(s.substr(0, sep));
    s = s.substr(sep + 3);
  } else if (s.starts_with("//")) {
    s = s.substr(2);
  }

  const auto path_start = s.find_first_of("/?");
  std::string_view authority = s.substr(0, path_start);
  std::string_view rest = path_start == std::string_view::npos ? std::string_view{}
                                                               : s.substr(path_start);

  if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
    authority = authority.substr(at + 1);
  }

  std::string host;
  std::string port;
  if (const auto colon = authority.rfind(':');
      colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    host = text::to_lower_ascii(authority.substr(0, colon));
    port = std::string(authority.substr(colon + 1));
    for (char c : port) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    }
  } else {
    host = text::to_lower_ascii(authority);
  }
  while (!host.empty() && host.back() == '.') host.pop_back();

  if (host.empty() && scheme != "file") return std::nullopt;
  for (char c : host) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isspace(u) || c == '<' || c == '>' || c == '"') return std::nullopt;
  }
  if (host.starts_with("www.") && host.size() > 4) host.erase(0, 4);

  if ((scheme == "http" && port == "80") || (scheme == "https" && port == "443")) {
    port.clear();
  }

  std::string out = scheme + "://" + host;
  if (!port.empty()) out += ":" + port;
  if (rest == "/") rest = {};
  if (rest.starts_with("/?")) rest.remove_prefix(1);
  if (!rest.empty() && rest.front() == '?') out += "/";
  out += rest;
  return out;
}

std::string normalize_uri(std::string_view raw) {
  auto n = try_normalize_uri(raw);
  if (!n) throw Error(fmt::format("cannot normalize URI '{}'", raw));
  return *std::move(n);
}

bool same_uri(std::string_view a, std::string_view b) {
  const auto na = try_normalize_uri(a);
  const auto nb = try_normalize_uri(b);
  return na && nb && *na == *nb;
}

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(c);
    } else {
      out.push_back('%');
      out.push_back(kHex[u >> 4]);
      out.push_back(kHex[u & 0xF]);
    }
  }
  return out;
}

}  // namespace relict
