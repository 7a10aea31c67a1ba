#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace relict {

/// Canonical form used for every URI comparison in the library.
///
/// Rules: a missing scheme defaults to http; scheme and host are lowercased;
/// default ports (80 for http, 443 for https) are dropped; the fragment is
/// dropped; a bare "/" path is dropped; a leading "www." on the host is
/// removed so that "www.example.org" and "example.org" compare equal.
/// Path and query keep their case.
///
/// Returns std::nullopt when the input has no usable host (file: URIs are
/// allowed an empty host).
std::optional<std::string> try_normalize_uri(std::string_view raw);

/// Like try_normalize_uri but throws relict::Error on failure.
std::string normalize_uri(std::string_view raw);

/// True when both URIs normalize to the same string.
bool same_uri(std::string_view a, std::string_view b);

/// Percent-encodes everything outside the RFC 3986 unreserved set.
std::string url_encode(std::string_view s);

}  // namespace relict
