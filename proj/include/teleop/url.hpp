#pragma once

#include <string>

#include "teleop/error.hpp"

namespace teleop {

struct BaseUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without a trailing slash, possibly empty
};

/// Splits "http[s]://host[:port][/prefix]". Throws kConfig.
inline BaseUrl split_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kConfig, "base_url needs a scheme: '" + url + "'");
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::kConfig, "unsupported scheme '" + scheme + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  BaseUrl out;
  out.origin = url.substr(0, path_start);
  out.prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  if (out.origin.size() <= scheme_end + 3) throw Error(ErrorCode::kConfig, "base_url has no host");
  return out;
}

}  // namespace teleop
