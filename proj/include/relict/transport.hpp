#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace relict {

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Outbound HTTP GET. Implementations throw relict::RetryableError on
/// connection failures and timeouts.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse get(const std::string& url,
                           const std::map<std::string, std::string>& headers) = 0;
};

/// Real network transport backed by cpp-httplib.
class HttplibTransport final : public Transport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds(10));
  HttpResponse get(const std::string& url,
                   const std::map<std::string, std::string>& headers) override;

  /// Connections attempted by every HttplibTransport in this process.
  static std::size_t connections_attempted();

 private:
  std::chrono::seconds timeout_;
};

/// Test double that records requests and answers from a canned table.
/// Unknown URLs get a RetryableError.
class CountingTransport final : public Transport {
 public:
  HttpResponse get(const std::string& url,
                   const std::map<std::string, std::string>& headers) override;

  void respond(std::string url, HttpResponse response);
  std::size_t calls() const { return calls_.load(); }
  std::vector<std::string> urls() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, HttpResponse> canned_;
  std::vector<std::string> urls_;
  std::atomic<std::size_t> calls_{0};
};

/// Process-wide transport used when a provider is not given one explicitly.
/// Defaults to an HttplibTransport.
std::shared_ptr<Transport> default_transport();
void set_default_transport(std::shared_ptr<Transport> transport);

/// Minimum-interval limiter: successive acquire() calls are spaced at least
/// 1/rate seconds apart. A rate of 0 disables limiting. Thread-safe.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second = 0.0);
  void acquire();

 private:
  std::mutex mu_;
  std::chrono::steady_clock::duration interval_{};
  std::chrono::steady_clock::time_point next_{};
  bool first_ = true;
};

}  // namespace relict
