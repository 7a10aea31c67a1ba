#include "relict/transport.hpp"

#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "relict/error.hpp"

namespace relict {

namespace {

std::atomic<std::size_t> g_connections{0};

std::mutex g_default_mu;
std::shared_ptr<Transport>& default_slot() {
  static std::shared_ptr<Transport> slot;
  return slot;
}

}  // namespace

HttplibTransport::HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

std::size_t HttplibTransport::connections_attempted() { return g_connections.load(); }

HttpResponse HttplibTransport::get(const std::string& url,
                                   const std::map<std::string, std::string>& headers) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(fmt::format("bad URL '{}'", url));
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);

  ++g_connections;
  auto res = client.Get(path, h);
  if (!res) {
    throw RetryableError(
        fmt::format("GET {} failed: {}", url, httplib::to_string(res.error())));
  }
  return {res->status, res->body};
}

HttpResponse CountingTransport::get(const std::string& url,
                                    const std::map<std::string, std::string>&) {
  ++calls_;
  std::lock_guard lock(mu_);
  urls_.push_back(url);
  const auto it = canned_.find(url);
  if (it == canned_.end()) throw RetryableError(fmt::format("no canned response for {}", url));
  return it->second;
}

void CountingTransport::respond(std::string url, HttpResponse response) {
  std::lock_guard lock(mu_);
  canned_[std::move(url)] = std::move(response);
}

std::vector<std::string> CountingTransport::urls() const {
  std::lock_guard lock(mu_);
  return urls_;
}

std::shared_ptr<Transport> default_transport() {
  std::lock_guard lock(g_default_mu);
  auto& slot = default_slot();
  if (!slot) slot = std::make_shared<HttplibTransport>();
  return slot;
}

void set_default_transport(std::shared_ptr<Transport> transport) {
  std::lock_guard lock(g_default_mu);
  default_slot() = std::move(transport);
}

RateLimiter::RateLimiter(double requests_per_second) {
  if (requests_per_second > 0.0) {
    interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / requests_per_second));
  }
}

void RateLimiter::acquire() {
  if (interval_ == std::chrono::steady_clock::duration::zero()) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    slot = (first_ || next_ < now) ? now : next_;
    first_ = false;
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

}  // namespace relict
