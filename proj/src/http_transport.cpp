#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <fmt/format.h>

#include "quizforge/generation.hpp"
#include "quizforge/mock_endpoint.hpp"

namespace quizforge::generation {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw RequestError(RequestErrorKind::Connection, fmt::format("not an absolute URL: {}", url));
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw RequestError(RequestErrorKind::Connection, fmt::format("unsupported URL scheme '{}'", scheme));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpTransport : public ChatTransport {
 public:
  HttpResponse post_json(const std::string& url, const std::string& body, const Headers& headers,
                         std::chrono::milliseconds timeout) override {
    const auto parts = split_url(url);
    httplib::Client client(parts.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    client.set_follow_location(true);

    httplib::Headers hs;
    for (const auto& [k, v] : headers) hs.emplace(k, v);
    auto res = client.Post(parts.path, hs, body, "application/json");
    if (!res) {
      const auto err = res.error();
      const auto kind = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                         err == httplib::Error::Write)
                            ? RequestErrorKind::Timeout
                            : RequestErrorKind::Connection;
      throw RequestError(kind, fmt::format("{} ({})", httplib::to_string(err), parts.origin));
    }
    return {res->status, res->body};
  }
};

void exclusive_port(socket_t sock) {
  int yes = 1;
  setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
}

}  // namespace

struct MockServer::Impl {
  MockEndpoint& endpoint;
  httplib::Server server;

  explicit Impl(MockEndpoint& e) : endpoint(e) {}
};

MockServer::MockServer(MockEndpoint& endpoint) : impl_(std::make_unique<Impl>(endpoint)) {
  impl_->server.set_socket_options(exclusive_port);
  impl_->server.Post(R"(/(.*/)?chat/completions)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = impl_->endpoint.respond(req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
}

MockServer::~MockServer() { stop(); }

int MockServer::bind(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound <= 0) throw IoError(fmt::format("{}:{}", host, port), "cannot bind (address in use or not permitted)");
  return bound;
}

void MockServer::listen() { impl_->server.listen_after_bind(); }

int MockServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  thread_ = std::thread([this] { listen(); });
  impl_->server.wait_until_ready();
  return bound;
}

void MockServer::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::unique_ptr<ChatTransport> make_http_transport() { return std::make_unique<HttpTransport>(); }

std::unique_ptr<ChatTransport> make_transport(const std::string& endpoint_url) {
  if (endpoint_url.rfind("mock://", 0) == 0) return std::make_unique<MockEndpoint>(endpoint_url);
  return make_http_transport();
}

}  // namespace quizforge::generation
