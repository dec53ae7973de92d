#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "sot/llm.hpp"

namespace sot {

namespace {

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const std::string& url, const std::string& body,
                    const Headers& headers,
                    std::chrono::seconds timeout) override {
    // Split "scheme://host[:port]/path".
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
      throw TransportError("bad URL " + url, false);
    }
    auto path_start = url.find('/', scheme_end + 3);
    std::string origin = url.substr(0, path_start);
    std::string path =
        path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    client.set_connection_timeout(std::chrono::seconds(30));
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers h;
    std::string content_type = "application/json";
    for (const auto& [k, v] : headers) {
      if (k == "Content-Type") {
        content_type = v;
      } else {
        h.emplace(k, v);
      }
    }
    auto res = client.Post(path, h, body, content_type);
    if (!res) {
      auto err = res.error();
      bool is_timeout = err == httplib::Error::Read ||
                        err == httplib::Error::Write ||
                        err == httplib::Error::ConnectionTimeout;
      throw TransportError("POST " + url + ": " + httplib::to_string(err),
                           is_timeout);
    }
    return {res->status, res->body};
  }
};

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport() {
  return std::make_unique<HttplibTransport>();
}

}  // namespace sot
