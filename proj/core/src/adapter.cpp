#include "bbgan/adapter.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <sstream>

#include "bbgan/error.hpp"

namespace bbgan {

AdapterEndpoint AdapterEndpoint::parse(const std::string& spec) {
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) return {Kind::Http, spec};
  if (spec.empty()) throw ConfigError("endpoint", "must not be empty");
  return {Kind::Subprocess, spec};
}

std::string encode_adapter_request(std::size_t episode, std::span<const double> mu) {
  nlohmann::ordered_json j;
  j["v"] = 1;
  j["episode"] = episode;
  j["mu"] = std::vector<double>(mu.begin(), mu.end());
  return j.dump();
}

double decode_adapter_response(const std::string& line, std::size_t episode, std::span<const double> mu) {
  const Vector where(mu.begin(), mu.end());
  const std::string prefix = "episode " + std::to_string(episode) + ": ";
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw MalformedResponseError(prefix + "response is not valid JSON: '" + line + "'", where, episode);
  }
  if (!j.is_object() || !j.contains("v") || !j.contains("episode") || !j.contains("q")) {
    throw MalformedResponseError(prefix + "response lacks one of v, episode, q", where, episode);
  }
  if (!j["v"].is_number_integer() || j["v"].get<int>() != 1) {
    throw ProtocolError(prefix + "unsupported protocol version " + j["v"].dump(), where, episode);
  }
  if (!j["episode"].is_number_integer() || j["episode"].get<long long>() != static_cast<long long>(episode)) {
    throw ProtocolError(prefix + "response echoes episode " + j["episode"].dump(), where, episode);
  }
  const auto& qj = j["q"];
  double q;
  if (qj.is_number()) {
    q = qj.get<double>();
  } else if (qj.is_null()) {
    q = std::nan("");
  } else if (qj.is_string()) {
    const std::string s = qj.get<std::string>();
    char* end = nullptr;
    q = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || std::isfinite(q)) {
      throw MalformedResponseError(prefix + "q must be a number, got " + qj.dump(), where, episode);
    }
  } else {
    throw MalformedResponseError(prefix + "q must be a number, got " + qj.dump(), where, episode);
  }
  if (!std::isfinite(q)) throw NonFiniteScoreError(prefix + "q is not finite", where, episode);
  if (q < 0.0 || q > 1.0) {
    throw ProtocolError(prefix + "q = " + std::to_string(q) + " outside [0, 1]", where, episode);
  }
  return q;
}

// ---------------------------------------------------------------------------

class ExternalAdapterEnvironment::Connection {
 public:
  virtual ~Connection() = default;
  // Sends one request line and returns the response line. Throws
  // TimeoutError or EvaluationError; a connection that threw is discarded.
  virtual std::string exchange(const std::string& request, double timeout_seconds, std::size_t episode,
                               std::span<const double> mu) = 0;
};

namespace {

class SubprocessConnection final : public ExternalAdapterEnvironment::Connection {
 public:
  explicit SubprocessConnection(const std::string& command) {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
      throw Error(std::string("socketpair failed: ") + std::strerror(errno));
    }
    pid_ = ::fork();
    if (pid_ < 0) {
      ::close(fds[0]);
      ::close(fds[1]);
      throw Error(std::string("fork failed: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
      ::dup2(fds[1], STDIN_FILENO);
      ::dup2(fds[1], STDOUT_FILENO);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(fds[1]);
    fd_ = fds[0];
  }

  ~SubprocessConnection() override {
    if (fd_ >= 0) ::close(fd_);
    if (pid_ > 0) {
      ::kill(pid_, SIGKILL);
      int status = 0;
      ::waitpid(pid_, &status, 0);
    }
  }

  std::string exchange(const std::string& request, double timeout_seconds, std::size_t episode,
                       std::span<const double> mu) override {
    const Vector where(mu.begin(), mu.end());
    const std::string line = request + "\n";
    std::size_t sent = 0;
    while (sent < line.size()) {
      const ssize_t n = ::send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw EvaluationError("episode " + std::to_string(episode) + ": adapter process closed its input",
                              where, episode);
      }
      sent += static_cast<std::size_t>(n);
    }

    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_seconds);
    for (;;) {
      const auto newline = buffer_.find('\n');
      if (newline != std::string::npos) {
        std::string response = buffer_.substr(0, newline);
        buffer_.erase(0, newline + 1);
        return response;
      }
      const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (remaining.count() <= 0) {
        throw TimeoutError("episode " + std::to_string(episode) + ": no response within " +
                               std::to_string(timeout_seconds) + " s",
                           where, episode);
      }
      pollfd p{fd_, POLLIN, 0};
      const int ready = ::poll(&p, 1, static_cast<int>(remaining.count()));
      if (ready < 0 && errno == EINTR) continue;
      if (ready == 0) continue;
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        throw EvaluationError("episode " + std::to_string(episode) + ": adapter process exited", where, episode);
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  pid_t pid_ = -1;
  int fd_ = -1;
  std::string buffer_;
};

class HttpConnection final : public ExternalAdapterEnvironment::Connection {
 public:
  explicit HttpConnection(const std::string& url) {
    // Split "scheme://host[:port]" from the path.
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end + 3);
    base_ = path_start == std::string::npos ? url : url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
    client_ = std::make_unique<httplib::Client>(base_);
  }

  std::string exchange(const std::string& request, double timeout_seconds, std::size_t episode,
                       std::span<const double> mu) override {
    const Vector where(mu.begin(), mu.end());
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(timeout_seconds));
    client_->set_connection_timeout(timeout);
    client_->set_read_timeout(timeout);
    client_->set_write_timeout(timeout);
    auto result = client_->Post(path_, request, "application/json");
    if (!result) {
      const auto err = result.error();
      if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) {
        throw TimeoutError("episode " + std::to_string(episode) + ": no response within " +
                               std::to_string(timeout_seconds) + " s",
                           where, episode);
      }
      throw EvaluationError("episode " + std::to_string(episode) + ": HTTP request failed: " +
                                httplib::to_string(err),
                            where, episode);
    }
    if (result->status != 200) {
      throw ProtocolError("episode " + std::to_string(episode) + ": HTTP status " + std::to_string(result->status),
                          where, episode);
    }
    std::string body = result->body;
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    return body;
  }

 private:
  std::string base_;
  std::string path_;
  std::unique_ptr<httplib::Client> client_;
};

}  // namespace

ExternalAdapterEnvironment::ExternalAdapterEnvironment(ParameterSpace space, double epsilon,
                                                       AdapterEndpoint endpoint, Options options)
    : Environment(std::move(space), epsilon, options.episodes),
      endpoint_(std::move(endpoint)),
      options_(std::move(options)) {
  if (!(options_.timeout_seconds > 0.0)) throw RangeError("adapter timeout must be positive");
  if (options_.pool_size == 0) throw RangeError("adapter pool needs at least one connection");
  for (const auto& [dim, bins] : options_.categorical) {
    if (dim >= this->space().dims()) throw RangeError("categorical dimension out of range");
    if (bins == 0) throw RangeError("categorical dimension needs at least one bin");
  }
}

ExternalAdapterEnvironment::~ExternalAdapterEnvironment() = default;

std::unique_ptr<ExternalAdapterEnvironment::Connection> ExternalAdapterEnvironment::acquire() const {
  std::unique_lock lock(pool_mutex_);
  pool_cv_.wait(lock, [&] { return !idle_.empty() || open_ < options_.pool_size; });
  if (!idle_.empty()) {
    auto c = std::move(idle_.back());
    idle_.pop_back();
    return c;
  }
  ++open_;
  lock.unlock();
  try {
    if (endpoint_.kind == AdapterEndpoint::Kind::Http) return std::make_unique<HttpConnection>(endpoint_.target);
    return std::make_unique<SubprocessConnection>(endpoint_.target);
  } catch (...) {
    lock.lock();
    --open_;
    pool_cv_.notify_one();
    throw;
  }
}

void ExternalAdapterEnvironment::release(std::unique_ptr<Connection> connection) const {
  std::lock_guard lock(pool_mutex_);
  if (connection) {
    idle_.push_back(std::move(connection));
  } else {
    --open_;
  }
  pool_cv_.notify_one();
}

Vector ExternalAdapterEnvironment::wire_values(std::span<const double> raw) const {
  Vector values(raw.begin(), raw.end());
  for (const auto& [dim, bins] : options_.categorical) {
    values[dim] = static_cast<double>(categorical_bin(raw[dim], space().lower()[dim], space().upper()[dim], bins));
  }
  return values;
}

double ExternalAdapterEnvironment::episode_score(std::span<const double> raw, std::size_t episode) const {
  const std::string request = encode_adapter_request(episode, wire_values(raw));
  auto connection = acquire();
  std::string response;
  try {
    response = connection->exchange(request, options_.timeout_seconds, episode, raw);
  } catch (...) {
    // The connection's stream state is unknown after a failure.
    connection.reset();
    release(nullptr);
    throw;
  }
  release(std::move(connection));
  return decode_adapter_response(response, episode, raw);
}

std::string ExternalAdapterEnvironment::descriptor() const {
  std::ostringstream os;
  os << "adapter(" << (endpoint_.kind == AdapterEndpoint::Kind::Http ? "http" : "subprocess") << ":"
     << endpoint_.target << ",episodes=" << episodes_per_eval() << ",timeout=" << options_.timeout_seconds << ")";
  return os.str();
}

}  // namespace bbgan
