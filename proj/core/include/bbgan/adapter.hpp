#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "bbgan/envs.hpp"

namespace bbgan {

// Where an external simulator lives. A subprocess command is run through
// /bin/sh and spoken to over stdin/stdout, one JSON object per line; an
// http(s) URL receives one POST per episode.
struct AdapterEndpoint {
  enum class Kind { Subprocess, Http };
  Kind kind = Kind::Subprocess;
  std::string target;

  static AdapterEndpoint parse(const std::string& spec);
};

// Wire format, one object per episode:
//   request  {"v":1,"episode":int,"mu":[float...]}   (raw units)
//   response {"v":1,"episode":int,"q":float}         (q in [0,1])
std::string encode_adapter_request(std::size_t episode, std::span<const double> mu);
// Validates a response line. Throws MalformedResponseError,
// NonFiniteScoreError or ProtocolError.
double decode_adapter_response(const std::string& line, std::size_t episode, std::span<const double> mu);

// Environment backed by an external simulator. Connections are pooled; each
// connection serves one request at a time.
class ExternalAdapterEnvironment final : public Environment {
 public:
  struct Options {
    double timeout_seconds = 30.0;
    std::size_t episodes = 1;
    std::size_t pool_size = 1;
    // Dimensions holding an encoded categorical choice: the coordinate is
    // replaced by its bin index before it goes on the wire.
    std::map<std::size_t, std::size_t> categorical;
  };

  ExternalAdapterEnvironment(ParameterSpace space, double epsilon, AdapterEndpoint endpoint, Options options);
  ~ExternalAdapterEnvironment() override;

  const AdapterEndpoint& endpoint() const noexcept { return endpoint_; }
  bool deterministic() const override { return false; }
  std::string descriptor() const override;

  class Connection;

 protected:
  double episode_score(std::span<const double> raw, std::size_t episode) const override;

 private:
  std::unique_ptr<Connection> acquire() const;
  void release(std::unique_ptr<Connection> connection) const;
  Vector wire_values(std::span<const double> raw) const;

  AdapterEndpoint endpoint_;
  Options options_;
  mutable std::mutex pool_mutex_;
  mutable std::condition_variable pool_cv_;
  mutable std::vector<std::unique_ptr<Connection>> idle_;
  mutable std::size_t open_ = 0;
};

}  // namespace bbgan
