#include <gtest/gtest.h>

#include <httplib.h>

#include <chrono>
#include <nlohmann/json.hpp>
#include <thread>

#include "bbgan/adapter.hpp"
#include "bbgan/error.hpp"

using namespace bbgan;

namespace {

ExternalAdapterEnvironment stub(const std::string& mode, double timeout = 5.0, std::size_t episodes = 1) {
  ExternalAdapterEnvironment::Options o;
  o.timeout_seconds = timeout;
  o.episodes = episodes;
  return ExternalAdapterEnvironment(ParameterSpace({-1.0, 0.0}, {1.0, 1.0}), 0.3,
                                    AdapterEndpoint::parse(std::string(BBGAN_ADAPTER_STUB) + " " + mode), o);
}

}  // namespace

TEST(AdapterProtocol, EncodesRequest) {
  const double mu[] = {0.5, -1.0};
  const auto j = nlohmann::json::parse(encode_adapter_request(3, mu));
  EXPECT_EQ(j["v"], 1);
  EXPECT_EQ(j["episode"], 3);
  EXPECT_EQ(j["mu"][1].get<double>(), -1.0);
}

TEST(AdapterProtocol, DecodeValidatesEverything) {
  const double mu[] = {0.0};
  EXPECT_DOUBLE_EQ(decode_adapter_response(R"({"v":1,"episode":0,"q":0.25})", 0, mu), 0.25);
  EXPECT_THROW(decode_adapter_response("nope", 0, mu), MalformedResponseError);
  EXPECT_THROW(decode_adapter_response(R"({"v":1,"episode":0})", 0, mu), MalformedResponseError);
  EXPECT_THROW(decode_adapter_response(R"({"v":2,"episode":0,"q":0.5})", 0, mu), ProtocolError);
  EXPECT_THROW(decode_adapter_response(R"({"v":1,"episode":1,"q":0.5})", 0, mu), ProtocolError);
  EXPECT_THROW(decode_adapter_response(R"({"v":1,"episode":0,"q":1.5})", 0, mu), ProtocolError);
  EXPECT_THROW(decode_adapter_response(R"({"v":1,"episode":0,"q":"nan"})", 0, mu), NonFiniteScoreError);
  EXPECT_THROW(decode_adapter_response(R"({"v":1,"episode":0,"q":null})", 0, mu), NonFiniteScoreError);
}

TEST(AdapterSubprocess, EchoRoundTrip) {
  auto env = stub("echo");
  const Vector mu{0.5, 0.2};
  EXPECT_DOUBLE_EQ(env.evaluate(mu), 0.75);
}

TEST(AdapterSubprocess, AveragesEpisodes) {
  auto env = stub("echo", 5.0, 5);
  const Vector mu{-0.5, 0.2};
  EXPECT_DOUBLE_EQ(env.evaluate(mu), 0.25);
  EXPECT_EQ(env.episodes_per_eval(), 5u);
}

TEST(AdapterSubprocess, OutOfRangeIsProtocolError) {
  auto env = stub("out-of-range");
  const Vector mu{0.0, 0.0};
  EXPECT_THROW(env.evaluate(mu), ProtocolError);
}

TEST(AdapterSubprocess, NanIsNonFinite) {
  auto env = stub("nan");
  const Vector mu{0.0, 0.0};
  EXPECT_THROW(env.evaluate(mu), NonFiniteScoreError);
}

TEST(AdapterSubprocess, MalformedReply) {
  auto env = stub("malformed");
  const Vector mu{0.0, 0.0};
  EXPECT_THROW(env.evaluate(mu), MalformedResponseError);
}

TEST(AdapterSubprocess, TimeoutNamesEpisode) {
  auto env = stub("sleep", 0.3, 2);
  const Vector mu{0.0, 0.0};
  try {
    env.evaluate(mu);
    FAIL();
  } catch (const TimeoutError& e) {
    EXPECT_EQ(e.episode(), 0u);
    EXPECT_NE(std::string(e.what()).find("episode 0"), std::string::npos);
  }
}

TEST(AdapterSubprocess, DeadChildIsAnErrorNotACrash) {
  auto env = stub("crash");
  const Vector mu{0.0, 0.0};
  EXPECT_THROW(env.evaluate(mu), EvaluationError);
  // The broken connection is discarded; the next call starts a fresh child.
  EXPECT_THROW(env.evaluate(mu), EvaluationError);
}

TEST(AdapterSubprocess, BatchKeepsFailuresPerPoint) {
  auto env = stub("echo");
  const std::vector<Vector> points{{0.0, 0.0}, {5.0, 0.0}, {1.0, 1.0}};
  const auto out = evaluate_batch(env, points, 2);
  EXPECT_TRUE(out[0].ok);
  EXPECT_FALSE(out[1].ok);
  EXPECT_DOUBLE_EQ(out[2].q, 1.0);
}

TEST(AdapterHttp, PostRoundTripAndTimeout) {
  httplib::Server server;
  server.Post("/score", [](const httplib::Request& req, httplib::Response& res) {
    const auto j = nlohmann::json::parse(req.body);
    const double mu0 = j["mu"][0].get<double>();
    if (mu0 > 0.9) std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    nlohmann::json reply{{"v", 1}, {"episode", j["episode"]}, {"q", (mu0 + 1.0) / 2.0}};
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ExternalAdapterEnvironment::Options o;
  o.timeout_seconds = 0.5;
  ExternalAdapterEnvironment env(ParameterSpace({-1.0}, {1.0}), 0.3,
                                 AdapterEndpoint::parse("http://127.0.0.1:" + std::to_string(port) + "/score"), o);
  const Vector ok{0.0};
  EXPECT_DOUBLE_EQ(env.evaluate(ok), 0.5);
  const Vector slow{1.0};
  EXPECT_THROW(env.evaluate(slow), TimeoutError);

  server.stop();
  worker.join();
}

TEST(AdapterCategorical, WireCarriesBinIndex) {
  httplib::Server server;
  double seen = -1.0;
  server.Post("/", [&](const httplib::Request& req, httplib::Response& res) {
    const auto j = nlohmann::json::parse(req.body);
    seen = j["mu"][1].get<double>();
    res.set_content(nlohmann::json{{"v", 1}, {"episode", j["episode"]}, {"q", 0.5}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ExternalAdapterEnvironment::Options o;
  o.categorical = {{1, 4}};
  ExternalAdapterEnvironment env(ParameterSpace({-1.0, 0.0}, {1.0, 1.0}), 0.3,
                                 AdapterEndpoint::parse("http://127.0.0.1:" + std::to_string(port)), o);
  const Vector mu{0.0, 0.6};
  env.evaluate(mu);
  EXPECT_EQ(seen, 2.0);
  server.stop();
  worker.join();
}

TEST(AdapterEndpoint, ParsesKinds) {
  EXPECT_EQ(AdapterEndpoint::parse("http://localhost:8000/x").kind, AdapterEndpoint::Kind::Http);
  EXPECT_EQ(AdapterEndpoint::parse("python3 sim.py").kind, AdapterEndpoint::Kind::Subprocess);
}
