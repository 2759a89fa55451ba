#include "bbgan/store.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "bbgan/error.hpp"

namespace bbgan {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

}  // namespace

RunStore RunStore::open(const fs::path& root) {
  RunStore store;
  store.root_ = root;
  store.load_manifest();
  return store;
}

RunStore RunStore::open_or_create(const fs::path& root, std::string_view config_json, std::uint64_t seed) {
  if (fs::exists(root / "manifest.json")) {
    RunStore store = open(root);
    if (!config_json.empty() && store.config_json_ != config_json) {
      store.config_json_ = std::string(config_json);
      store.save_manifest();
    }
    return store;
  }
  RunStore store;
  store.root_ = root;
  store.created_ = utc_timestamp();
  store.run_id_ = store.created_ + "-" + std::to_string(seed);
  store.config_json_ = std::string(config_json);
  fs::create_directories(root);
  store.save_manifest();
  return store;
}

void RunStore::save_manifest() const {
  ojson j;
  j["version"] = kManifestVersion;
  j["run_id"] = run_id_;
  j["created"] = created_;
  ojson config = ojson::object();
  if (!config_json_.empty()) config = ojson::parse(config_json_);
  j["config"] = std::move(config);
  ojson arts = ojson::object();
  for (const auto& [path, entry] : artifacts_) arts[path] = {{"sha256", entry.sha256}, {"schema", entry.schema}};
  j["artifacts"] = std::move(arts);
  write_file(root_ / "manifest.json", j.dump(2) + "\n");
}

void RunStore::load_manifest() {
  const fs::path path = root_ / "manifest.json";
  if (!fs::exists(path)) {
    throw NotFoundError("no run manifest at " + path.string() + "; start the run with `bbgan sample` or `bbgan full-run`");
  }
  ojson j;
  try {
    j = ojson::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!j.contains("version") || j["version"] != kManifestVersion) {
    throw MigrationError("manifest " + path.string() + " has an unsupported version");
  }
  try {
    run_id_ = j.at("run_id").get<std::string>();
    created_ = j.at("created").get<std::string>();
    config_json_ = j.at("config").empty() ? std::string() : j.at("config").dump();
    artifacts_.clear();
    for (const auto& [key, value] : j.at("artifacts").items()) {
      artifacts_[key] = {value.at("sha256").get<std::string>(), value.at("schema").get<std::string>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError("manifest " + path.string() + " is malformed: " + e.what());
  }
}

bool RunStore::has(std::string_view relative) const {
  return artifacts_.contains(std::string(relative)) && fs::exists(root_ / relative);
}

void RunStore::write(std::string_view relative, std::string_view content, std::string_view schema) {
  write_file(root_ / relative, content);
  artifacts_[std::string(relative)] = {sha256_hex(content), std::string(schema)};
  save_manifest();
}

std::string RunStore::read(std::string_view relative, std::string_view schema) const {
  const auto it = artifacts_.find(std::string(relative));
  if (it == artifacts_.end() || !fs::exists(root_ / relative)) {
    throw PrerequisiteError(std::string(relative), "artifact " + std::string(relative) + " is missing from run " +
                                                       root_.string());
  }
  if (it->second.schema != schema) {
    throw MigrationError("artifact " + std::string(relative) + " has schema " + it->second.schema + ", expected " +
                         std::string(schema));
  }
  std::string content = read_file(root_ / relative);
  if (sha256_hex(content) != it->second.sha256) {
    throw CorruptionError("artifact " + std::string(relative) + " does not match its recorded digest");
  }
  return content;
}

void RunStore::verify() const {
  for (const auto& [path, entry] : artifacts_) (void)read(path, entry.schema);
}

namespace layout {
std::string omega(int stage) { return "omega/stage-" + std::to_string(stage) + ".csv"; }
std::string induced(int stage) { return "induced/stage-" + std::to_string(stage) + ".json"; }
std::string generator(int stage) { return "gan/stage-" + std::to_string(stage) + "/generator.json"; }
std::string discriminator(int stage) { return "gan/stage-" + std::to_string(stage) + "/discriminator.json"; }
std::string train_log(int stage) { return "gan/stage-" + std::to_string(stage) + "/train_log.csv"; }
std::string attack(std::string_view method) { return "eval/attack-" + std::string(method) + ".csv"; }
std::string report(std::string_view method) { return "eval/report-" + std::string(method) + ".json"; }
}  // namespace layout

void save_samples(RunStore& store, std::string_view relative, const SampleSet& set) {
  store.write(relative, to_csv(set.samples, set.space.dims()), schema::kSamples);
}

SampleSet load_samples(const RunStore& store, std::string_view relative, const ParameterSpace& space) {
  return {space, samples_from_csv(store.read(relative, schema::kSamples), space.dims())};
}

void save_induced(RunStore& store, std::string_view relative, const InducedSet& set) {
  store.write(relative, to_json(set), schema::kInduced);
}

InducedSet load_induced(const RunStore& store, std::string_view relative) {
  return induced_set_from_json(store.read(relative, schema::kInduced));
}

void save_gan(RunStore& store, int stage, const GanResult& result, std::uint64_t seed) {
  store.write(layout::generator(stage), to_checkpoint(result.adversary.generator(), seed, result.steps),
              schema::kCheckpoint);
  store.write(layout::discriminator(stage), to_checkpoint(result.discriminator.net(), seed, result.steps),
              schema::kCheckpoint);
  store.write(layout::train_log(stage), result.log.to_csv(), schema::kTrainLog);
}

Adversary load_adversary(const RunStore& store, int stage, std::size_t latent_dim) {
  return adversary_from_checkpoint(store.read(layout::generator(stage), schema::kCheckpoint), latent_dim);
}

void save_report(RunStore& store, const EvaluationReport& report) {
  store.write(layout::report(report.method), report.to_json(), schema::kReport);
}

EvaluationReport load_report(const RunStore& store, std::string_view method) {
  return EvaluationReport::from_json(store.read(layout::report(method), schema::kReport));
}

}  // namespace bbgan
