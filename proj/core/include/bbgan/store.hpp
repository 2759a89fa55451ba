#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "bbgan/eval.hpp"
#include "bbgan/gan.hpp"
#include "bbgan/inducer.hpp"

namespace bbgan {

std::string sha256_hex(std::string_view bytes);

// Schema tags recorded per artifact; the number after '/' is the version.
namespace schema {
inline constexpr std::string_view kSamples = "samples-csv/1";
inline constexpr std::string_view kInduced = "induced-json/1";
inline constexpr std::string_view kCheckpoint = "mlp-checkpoint/1";
inline constexpr std::string_view kTrainLog = "gan-log-csv/1";
inline constexpr std::string_view kReport = "report-json/1";
inline constexpr std::string_view kTable = "report-table/1";
inline constexpr std::string_view kPlot = "svg/1";
}  // namespace schema

struct ArtifactEntry {
  std::string sha256;
  std::string schema;
};

// One directory per run with manifest.json at its root. Every artifact
// written through the store is recorded with its digest and schema and is
// verified on read.
class RunStore {
 public:
  static constexpr int kManifestVersion = 1;

  // Creates the directory and a fresh manifest, or adopts an existing one.
  static RunStore open_or_create(const std::filesystem::path& root, std::string_view config_json, std::uint64_t seed);
  // Throws NotFoundError when there is no manifest.
  static RunStore open(const std::filesystem::path& root);

  const std::filesystem::path& root() const noexcept { return root_; }
  const std::string& run_id() const noexcept { return run_id_; }
  const std::string& config_json() const noexcept { return config_json_; }
  const std::map<std::string, ArtifactEntry>& artifacts() const noexcept { return artifacts_; }

  bool has(std::string_view relative) const;
  void write(std::string_view relative, std::string_view content, std::string_view schema);
  // PrerequisiteError when missing, CorruptionError on a digest mismatch,
  // MigrationError when the recorded schema differs from the expected one.
  std::string read(std::string_view relative, std::string_view schema) const;
  // Re-checks every recorded artifact.
  void verify() const;

 private:
  RunStore() = default;
  void save_manifest() const;
  void load_manifest();

  std::filesystem::path root_;
  std::string run_id_;
  std::string created_;
  std::string config_json_;
  std::map<std::string, ArtifactEntry> artifacts_;
};

// Artifact paths.
namespace layout {
std::string omega(int stage);
std::string induced(int stage);
std::string generator(int stage);
std::string discriminator(int stage);
std::string train_log(int stage);
std::string attack(std::string_view method);
std::string report(std::string_view method);
inline constexpr std::string_view kReportCsv = "eval/report.csv";
inline constexpr std::string_view kReportText = "eval/report.txt";
inline constexpr std::string_view kHistogram = "eval/histogram.svg";
}  // namespace layout

void save_samples(RunStore& store, std::string_view relative, const SampleSet& set);
SampleSet load_samples(const RunStore& store, std::string_view relative, const ParameterSpace& space);
void save_induced(RunStore& store, std::string_view relative, const InducedSet& set);
InducedSet load_induced(const RunStore& store, std::string_view relative);
void save_gan(RunStore& store, int stage, const GanResult& result, std::uint64_t seed);
Adversary load_adversary(const RunStore& store, int stage, std::size_t latent_dim);
void save_report(RunStore& store, const EvaluationReport& report);
EvaluationReport load_report(const RunStore& store, std::string_view method);

}  // namespace bbgan
