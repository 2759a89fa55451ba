#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bbgan/error.hpp"
#include "bbgan/store.hpp"

using namespace bbgan;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bbgan-store-" + name + "-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SampleSet random_set(std::size_t n, std::size_t d, std::uint64_t seed) {
  SeededSampler rng(seed);
  SampleSet set{ParameterSpace::unit_box(d), {}};
  for (auto& mu : sample_uniform_normalized(d, n, rng)) {
    set.samples.push_back({mu, rng.uniform(), n % 3 == 0 ? Origin::generated(2) : Origin::uniform()});
  }
  return set;
}

}  // namespace

TEST(Sha256, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(RunStore, LargeSampleSetRoundTrip) {
  const auto dir = fresh_dir("samples");
  auto store = RunStore::open_or_create(dir, "{}", 3);
  const auto set = random_set(20000, 4, 1);
  save_samples(store, layout::omega(0), set);
  const auto back = load_samples(RunStore::open(dir), layout::omega(0), set.space);
  ASSERT_EQ(back.samples.size(), set.samples.size());
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].q, set.samples[i].q);
    EXPECT_EQ(back.samples[i].mu, set.samples[i].mu);
    EXPECT_EQ(back.samples[i].origin, set.samples[i].origin);
  }
  fs::remove_all(dir);
}

TEST(RunStore, TamperedArtifactDetected) {
  const auto dir = fresh_dir("tamper");
  auto store = RunStore::open_or_create(dir, "{}", 3);
  save_samples(store, layout::omega(0), random_set(50, 2, 2));
  {
    std::ofstream out(dir / layout::omega(0), std::ios::app);
    out << "0.5,0.5,0.1,uniform\n";
  }
  const auto reopened = RunStore::open(dir);
  EXPECT_THROW(load_samples(reopened, layout::omega(0), ParameterSpace::unit_box(2)), CorruptionError);
  EXPECT_THROW(reopened.verify(), CorruptionError);
  fs::remove_all(dir);
}

TEST(RunStore, MissingManifestIsNotFound) {
  const auto dir = fresh_dir("missing");
  fs::create_directories(dir);
  try {
    RunStore::open(dir);
    FAIL() << "expected NotFoundError";
  } catch (const NotFoundError& e) {
    EXPECT_NE(std::string(e.what()).find("manifest.json"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(RunStore, MissingArtifactIsPrerequisite) {
  const auto dir = fresh_dir("prereq");
  const auto store = RunStore::open_or_create(dir, "{}", 3);
  try {
    store.read(layout::generator(0), schema::kCheckpoint);
    FAIL() << "expected PrerequisiteError";
  } catch (const PrerequisiteError& e) {
    EXPECT_EQ(e.artifact(), layout::generator(0));
  }
  fs::remove_all(dir);
}

TEST(RunStore, SchemaMismatchIsMigration) {
  const auto dir = fresh_dir("schema");
  auto store = RunStore::open_or_create(dir, "{}", 3);
  store.write("eval/x.json", "{}", "report-json/0");
  EXPECT_THROW(store.read("eval/x.json", schema::kReport), MigrationError);
  fs::remove_all(dir);
}

TEST(RunStore, ManifestRecordsDigestsAndConfig) {
  const auto dir = fresh_dir("manifest");
  auto store = RunStore::open_or_create(dir, "{\"seed\":3}", 3);
  store.write("a/b.txt", "hello", "text/1");
  const auto reopened = RunStore::open(dir);
  EXPECT_EQ(reopened.run_id(), store.run_id());
  EXPECT_EQ(reopened.config_json(), "{\"seed\":3}");
  EXPECT_EQ(reopened.artifacts().at("a/b.txt").sha256, sha256_hex("hello"));
  EXPECT_EQ(reopened.read("a/b.txt", "text/1"), "hello");
  EXPECT_TRUE(reopened.run_id().ends_with("-3"));
  fs::remove_all(dir);
}

TEST(RunStore, RewritingIdenticalContentIsByteStable) {
  const auto dir = fresh_dir("stable");
  auto store = RunStore::open_or_create(dir, "{}", 3);
  const auto set = random_set(100, 3, 4);
  save_samples(store, layout::omega(0), set);
  const auto first = slurp(dir / layout::omega(0));
  save_samples(store, layout::omega(0), set);
  EXPECT_EQ(first, slurp(dir / layout::omega(0)));
  fs::remove_all(dir);
}

TEST(RunStore, InducedAndReportRoundTrip) {
  const auto dir = fresh_dir("induced");
  auto store = RunStore::open_or_create(dir, "{}", 3);
  const auto set = random_set(200, 2, 5);
  const auto induced = induce(set, 30, 0.5);
  save_induced(store, layout::induced(0), induced);
  const auto back = load_induced(store, layout::induced(0));
  EXPECT_EQ(back.samples, induced.samples);
  EXPECT_EQ(back.epsilon, induced.epsilon);
  EXPECT_EQ(back.shortfall, induced.shortfall);

  EvaluationReport r;
  r.method = "bbgan";
  r.m = 2;
  r.f = 1;
  r.afr = 0.5;
  r.records = {{{0.1, 0.2}, 0.1, true, ""}, {{0.3, 0.4}, 0.9, true, ""}};
  save_report(store, r);
  EXPECT_EQ(load_report(store, "bbgan"), r);
  fs::remove_all(dir);
}

TEST(RunStore, GanCheckpointRoundTrip) {
  const auto dir = fresh_dir("gan");
  auto store = RunStore::open_or_create(dir, "{}", 3);
  SeededSampler rng(6);
  std::vector<Vector> data;
  for (int i = 0; i < 40; ++i) data.push_back({rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)});
  GanConfig cfg;
  cfg.epochs = 5;
  const auto result = train_gan(data, cfg);
  save_gan(store, 0, result, 1);
  const auto adv = load_adversary(store, 0, cfg.latent_dim);
  EXPECT_TRUE(adv.generator() == result.adversary.generator());
  EXPECT_EQ(GanTrainLog::from_csv(store.read(layout::train_log(0), schema::kTrainLog)).epochs.size(), 5u);
  fs::remove_all(dir);
}
