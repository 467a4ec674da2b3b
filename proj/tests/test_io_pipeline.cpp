#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "owcluster/io.hpp"
#include "owcluster/pipeline.hpp"
#include "support/synthetic.hpp"

using namespace owcluster;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "owcluster_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_text(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

std::vector<unsigned char> header(const char* magic, std::uint16_t version, std::uint16_t flags, std::uint64_t n,
                                  std::uint64_t d) {
  std::vector<unsigned char> h(24);
  std::memcpy(h.data(), magic, 4);
  for (int b = 0; b < 2; ++b) h[4 + b] = static_cast<unsigned char>(version >> (8 * b));
  for (int b = 0; b < 2; ++b) h[6 + b] = static_cast<unsigned char>(flags >> (8 * b));
  for (int b = 0; b < 8; ++b) h[8 + b] = static_cast<unsigned char>(n >> (8 * b));
  for (int b = 0; b < 8; ++b) h[16 + b] = static_cast<unsigned char>(d >> (8 * b));
  return h;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no throw");
  return ErrorCode::InvalidArgument;
}

PipelineConfig small_config(const fs::path& input) {
  PipelineConfig c;
  c.input = input.string();
  c.n_init = 10;
  return c;
}

}  // namespace

TEST_CASE("owcl round trip is bit-identical") {
  Rng rng(1);
  const auto x = testing::uniform_matrix(7, 3, rng);
  const auto path = scratch("plain.owcl");
  write_embedding_file(path.string(), x);
  CHECK(fs::file_size(path) == 24 + 4 * 21);
  const auto back = read_embedding_file(path.string());
  CHECK(back.matrix == x);
  CHECK(!back.labels);

  const LabelVector labels{0, 1, 2, 0, 1, 2, 7};
  write_embedding_file(path.string(), x, labels);
  CHECK(fs::file_size(path) == 24 + 4 * 21 + 4 * 7);
  const auto labeled = read_embedding_file(path.string());
  CHECK(labeled.matrix == x);
  CHECK(labeled.labels == labels);
}

TEST_CASE("owcl byte layout") {
  const EmbeddingMatrix x(1, 2, {1.0f, -2.0f});
  const auto path = scratch("layout.owcl");
  write_embedding_file(path.string(), x, LabelVector{5});
  const auto bytes = read_bytes(path);
  auto expect = header("OWCL", 1, 1, 1, 2);
  for (unsigned char b : {0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0, 0x05, 0x00, 0x00, 0x00}) expect.push_back(b);
  CHECK(bytes == expect);
}

TEST_CASE("owcl read errors") {
  const auto path = scratch("bad.owcl");
  auto bad_magic = header("XXXX", 1, 0, 1, 1);
  bad_magic.resize(28);
  write_bytes(path, bad_magic);
  CHECK(code_of([&] { read_embedding_file(path.string()); }) == ErrorCode::BadMagic);

  auto future = header("OWCL", 2, 0, 1, 1);
  future.resize(28);
  write_bytes(path, future);
  CHECK(code_of([&] { read_embedding_file(path.string()); }) == ErrorCode::VersionUnsupported);

  auto short_payload = header("OWCL", 1, 0, 2, 2);
  short_payload.resize(24 + 12);
  write_bytes(path, short_payload);
  CHECK(code_of([&] { read_embedding_file(path.string()); }) == ErrorCode::TruncatedFile);

  auto missing_labels = header("OWCL", 1, 1, 1, 1);
  missing_labels.resize(28);
  write_bytes(path, missing_labels);
  CHECK(code_of([&] { read_embedding_file(path.string()); }) == ErrorCode::TruncatedFile);

  write_bytes(path, {'O', 'W', 'C', 'L', 1, 0});
  CHECK(code_of([&] { read_embedding_file(path.string()); }) == ErrorCode::TruncatedFile);

  auto trailing = header("OWCL", 1, 0, 1, 1);
  trailing.resize(32);
  write_bytes(path, trailing);
  CHECK(code_of([&] { read_embedding_file(path.string()); }) == ErrorCode::InvalidArgument);

  auto nan_payload = header("OWCL", 1, 0, 1, 1);
  for (unsigned char b : {0x00, 0x00, 0xc0, 0x7f}) nan_payload.push_back(b);
  write_bytes(path, nan_payload);
  CHECK(code_of([&] { read_embedding_file(path.string()); }) == ErrorCode::NonFiniteValue);

  CHECK(code_of([&] { read_embedding_file(scratch("missing.owcl").string()); }) == ErrorCode::Io);
}

TEST_CASE("csv input") {
  const auto path = scratch("data.csv");
  write_text(path, "1.5,2e-3,-4\n0,1E2,3.25\n");
  const auto plain = read_embedding_file(path.string(), FileFormat::Csv);
  CHECK(plain.matrix == EmbeddingMatrix(2, 3, {1.5f, 2e-3f, -4.f, 0.f, 100.f, 3.25f}));

  write_text(path, "1,2,0\n3,4,1\n");
  const auto labeled = read_embedding_file(path.string(), FileFormat::Csv, true);
  CHECK(labeled.matrix == EmbeddingMatrix(2, 2, {1.f, 2.f, 3.f, 4.f}));
  CHECK(labeled.labels == LabelVector{0, 1});

  write_text(path, "1,2\n3,x\n");
  try {
    read_embedding_file(path.string(), FileFormat::Csv);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CsvParse);
    CHECK(std::string(e.what()).find("(1, 1)") != std::string::npos);
  }
  write_text(path, "1,2\n3\n");
  CHECK(code_of([&] { read_embedding_file(path.string(), FileFormat::Csv); }) == ErrorCode::CsvParse);
  write_text(path, "1,2,-1\n");
  CHECK(code_of([&] { read_embedding_file(path.string(), FileFormat::Csv, true); }) == ErrorCode::CsvParse);

  Rng rng(2);
  const auto x = testing::uniform_matrix(5, 4, rng);
  write_embedding_csv(path.string(), x, LabelVector{0, 1, 2, 3, 4});
  const auto back = read_embedding_file(path.string(), FileFormat::Csv, true);
  CHECK(back.matrix == x);
  CHECK(back.labels == LabelVector{0, 1, 2, 3, 4});

  CHECK(format_from_path("a/b.csv") == FileFormat::Csv);
  CHECK(format_from_path("a/b.owcl") == FileFormat::Owcl);
  CHECK(parse_format("csv") == FileFormat::Csv);
  CHECK_THROWS_AS(parse_format("npy"), Error);
}

TEST_CASE("label files") {
  const auto path = scratch("labels.txt");
  write_text(path, "3\n\n1\n4\n");
  CHECK(read_label_file(path.string()) == LabelVector{3, 1, 4});
  write_text(path, "3\nz\n");
  CHECK(code_of([&] { read_label_file(path.string()); }) == ErrorCode::CsvParse);
}

TEST_CASE("pipeline clusters blobs at a given k") {
  const auto data = testing::gaussian_blobs(3, 100, 16, 10.0, 1.0, 3);
  const auto path = scratch("blobs.owcl");
  write_embedding_file(path.string(), data.x, data.labels);
  auto cfg = small_config(path);
  cfg.k = 3;
  const auto out = run_pipeline(cfg);
  CHECK(out.report.chosen_k == 3);
  REQUIRE(out.report.external);
  CHECK(out.report.external->acc == 1.0);
  CHECK(out.reduced.cols() == 3);
  CHECK(out.report.trace.empty());

  const auto j = out.report.to_json();
  std::vector<std::string> keys;
  for (const auto& [key, value] : j.items()) keys.push_back(key);
  CHECK(keys == std::vector<std::string>{"chosen_k", "assignment", "internal", "external", "trace", "config_echo",
                                         "seed"});
  CHECK(j["external"]["acc"] == 100.0);
  CHECK(j["internal"]["silhouette"].is_number());
}

TEST_CASE("pipeline estimates k and omits external scores without labels") {
  const auto data = testing::gaussian_blobs(3, 100, 16, 10.0, 1.0, 4);
  const auto path = scratch("blobs_est.owcl");
  write_embedding_file(path.string(), data.x, data.labels);
  auto cfg = small_config(path);
  cfg.k_min = 2;
  cfg.k_max = 6;
  cfg.labels = "none";
  const auto out = run_pipeline(cfg);
  CHECK(out.report.chosen_k == 3);
  CHECK(out.report.trace.size() == 5);
  CHECK(!out.report.external);
  CHECK(!out.report.to_json().contains("external"));

  // labels from a side file
  const auto labels_path = scratch("blobs_labels.txt");
  std::ostringstream text;
  for (auto l : data.labels) text << l << "\n";
  write_text(labels_path, text.str());
  cfg.labels = labels_path.string();
  cfg.k = 3;
  CHECK(run_pipeline(cfg).report.external->acc == 1.0);
}

TEST_CASE("config echo reproduces the report byte for byte") {
  const auto data = testing::gaussian_blobs(4, 40, 8, 8.0, 1.0, 5);
  const auto path = scratch("echo.owcl");
  write_embedding_file(path.string(), data.x, data.labels);
  auto cfg = small_config(path);
  cfg.engine = EngineKind::FasterMSC;
  cfg.estimator = Estimator::Bayes;
  cfg.k_min = 2;
  cfg.k_max = 10;
  cfg.budget = 5;
  cfg.seed = 99;
  const auto first = run_pipeline(cfg).report.to_json().dump();
  const auto echo = nlohmann::json::parse(first)["config_echo"];
  const auto replay = PipelineConfig::from_json(echo);
  CHECK(replay.to_json() == cfg.to_json());
  CHECK(run_pipeline(replay).report.to_json().dump() == first);
}

TEST_CASE("pipeline errors carry their stage") {
  auto stage_of = [](const PipelineConfig& cfg, const EmbeddingData* data) -> std::string {
    try {
      if (data) {
        run_pipeline(*data, cfg);
      } else {
        run_pipeline(cfg);
      }
    } catch (const StageError& e) {
      return e.stage();
    }
    return "";
  };
  PipelineConfig cfg;
  cfg.input = scratch("nope.owcl").string();
  CHECK(stage_of(cfg, nullptr) == "load");

  EmbeddingData zero{EmbeddingMatrix(20, 4, 0.0f), std::nullopt};
  zero.matrix(0, 0) = 1.0f;
  cfg.k = 2;
  CHECK(stage_of(cfg, &zero) == "normalize");

  Rng rng(6);
  EmbeddingData ok{testing::uniform_matrix(20, 4, rng), std::nullopt};
  cfg.k = 30;
  CHECK(stage_of(cfg, &ok) == "cluster");
  cfg.k.reset();
  cfg.k_min = 5;
  cfg.k_max = 3;
  CHECK(stage_of(cfg, &ok) == "estimate");
  cfg.reducer.n_neighbors = 40;
  CHECK(stage_of(cfg, &ok) == "reduce");

  EmbeddingData mismatch{testing::uniform_matrix(20, 4, rng), LabelVector(3, 0)};
  cfg = PipelineConfig{};
  cfg.k = 2;
  cfg.reducer = ReducerConfig::defaults(ReducerMethod::PCA);
  cfg.reducer.target_dims = 2;
  CHECK(stage_of(cfg, &mismatch) == "score");
}

TEST_CASE("undefined and infinite indices serialize cleanly") {
  EmbeddingData points{EmbeddingMatrix(4, 2, {1.f, 1.f, 1.f, 1.f, 5.f, 2.f, 5.f, 2.f}), LabelVector{0, 0, 1, 1}};
  PipelineConfig cfg;
  cfg.normalize = false;
  cfg.reducer.method = ReducerMethod::None;
  cfg.k = 2;
  const auto j = run_pipeline(points, cfg).report.to_json();
  CHECK(j["internal"]["calinski_harabasz"] == "inf");

  cfg.k = 1;
  const auto single = run_pipeline(points, cfg).report.to_json();
  CHECK(single["internal"]["silhouette"].is_null());
  CHECK(single["internal"]["davies_bouldin"].is_null());
}

TEST_CASE("config parsing rejects malformed input") {
  auto j = nlohmann::json::parse(PipelineConfig{}.to_json().dump());
  j["estimator"] = "grid";
  CHECK(code_of([&] { PipelineConfig::from_json(j); }) == ErrorCode::InvalidArgument);
  j.erase("estimator");
  CHECK(code_of([&] { PipelineConfig::from_json(j); }) == ErrorCode::InvalidArgument);
  CHECK(as_percentage(0.99149) == 99.1);
  CHECK(as_percentage(1.0) == 100.0);
}
