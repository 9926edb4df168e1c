#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "keyframe_dpc/feature_io.hpp"
#include "keyframe_dpc/image_io.hpp"
#include "keyframe_dpc/lstm.hpp"

using namespace kfdpc;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("kfdpc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name, std::ios::binary) << text;
  }

  static std::string read(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  std::string toy_features() const {
    const std::string p = path("toy.csv");
    std::ofstream(p) << "0\n0.1\n0.2\n10\n10.1\n10.2\n";
    return p;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, ExtractPlantedClusters) {
  ASSERT_EQ(run({"extract", "--features", toy_features(), "--k", "1", "--n-c", "2", "--out", path("kf.json")}), 0)
      << err_.str();
  auto kf = nlohmann::ordered_json::parse(read(path("kf.json")));
  auto idx = kf["indices"].get<std::vector<std::size_t>>();
  ASSERT_EQ(idx.size(), 2u);
  EXPECT_LE(idx[0], 2u);
  EXPECT_GE(idx[1], 3u);
  EXPECT_EQ(kf.begin().key(), "total_frames");
}

TEST_F(CliTest, ExtractSingleFrame) {
  write("single.csv", "1,2,3\n");
  ASSERT_EQ(run({"extract", "--features", path("single.csv"), "--out", path("kf.json"), "--stats-out",
                 path("stats.json")}),
            0);
  EXPECT_EQ(nlohmann::json::parse(read(path("kf.json")))["indices"], nlohmann::json::array({0}));
  auto stats = nlohmann::json::parse(read(path("stats.json")));
  EXPECT_EQ(stats["compression_ratio"], 0.0);
  EXPECT_EQ(stats["total_frames"], 1);
  EXPECT_TRUE(stats.contains("extraction_ms"));
}

TEST_F(CliTest, ExtractIsByteIdenticalAcrossRunsAndThreads) {
  const auto features = toy_features();
  ASSERT_EQ(run({"extract", "--features", features, "--out", path("a.json"), "--graph-out", path("ga")}), 0);
  ASSERT_EQ(run({"extract", "--features", features, "--out", path("b.json"), "--graph-out", path("gb"), "--threads",
                 "4"}),
            0);
  EXPECT_EQ(read(path("a.json")), read(path("b.json")));
  for (int s = 0; s < 3; ++s) {
    const std::string name = "segment_" + std::to_string(s) + ".csv";
    EXPECT_EQ(read(path("ga/" + name)), read(path("gb/" + name)));
  }
  EXPECT_EQ(read(path("ga/segment_0.csv")).rfind("index,rho,delta,gamma,nhd\n", 0), 0u);
}

TEST_F(CliTest, ExtractFromFrameDirectory) {
  fs::create_directories(dir_ / "frames");
  for (int i = 0; i < 6; ++i) {
    const std::uint8_t v = i < 3 ? 20 : 230;
    features::Image img{4, 4, 3, std::vector<std::uint8_t>(48, static_cast<std::uint8_t>(v + i))};
    features::write_ppm(dir_ / "frames" / ("f" + std::to_string(i) + ".ppm"), img);
  }
  ASSERT_EQ(run({"extract", "--frames-dir", path("frames"), "--extractor", "downsampled-luminance:2x2", "--k", "2"}),
            0)
      << err_.str();
  auto kf = nlohmann::json::parse(out_.str());
  EXPECT_EQ(kf["total_frames"], 6);
  EXPECT_EQ(kf["segments"].size(), 2u);
}

TEST_F(CliTest, DecisionGraphWritesOneCsvPerSegment) {
  ASSERT_EQ(run({"decision-graph", "--features", toy_features(), "--k", "2", "--kernel", "cutoff", "--out",
                 path("graphs")}),
            0);
  EXPECT_TRUE(fs::exists(path("graphs/segment_0.csv")));
  EXPECT_TRUE(fs::exists(path("graphs/segment_1.csv")));
  const auto second = read(path("graphs/segment_1.csv"));
  // Global indices: segment 1 starts at frame 3.
  EXPECT_NE(second.find("\n3,"), std::string::npos);
}

TEST_F(CliTest, ClassifyWithZeroParams) {
  classify::save_params(path("zero.lstm"), classify::LstmParams::zeros(1, 4, 3, 3));
  const auto features = toy_features();
  ASSERT_EQ(run({"classify", "--features", features, "--params", path("zero.lstm"), "--out", path("pred.json")}), 0)
      << err_.str();
  auto pred = nlohmann::json::parse(read(path("pred.json")));
  for (const auto& row : pred["rows"])
    for (const auto& v : row) EXPECT_DOUBLE_EQ(v.get<double>(), 1.0 / 3.0);
  EXPECT_EQ(pred["label"], 0);
  EXPECT_EQ(pred["rows"].size(), pred["frame_indices"].size());
}

TEST_F(CliTest, ClassifyZeroStateMatchesSequentialOnOneKeyFrame) {
  classify::save_params(path("p.lstm"), classify::LstmParams::random(1, 3, 2, 3, 4));
  write("kf.json", R"({"total_frames":6,"segments":[{"start":0,"end":6,"n_c":1,"indices":[4]}],"indices":[4]})");
  const auto features = toy_features();
  ASSERT_EQ(run({"classify", "--features", features, "--params", path("p.lstm"), "--keyframes", path("kf.json")}), 0)
      << err_.str();
  const auto sequential = out_.str();
  ASSERT_EQ(run({"classify", "--features", features, "--params", path("p.lstm"), "--keyframes", path("kf.json"),
                 "--zero-state"}),
            0);
  EXPECT_EQ(out_.str(), sequential);
}

TEST_F(CliTest, ClassifyErrors) {
  write("bad.lstm", "LSTX garbage");
  const auto features = toy_features();
  EXPECT_EQ(run({"classify", "--features", features, "--params", path("bad.lstm")}), 3);
  classify::save_params(path("wide.lstm"), classify::LstmParams::zeros(5, 2, 2, 1));
  EXPECT_EQ(run({"classify", "--features", features, "--params", path("wide.lstm")}), 3);
  EXPECT_EQ(run({"classify", "--features", features}), 2);
}

TEST_F(CliTest, FuseTableRates) {
  write("a.json", R"({"rows":[[0.6,0.4]]})");
  write("b.json", R"({"rows":[[0.2,0.8]]})");
  write("c.json", R"({"rows":[[0.5,0.5],[0.3,0.7]]})");
  ASSERT_EQ(run({"fuse", "--rates", "79.63,84.94,83.63", "--predictions", path("a.json"), "--predictions",
                 path("b.json"), "--predictions", path("c.json")}),
            0)
      << err_.str();
  auto fused = nlohmann::json::parse(out_.str());
  EXPECT_EQ(fused["weights"], nlohmann::json::array({1, 3, 3}));
  EXPECT_NEAR(fused["combined"][0].get<double>(), (0.6 + 3 * 0.2 + 3 * 0.4) / 7.0, 1e-12);
  EXPECT_EQ(fused["label"], 1);
}

TEST_F(CliTest, FuseSingleAndEqualRates) {
  write("a.json", R"({"rows":[[0.1,0.9]]})");
  write("b.json", R"({"rows":[[0.7,0.3]]})");
  ASSERT_EQ(run({"fuse", "--rates", "55", "--predictions", path("a.json")}), 0);
  auto single = nlohmann::json::parse(out_.str());
  EXPECT_EQ(single["combined"], nlohmann::json::parse("[0.1,0.9]"));
  ASSERT_EQ(run({"fuse", "--rates", "70,70", "--predictions", path("a.json") + "," + path("b.json")}), 0);
  EXPECT_EQ(nlohmann::json::parse(out_.str())["weights"], nlohmann::json::array({1, 1}));
}

TEST_F(CliTest, FuseClassMismatch) {
  write("a.json", R"({"rows":[[0.1,0.9]]})");
  write("b.json", R"({"rows":[[0.2,0.3,0.5]]})");
  EXPECT_EQ(run({"fuse", "--rates", "60,80", "--predictions", path("a.json"), "--predictions", path("b.json")}), 3);
  EXPECT_EQ(run({"fuse", "--rates", "60,80", "--predictions", path("a.json")}), 2);
}

TEST_F(CliTest, StatsFromKeyFrameFile) {
  write("kf.json", R"({"total_frames":8,"segments":[],"indices":[1,5]})");
  ASSERT_EQ(run({"stats", "--keyframes", path("kf.json")}), 0);
  auto stats = nlohmann::json::parse(out_.str());
  EXPECT_EQ(stats["key_frames"], 2);
  EXPECT_EQ(stats["compression_ratio"], 0.75);
}

TEST_F(CliTest, ConfigFilePrecedence) {
  const auto features = toy_features();
  write("run.cfg", "# defaults for the toy\nk = 1\nn-c = 2\nkernel=cutoff\n");
  ASSERT_EQ(run({"extract", "--features", features, "--config", path("run.cfg")}), 0) << err_.str();
  auto from_config = nlohmann::json::parse(out_.str());
  EXPECT_EQ(from_config["segments"].size(), 1u);
  EXPECT_EQ(from_config["indices"].size(), 2u);
  ASSERT_EQ(run({"extract", "--features", features, "--config", path("run.cfg"), "--k", "2"}), 0);
  EXPECT_EQ(nlohmann::json::parse(out_.str())["segments"].size(), 2u);
  write("bad.cfg", "rates=1\n");
  EXPECT_EQ(run({"extract", "--features", features, "--config", path("bad.cfg")}), 2);
}

TEST_F(CliTest, ArgumentAndInputErrors) {
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"extract"}), 2);
  EXPECT_EQ(run({"extract", "--features", toy_features(), "--t", "0"}), 2);
  EXPECT_EQ(run({"extract", "--features", toy_features(), "--kernel", "box"}), 2);
  write("ragged.csv", "1,2\n3\n");
  EXPECT_EQ(run({"extract", "--features", path("ragged.csv")}), 3);
  EXPECT_EQ(run({"extract", "--features", path("missing.csv")}), 3);
  write("trunc.fmtx", std::string("FMTX\x02\0\0\0\x01\0\0\0", 12));
  EXPECT_EQ(run({"extract", "--features", path("trunc.fmtx")}), 3);
}

TEST_F(CliTest, HelpExitsZero) {
  for (const char* cmd : {"extract", "classify", "fuse", "decision-graph", "stats"}) {
    EXPECT_EQ(run({cmd, "--help"}), 0) << cmd;
    EXPECT_NE(out_.str().find("Usage"), std::string::npos);
  }
  EXPECT_EQ(run({"--help"}), 0);
}
