#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "tsmiss/cli.h"

namespace tsmiss::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

int run_args(std::vector<std::string> args) {
  args.insert(args.begin(), "tsmiss");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("tsmiss_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Synthetic cohort under `name`, optionally with a JSON config.
  fs::path synth(const std::string& name, const std::string& config_json = "") {
    const fs::path out = dir_ / name;
    std::vector<std::string> args = {"synth", "--out", out.string()};
    if (!config_json.empty()) {
      write(dir_ / (name + ".json"), config_json);
      args.push_back("--config");
      args.push_back((dir_ / (name + ".json")).string());
    }
    EXPECT_EQ(run_args(args), 0);
    return out;
  }

  std::vector<std::string> data_args(const fs::path& data, const fs::path& out) {
    return {"--events", (data / kEventsFile).string(), "--stays",
            (data / kStaysFile).string(), "--out", out.string()};
  }

  int train(const fs::path& data, const fs::path& out, const std::string& model,
            std::vector<std::string> extra = {}) {
    auto args = data_args(data, out);
    args.insert(args.begin(), "train");
    args.push_back("--model");
    args.push_back(model);
    args.insert(args.end(), extra.begin(), extra.end());
    return run_args(args);
  }

  fs::path dir_;
};

constexpr const char* kSmall = R"({"n_subjects": 300})";

TEST_F(CliTest, SynthWritesFilesDeterministically) {
  const auto a = synth("a", kSmall);
  const auto b = synth("b", kSmall);
  EXPECT_TRUE(fs::exists(a / "manifest_synth.json"));
  EXPECT_EQ(slurp(a / kEventsFile), slurp(b / kEventsFile));
  EXPECT_EQ(slurp(a / kStaysFile), slurp(b / kStaysFile));

  EXPECT_EQ(run_args({"synth", "--out", (dir_ / "c").string(), "--config",
                      (dir_ / "a.json").string(), "--seed", "7"}),
            0);
  EXPECT_NE(slurp(a / kEventsFile), slurp(dir_ / "c" / kEventsFile));
}

TEST_F(CliTest, SynthRejectsBadProbability) {
  write(dir_ / "bad.json", R"({"obs_prob": [[0.5,0.5,0.5,0.5,0.5],[0.8,1.5,0.8,0.8,0.8]]})");
  ::testing::internal::CaptureStderr();
  const int code = run_args({"synth", "--out", (dir_ / "o").string(), "--config",
                             (dir_ / "bad.json").string()});
  const std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, 2);
  EXPECT_NE(err.find("obs_prob[1][spo2]"), std::string::npos) << err;
}

TEST_F(CliTest, UsageErrors) {
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(run_args({}), 2);
  EXPECT_EQ(run_args({"synth"}), 2);
  EXPECT_EQ(run_args({"train", "--events", "e", "--stays", "s", "--out", "o", "--model", "rnn"}),
            2);
  ::testing::internal::GetCapturedStderr();
}

TEST_F(CliTest, MissingInputIsRuntimeError) {
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(train(dir_ / "nowhere", dir_ / "o", "logreg"), 1);
  ::testing::internal::GetCapturedStderr();
}

TEST_F(CliTest, StatsSeparatesTsm) {
  const auto data = synth("d", kSmall);
  auto args = data_args(data, dir_ / "stats");
  args.insert(args.begin(), "stats");
  ASSERT_EQ(run_args(args), 0);
  std::istringstream csv(slurp(dir_ / "stats" / kCohortFile));
  std::string line;
  int tsm_rows = 0;
  while (std::getline(csv, line)) {
    if (line.find("_tsm_pct") != std::string::npos) {
      ++tsm_rows;
      EXPECT_LT(std::stod(line.substr(line.rfind(',') + 1)), 1e-10) << line;
    }
    if (line.rfind("n_subjects,", 0) == 0) EXPECT_EQ(line.substr(0, 15), "n_subjects,300,");
  }
  EXPECT_EQ(tsm_rows, 5);
}

TEST_F(CliTest, TrainEvaluateInterpret) {
  const auto data = synth("d", kSmall);
  const auto out = dir_ / "run";
  ::testing::internal::CaptureStderr();
  ASSERT_EQ(train(data, out, "grud"), 0);
  ASSERT_EQ(train(data, out, "logreg"), 0);
  ASSERT_EQ(train(data, out, "stumps"), 0);
  ::testing::internal::GetCapturedStderr();

  const auto lr = Json::parse(slurp(out / "model_logreg.json"));
  EXPECT_EQ(lr["params"]["coefficients"].size(), 30u);
  EXPECT_TRUE(fs::exists(out / "loss_history_grud.csv"));
  EXPECT_TRUE(fs::exists(out / "manifest_train_stumps.json"));

  auto args = data_args(data, out);
  args.insert(args.begin(), {"evaluate", (out / "model_grud.json").string(),
                             (out / "model_logreg.json").string(),
                             (out / "model_stumps.json").string()});
  ASSERT_EQ(run_args(args), 0);
  const auto report = Json::parse(slurp(out / kReportFile));
  ASSERT_EQ(report["models"].size(), 3u);
  for (const char* k : {"grud", "logreg", "stumps"}) {
    const auto& auroc = report["models"][k]["auroc"];
    EXPECT_EQ(auroc["replicates"].size(), 100u);
    EXPECT_LE(auroc["ci_lower"].get<double>(), auroc["ci_upper"].get<double>());
    EXPECT_TRUE(fs::exists(out / ("roc_" + std::string(k) + ".csv")));
  }

  args = data_args(data, dir_ / "interp");
  args.insert(args.begin(), {"interpret", (out / "model_grud.json").string()});
  ASSERT_EQ(run_args(args), 0);
  const auto csv = slurp(dir_ / "interp" / kDecayCsvFile);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 5 + 5 + 48);

  ::testing::internal::CaptureStderr();
  args = data_args(data, dir_ / "interp2");
  args.insert(args.begin(), {"interpret", (out / "model_logreg.json").string()});
  EXPECT_EQ(run_args(args), 1);
  ::testing::internal::GetCapturedStderr();
}

TEST_F(CliTest, EvaluateRejectsSplitMismatch) {
  const auto data = synth("d", kSmall);
  ASSERT_EQ(train(data, dir_ / "a", "logreg"), 0);
  ::testing::internal::CaptureStderr();
  ASSERT_EQ(train(data, dir_ / "b", "stumps", {"--seed", "5"}), 0);
  auto args = data_args(data, dir_ / "e");
  args.insert(args.begin(), {"evaluate", (dir_ / "a" / "model_logreg.json").string(),
                             (dir_ / "b" / "model_stumps.json").string()});
  EXPECT_EQ(run_args(args), 1);
  ::testing::internal::GetCapturedStderr();
}

TEST_F(CliTest, PerfectSeparationReachesUnitAuroc) {
  const auto data = synth("d", R"({"n_subjects": 200, "obs_prob": [[0,0,0,0,0],[1,1,1,1,1]]})");
  const auto out = dir_ / "run";
  ASSERT_EQ(train(data, out, "logreg"), 0);
  auto args = data_args(data, out);
  args.insert(args.begin(), {"evaluate", (out / "model_logreg.json").string()});
  ASSERT_EQ(run_args(args), 0);
  const auto report = Json::parse(slurp(out / kReportFile));
  EXPECT_EQ(report["models"]["logreg"]["auroc"]["ci_upper"].get<double>(), 1.0);
  EXPECT_EQ(report["models"]["logreg"]["auroc"]["point"].get<double>(), 1.0);
}

TEST_F(CliTest, UntrainedZeroDecayModelInterpretsToOnes) {
  const auto data = synth("d", kSmall);
  const auto out = dir_ / "run";
  write(dir_ / "cfg.json", R"({"grud": {"epochs": 1}})");
  ASSERT_EQ(train(data, out, "grud", {"--config", (dir_ / "cfg.json").string()}), 0);

  // Zero the decay parameters in place; everything else stays trained.
  auto model = Json::parse(slurp(out / "model_grud.json"));
  auto& p = model["params"];
  for (const char* k : {"w_gamma_x", "b_gamma_x", "b_gamma_h"}) {
    for (auto& v : p[k]) v = 0.0;
  }
  for (auto& row : p["w_gamma_h"]) {
    for (auto& v : row) v = 0.0;
  }
  write(out / "zero.json", dump(model));

  auto args = data_args(data, dir_ / "interp");
  args.insert(args.begin(), {"interpret", (out / "zero.json").string()});
  ASSERT_EQ(run_args(args), 0);
  const auto s = Json::parse(slurp(dir_ / "interp" / kDecayJsonFile));
  EXPECT_EQ(s["dx_overall"].get<double>(), 1.0);
  EXPECT_EQ(s["dh_overall"].get<double>(), 1.0);
  for (const auto& v : s["dx_per_timestep"]) EXPECT_EQ(v.get<double>(), 1.0);
  for (const auto& [k, v] : s["dh_per_unit"].items()) EXPECT_EQ(v.get<double>(), 1.0) << k;
}

TEST_F(CliTest, GrudLossDecreasesOnMissingnessScenario) {
  const auto data = synth("d");
  const auto out = dir_ / "run";
  ASSERT_EQ(train(data, out, "grud"), 0);
  std::istringstream hist(slurp(out / "loss_history_grud.csv"));
  std::string line;
  std::getline(hist, line);
  EXPECT_EQ(line, "epoch,mean_loss");
  std::vector<double> loss;
  while (std::getline(hist, line)) loss.push_back(std::stod(line.substr(line.find(',') + 1)));
  ASSERT_EQ(loss.size(), 40u);
  for (std::size_t e = 1; e < 5; ++e) EXPECT_LT(loss[e], loss[e - 1]) << "epoch " << e;
}

TEST_F(CliTest, DecayRatesDifferWithPerVariableGaps) {
  const auto data = synth("d", R"({"n_subjects": 400,
      "obs_prob": [[0.3,0.5,0.2,0.6,0.4],[0.9,0.8,0.9,0.8,0.9]]})");
  const auto out = dir_ / "run";
  write(dir_ / "cfg.json", R"({"grud": {"learning_rate": 0.01, "epochs": 10}})");
  ASSERT_EQ(train(data, out, "grud", {"--config", (dir_ / "cfg.json").string()}), 0);
  auto args = data_args(data, dir_ / "interp");
  args.insert(args.begin(), {"interpret", (out / "model_grud.json").string()});
  ASSERT_EQ(run_args(args), 0);
  const auto s = Json::parse(slurp(dir_ / "interp" / kDecayJsonFile));

  // A variable whose decay weight starts negative never leaves the flat
  // part of the hinge and reports exactly 1; every active one differs.
  std::vector<double> active;
  for (const auto& [k, v] : s["dx_per_feature"].items()) {
    if (v.get<double>() < 1.0) active.push_back(v.get<double>());
  }
  ASSERT_GE(active.size(), 2u);
  EXPECT_EQ(std::set<double>(active.begin(), active.end()).size(), active.size());
}

}  // namespace
}  // namespace tsmiss::cli
