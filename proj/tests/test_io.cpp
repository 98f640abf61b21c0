#include <doctest.h>
#include <algorithm>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "relaybeam/config.hpp"
#include "relaybeam/results_io.hpp"

using namespace relaybeam;

namespace {

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

ExperimentResult tiny_run() {
  ExperimentConfig cfg;
  cfg.trials = 2;
  cfg.geometry.num_slots = 3;
  cfg.threads = 1;
  return run_experiment(cfg);
}

}  // namespace

TEST_CASE("slot CSV of an empty table is just the header") {
  std::ostringstream out;
  write_slot_csv(out, {});
  CHECK(out.str() == std::string(kSlotCsvHeader) + "\n");
  std::istringstream in(out.str());
  CHECK(read_slot_csv(in).empty());
}

TEST_CASE("one single-relay record is two CSV lines") {
  SlotRecord rec;
  rec.trial = 0;
  rec.slot = 1;
  rec.policy = Policy::kSelective;
  rec.positions = {{1.5, 2.25}};
  rec.value_V = 0.1;
  rec.feasible = true;
  rec.chosen_relay = 1;
  std::ostringstream out;
  write_slot_csv(out, {rec});
  CHECK(count_lines(out.str()) == 2);
  CHECK(out.str().find("\n0,1,selective,1,1.5,2.25,") != std::string::npos);
}

TEST_CASE("slot CSV round-trips") {
  const ExperimentResult res = tiny_run();
  std::ostringstream out;
  write_slot_csv(out, res.records);
  CHECK(count_lines(out.str()) == 1 + res.records.size() * 3);
  std::istringstream in(out.str());
  const std::vector<SlotRecord> back = read_slot_csv(in);
  REQUIRE(back.size() == res.records.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    const SlotRecord& a = res.records[k];
    const SlotRecord& b = back[k];
    CHECK(a.trial == b.trial);
    CHECK(a.slot == b.slot);
    CHECK(a.policy == b.policy);
    CHECK(a.positions == b.positions);
    CHECK(a.value_V == b.value_V);
    CHECK(a.relay_power == b.relay_power);
    CHECK(a.sinr == b.sinr);
    CHECK(a.feasible == b.feasible);
    CHECK(a.chosen_relay == b.chosen_relay);
    CHECK(a.best_E == b.best_E);
  }
}

TEST_CASE("malformed slot CSV is rejected") {
  std::istringstream no_header("a,b,c\n");
  CHECK_THROWS_AS(read_slot_csv(no_header), std::invalid_argument);
  std::istringstream short_row(std::string(kSlotCsvHeader) + "\n0,1,static\n");
  CHECK_THROWS_AS(read_slot_csv(short_row), std::invalid_argument);
}

TEST_CASE("emit_results writes all files") {
  const ExperimentResult res = tiny_run();
  ExperimentConfig cfg;
  const auto dir = std::filesystem::temp_directory_path() / "relaybeam_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  const OutputPaths paths = default_output_paths(dir.string(), true);
  emit_results(cfg, res, paths);
  CHECK(std::filesystem::exists(paths.slots_csv));
  CHECK(std::filesystem::exists(paths.trajectories_csv));
  std::ifstream js(paths.summary_json);
  const nlohmann::json summary = nlohmann::json::parse(js);
  CHECK(summary.at("aggregates").size() == cfg.policies.size());
  std::filesystem::remove_all(dir.parent_path());
}

TEST_CASE("unwritable output path names the path") {
  const ExperimentResult res = tiny_run();
  const auto blocker = std::filesystem::temp_directory_path() / "relaybeam_blocker_file";
  { std::ofstream(blocker) << "x"; }
  OutputPaths paths = default_output_paths((blocker / "sub").string(), false);
  try {
    emit_results(ExperimentConfig{}, res, paths);
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(blocker.string()) != std::string::npos);
  }
  std::filesystem::remove(blocker);
}

TEST_CASE("config parsing") {
  std::istringstream in(R"(# campaign
trials = 7
master_seed = 99
policies = selective, static
history_window = inf
region = 0, 0, 200, 100
source = 10, 50
destination = 190, 50
num_relays = 2
initial_positions = 100, 40; 100, 60
max_speed = 1.5
shadow_power = 6   # dB^2
search_radii = 4
write_trajectories = true
)");
  const ExperimentConfig cfg = parse_config(in);
  CHECK(cfg.trials == 7);
  CHECK(cfg.master_seed == 99);
  CHECK(cfg.policies == std::vector<Policy>{Policy::kSelective, Policy::kStatic});
  CHECK(!cfg.history_window.has_value());
  CHECK(cfg.geometry.region.hi == Point(200.0, 100.0));
  CHECK(cfg.geometry.dest_pos == Point(190.0, 50.0));
  CHECK(cfg.geometry.initial_positions.size() == 2);
  CHECK(cfg.geometry.initial_positions[1] == Point(100.0, 60.0));
  CHECK(cfg.geometry.max_speed == 1.5);
  CHECK(cfg.channel.shadow_power == 6.0);
  CHECK(cfg.search.radii == 4);
  CHECK(cfg.write_trajectories);
  CHECK(cfg.channel.corr_distance == 10.0);

  std::istringstream window("history_window = 5\n");
  CHECK(parse_config(window).history_window == 5);
}

TEST_CASE("config errors carry the line number") {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_config(in);
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("trials = 3\nbogus_key = 1\n").find("line 2") != std::string::npos);
  CHECK(message("trials = three\n").find("line 1") != std::string::npos);
  CHECK(!message("policies = selective, teleport\n").empty());
  CHECK(!message("no equals sign\n").empty());
  CHECK(!message("trials = 0\n").empty());
  CHECK(!message("source = 1\n").empty());
  CHECK_THROWS(load_config("/nonexistent/relaybeam.cfg"));
}
