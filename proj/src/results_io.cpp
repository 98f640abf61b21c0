#include "relaybeam/results_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace relaybeam {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

nlohmann::json point_json(const Point& p) { return nlohmann::json::array({p.x(), p.y()}); }

template <typename Fn>
void write_file(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write output file '" + path + "'");
  fn(out);
  out.flush();
  if (!out) throw std::runtime_error("failed while writing output file '" + path + "'");
}

}  // namespace

void write_slot_csv(std::ostream& out, const std::vector<SlotRecord>& records) {
  out << kSlotCsvHeader << '\n';
  for (const auto& rec : records) {
    for (std::size_t i = 0; i < rec.positions.size(); ++i) {
      out << rec.trial << ',' << rec.slot << ',' << policy_name(rec.policy) << ',' << (i + 1) << ','
          << fmt17(rec.positions[i].x()) << ',' << fmt17(rec.positions[i].y()) << ','
          << fmt17(rec.value_V) << ',' << fmt17(rec.relay_power) << ',' << fmt17(rec.sinr) << ','
          << (rec.feasible ? 1 : 0) << ',' << rec.chosen_relay << ',' << fmt17(rec.best_E) << '\n';
    }
  }
}

std::vector<SlotRecord> read_slot_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSlotCsvHeader) {
    throw std::invalid_argument("slot CSV: missing or unexpected header");
  }
  std::vector<SlotRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 12) {
      throw std::invalid_argument("slot CSV line " + std::to_string(line_no) + ": expected 12 fields");
    }
    const int trial = std::stoi(cells[0]);
    const int slot = std::stoi(cells[1]);
    const Policy policy = parse_policy(cells[2]);
    const int relay = std::stoi(cells[3]);
    const Point pos{std::stod(cells[4]), std::stod(cells[5])};

    const bool continues = !out.empty() && out.back().trial == trial && out.back().slot == slot &&
                           out.back().policy == policy;
    if (!continues) {
      if (relay != 1) {
        throw std::invalid_argument("slot CSV line " + std::to_string(line_no) +
                                    ": record must start at relay 1");
      }
      SlotRecord rec;
      rec.trial = trial;
      rec.slot = slot;
      rec.policy = policy;
      rec.value_V = std::stod(cells[6]);
      rec.relay_power = std::stod(cells[7]);
      rec.sinr = std::stod(cells[8]);
      rec.feasible = cells[9] == "1";
      rec.chosen_relay = std::stoi(cells[10]);
      rec.best_E = std::stod(cells[11]);
      out.push_back(std::move(rec));
    } else if (relay != static_cast<int>(out.back().positions.size()) + 1) {
      throw std::invalid_argument("slot CSV line " + std::to_string(line_no) +
                                  ": relay rows out of order");
    }
    out.back().positions.push_back(pos);
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const std::vector<SlotRecord>& records) {
  out << "trial,policy,slot,relay,x,y,target_x,target_y,vx,vy\n";
  for (const auto& rec : records) {
    for (std::size_t i = 0; i < rec.positions.size(); ++i) {
      const Point target = i < rec.targets.size() ? rec.targets[i] : rec.positions[i];
      const Eigen::Vector2d vel =
          i < rec.velocities.size() ? rec.velocities[i] : Eigen::Vector2d::Zero();
      out << rec.trial << ',' << policy_name(rec.policy) << ',' << rec.slot << ',' << (i + 1) << ','
          << fmt17(rec.positions[i].x()) << ',' << fmt17(rec.positions[i].y()) << ','
          << fmt17(target.x()) << ',' << fmt17(target.y()) << ',' << fmt17(vel.x()) << ','
          << fmt17(vel.y()) << '\n';
    }
  }
}

void write_summary_json(std::ostream& out, const ExperimentConfig& config,
                        const ExperimentResult& result) {
  using nlohmann::json;
  const ChannelParams& ch = config.channel;
  const NetworkGeometry& geo = config.geometry;

  json initial = json::array();
  for (const auto& p : geo.initial_positions) initial.push_back(point_json(p));
  json policies = json::array();
  for (Policy p : config.policies) policies.push_back(std::string(policy_name(p)));

  json doc;
  doc["config"] = {
      {"channel",
       {{"path_loss_exponent", ch.path_loss_exponent},
        {"wavelength", ch.wavelength},
        {"shadow_power", ch.shadow_power},
        {"corr_distance", ch.corr_distance},
        {"corr_time", ch.corr_time},
        {"bs_correlation", ch.bs_correlation},
        {"fading_var", ch.fading_var},
        {"fading_mean_db", ch.fading_mean_db},
        {"relay_noise_power", ch.relay_noise_power},
        {"dest_noise_power", ch.dest_noise_power},
        {"source_power", ch.source_power},
        {"sinr_threshold", ch.sinr_threshold}}},
      {"geometry",
       {{"region", {geo.region.lo.x(), geo.region.lo.y(), geo.region.hi.x(), geo.region.hi.y()}},
        {"source", point_json(geo.source_pos)},
        {"destination", point_json(geo.dest_pos)},
        {"num_relays", geo.num_relays},
        {"initial_positions", initial},
        {"num_slots", geo.num_slots},
        {"slot_move_interval", geo.slot_move_interval},
        {"max_speed", geo.max_speed}}},
      {"policies", policies},
      {"trials", config.trials},
      {"master_seed", config.master_seed},
      {"history_window", config.history_window ? json(*config.history_window) : json("inf")},
      {"search",
       {{"radii", config.search.radii},
        {"angles", config.search.angles},
        {"refine_rounds", config.search.refine_rounds},
        {"shrink", config.search.shrink}}},
  };

  json aggregates = json::array();
  for (const auto& agg : result.aggregates) {
    aggregates.push_back({{"policy", std::string(policy_name(agg.policy))},
                          {"slots", agg.slots},
                          {"mean_value_V", agg.mean_value_V},
                          {"mean_relay_power_feasible", agg.mean_relay_power},
                          {"feasibility_rate", agg.feasibility_rate},
                          {"mean_best_E", agg.mean_best_E},
                          {"failed_trials", agg.failed_trials}});
  }
  doc["aggregates"] = aggregates;

  json checks = json::array();
  for (const auto& c : result.jensen_checks) {
    checks.push_back({{"policy", std::string(policy_name(c.policy))},
                      {"trial", c.trial},
                      {"slot", c.slot},
                      {"relaxed", c.relaxed},
                      {"mc_mean", c.mc_mean},
                      {"mc_stderr", c.mc_stderr},
                      {"pass", c.pass}});
  }
  doc["jensen_checks"] = checks;

  json failures = json::array();
  for (const auto& f : result.failures) {
    failures.push_back({{"policy", std::string(policy_name(f.policy))},
                        {"trial", f.trial},
                        {"message", f.message}});
  }
  doc["failures"] = failures;
  out << doc.dump(2) << '\n';
}

OutputPaths default_output_paths(const std::string& dir, bool trajectories) {
  const std::filesystem::path base(dir);
  OutputPaths paths;
  paths.slots_csv = (base / "slots.csv").string();
  paths.summary_json = (base / "summary.json").string();
  if (trajectories) paths.trajectories_csv = (base / "trajectories.csv").string();
  return paths;
}

void emit_results(const ExperimentConfig& config, const ExperimentResult& result,
                  const OutputPaths& paths) {
  for (const auto& p : {paths.slots_csv, paths.summary_json, paths.trajectories_csv}) {
    if (p.empty()) continue;
    const auto parent = std::filesystem::path(p).parent_path();
    if (parent.empty()) continue;
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + parent.string() + "'");
  }
  write_file(paths.slots_csv, [&](std::ostream& out) { write_slot_csv(out, result.records); });
  write_file(paths.summary_json,
             [&](std::ostream& out) { write_summary_json(out, config, result); });
  if (!paths.trajectories_csv.empty()) {
    write_file(paths.trajectories_csv,
               [&](std::ostream& out) { write_trajectory_csv(out, result.records); });
  }
}

}  // namespace relaybeam
