#include "relaybeam/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <stdexcept>
#include <string_view>

namespace relaybeam {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

double to_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

template <typename Int>
Int to_int(std::string_view s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

bool to_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + std::string(s) + "'");
}

std::vector<double> numbers(std::string_view s, std::size_t expected) {
  std::vector<double> out;
  for (auto part : split(s, ',')) out.push_back(to_double(part));
  if (out.size() != expected) {
    throw std::invalid_argument("expected " + std::to_string(expected) + " comma-separated numbers");
  }
  return out;
}

Point point(std::string_view s) {
  const auto v = numbers(s, 2);
  return {v[0], v[1]};
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  bool relays_given = false;
  bool positions_given = false;

  using Setter = std::function<void(std::string_view)>;
  auto real = [](double& field) { return Setter([&field](std::string_view v) { field = to_double(v); }); };
  auto integer = [](int& field) { return Setter([&field](std::string_view v) { field = to_int<int>(v); }); };
  ChannelParams& ch = cfg.channel;
  NetworkGeometry& geo = cfg.geometry;

  const std::map<std::string, Setter, std::less<>> setters{
      {"path_loss_exponent", real(ch.path_loss_exponent)},
      {"wavelength", real(ch.wavelength)},
      {"shadow_power", real(ch.shadow_power)},
      {"corr_distance", real(ch.corr_distance)},
      {"corr_time", real(ch.corr_time)},
      {"bs_correlation", real(ch.bs_correlation)},
      {"fading_var", real(ch.fading_var)},
      {"fading_mean_db", real(ch.fading_mean_db)},
      {"relay_noise_power", real(ch.relay_noise_power)},
      {"dest_noise_power", real(ch.dest_noise_power)},
      {"source_power", real(ch.source_power)},
      {"sinr_threshold", real(ch.sinr_threshold)},
      {"region",
       [&](std::string_view v) {
         const auto n = numbers(v, 4);
         geo.region = Rect{{n[0], n[1]}, {n[2], n[3]}};
       }},
      {"source", [&](std::string_view v) { geo.source_pos = point(v); }},
      {"destination", [&](std::string_view v) { geo.dest_pos = point(v); }},
      {"num_relays",
       [&](std::string_view v) {
         geo.num_relays = to_int<int>(v);
         relays_given = true;
       }},
      {"initial_positions",
       [&](std::string_view v) {
         geo.initial_positions.clear();
         for (auto part : split(v, ';')) {
           if (!part.empty()) geo.initial_positions.push_back(point(part));
         }
         positions_given = true;
       }},
      {"num_slots", integer(geo.num_slots)},
      {"slot_move_interval", real(geo.slot_move_interval)},
      {"max_speed", real(geo.max_speed)},
      {"policies",
       [&](std::string_view v) {
         cfg.policies.clear();
         for (auto part : split(v, ',')) cfg.policies.push_back(parse_policy(part));
       }},
      {"trials", integer(cfg.trials)},
      {"master_seed", [&](std::string_view v) { cfg.master_seed = to_int<std::uint64_t>(v); }},
      {"history_window",
       [&](std::string_view v) {
         if (v == "inf" || v == "none") {
           cfg.history_window.reset();
         } else {
           cfg.history_window = to_int<int>(v);
         }
       }},
      {"search_radii", integer(cfg.search.radii)},
      {"search_angles", integer(cfg.search.angles)},
      {"refine_rounds", integer(cfg.search.refine_rounds)},
      {"search_shrink", real(cfg.search.shrink)},
      {"output_dir", [&](std::string_view v) { cfg.output_dir = std::string(v); }},
      {"write_trajectories", [&](std::string_view v) { cfg.write_trajectories = to_bool(v); }},
      {"threads", [&](std::string_view v) { cfg.threads = to_int<unsigned>(v); }},
      {"debug_jensen", [&](std::string_view v) { cfg.debug_jensen = to_bool(v); }},
      {"jensen_trials", integer(cfg.jensen_trials)},
      {"jensen_slots", integer(cfg.jensen_slots)},
      {"jensen_samples", integer(cfg.jensen_samples)},
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" +
                                  std::string(key) + "'");
    }
    try {
      it->second(value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + " (" +
                                  std::string(key) + "): " + e.what());
    }
  }

  if (positions_given && !relays_given) {
    geo.num_relays = static_cast<int>(geo.initial_positions.size());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace relaybeam
