#include "aggcorr/config.hpp"

#include <fmt/format.h>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <fstream>
#include <sstream>

namespace aggcorr {

namespace pt = boost::property_tree;

namespace {

std::vector<std::string> split_list(const std::string& text, const char* seps = ",") {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(seps));
  for (auto& p : parts) boost::trim(p);
  parts.erase(std::remove_if(parts.begin(), parts.end(), [](const std::string& s) { return s.empty(); }),
              parts.end());
  return parts;
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T v{};
  in >> v;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw std::invalid_argument(fmt::format("config: key '{}' has invalid value '{}'", key, text));
  }
  return v;
}

template <>
bool parse_value<bool>(const std::string& key, const std::string& text) {
  const auto v = boost::to_lower_copy(text);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw std::invalid_argument(fmt::format("config: key '{}' has invalid value '{}'", key, text));
}

template <class T>
void read_opt(const pt::ptree& tree, const std::string& key, T& target) {
  if (auto v = tree.get_optional<std::string>(key)) target = parse_value<T>(key, boost::trim_copy(*v));
}

std::vector<int> parse_shape(const std::string& key, const std::string& text) {
  std::vector<int> shape;
  for (const auto& s : split_list(text, "x")) shape.push_back(parse_value<int>(key, s));
  if (shape.empty()) throw std::invalid_argument(fmt::format("config: key '{}' needs a shape like 20x20", key));
  return shape;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) out.push_back(parse_value<double>(key, s));
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(fmt::format("config: {}", e.what()));
  }
  static const std::vector<std::string> known = {"layout", "intra", "noise", "scenarios", "methods", "run"};
  for (const auto& [section, _] : tree) {
    if (std::find(known.begin(), known.end(), section) == known.end()) {
      throw std::invalid_argument(fmt::format("config: unknown section [{}]", section));
    }
  }

  ExperimentConfig cfg = default_experiment();
  const pt::ptree empty;
  const auto section = [&](const char* name) -> const pt::ptree& {
    auto it = tree.find(name);
    return it == tree.not_found() ? empty : it->second;
  };

  // [layout]
  {
    const auto& s = section("layout");
    std::vector<std::vector<int>> shapes = {{20, 20}, {40, 40}, {10, 10}, {10, 10}};
    std::vector<double> sigmas = {1.0, 2.0, 1.0, 1.0};
    const char* names[] = {"target_j", "target_jp", "donor_k", "donor_kp"};
    const char* sigma_keys[] = {"sigma_j", "sigma_jp", "sigma_k", "sigma_kp"};
    for (int k = 0; k < 4; ++k) {
      if (auto v = s.get_optional<std::string>(names[k])) {
        shapes[static_cast<std::size_t>(k)] = parse_shape(std::string("layout.") + names[k], *v);
      }
      read_opt(s, sigma_keys[k], sigmas[static_cast<std::size_t>(k)]);
    }
    double r = 0.6;
    read_opt(s, "r", r);
    int delta = cfg.delta;
    read_opt(section("methods"), "delta", delta);
    std::vector<double> eta = {1.0};
    if (auto v = section("noise").get_optional<std::string>("eta")) eta = parse_doubles("noise.eta", *v);
    int gap = std::max({static_cast<int>(eta.size()), delta, 2});
    read_opt(s, "gap", gap);

    bool donors = true;
    read_opt(s, "donors", donors);
    if (!donors) {
      shapes.resize(2);
      sigmas.resize(2);
      cfg.donor_k.reset();
      cfg.donor_kp.reset();
    }
    cfg.base.regions = line_layout(shapes, sigmas, gap);
    const auto J = static_cast<Eigen::Index>(shapes.size());
    cfg.base.inter_corr = Eigen::MatrixXd::Identity(J, J);
    cfg.base.inter_corr(0, 1) = cfg.base.inter_corr(1, 0) = r;
    cfg.base.noise_corr = CorrelationFunction::noise(eta);

    std::string repair = "project";
    read_opt(s, "psd_repair", repair);
    if (repair == "project") {
      cfg.base.psd_repair = PsdRepair::project;
    } else if (repair == "none") {
      cfg.base.psd_repair = PsdRepair::none;
    } else {
      throw std::invalid_argument("config: layout.psd_repair must be none or project");
    }
  }

  // [intra]
  {
    const auto& s = section("intra");
    if (auto models = s.get_optional<std::string>("models")) {
      cfg.intra_models.clear();
      for (const auto& name : split_list(*models)) {
        const auto spec = s.get_optional<std::string>(name);
        if (!spec) throw std::invalid_argument(fmt::format("config: intra model '{}' has no 'k_max, r_min' entry", name));
        const auto v = parse_doubles("intra." + name, *spec);
        if (v.size() != 2) throw std::invalid_argument(fmt::format("config: intra.{} needs 'k_max, r_min'", name));
        CorrelationFunction::intra(v[0], v[1]);  // validates
        cfg.intra_models.push_back({name, v[0], v[1]});
      }
    }
  }

  // [scenarios]
  if (auto v = section("scenarios").get_optional<std::string>("settings")) {
    cfg.noise_settings.clear();
    for (const auto& item : split_list(*v)) cfg.noise_settings.push_back(NoiseSetting::parse(item));
  }

  // [methods]
  {
    const auto& s = section("methods");
    if (auto v = s.get_optional<std::string>("list")) {
      cfg.methods.clear();
      for (const auto& item : split_list(*v)) cfg.methods.push_back(parse_method(item));
    }
    read_opt(s, "nu", cfg.nu);
    read_opt(s, "delta", cfg.delta);
    read_opt(s, "B", cfg.B);
  }

  // [run]
  {
    const auto& s = section("run");
    read_opt(s, "reps", cfg.reps);
    read_opt(s, "T", cfg.T);
    read_opt(s, "seed", cfg.master_seed);
    read_opt(s, "threads", cfg.threads);
    read_opt(s, "boxplots", cfg.boxplots);
  }

  validate(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_experiment_config(buf.str());
}

}  // namespace aggcorr
