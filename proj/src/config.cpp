#include "vvsgd/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vvsgd {

std::string experiment_kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::rate_expectation: return "rate-expectation";
    case ExperimentKind::rate_highprob: return "rate-highprob";
    case ExperimentKind::decomposition: return "decomposition";
    case ExperimentKind::lemma_audit: return "lemma-audit";
    case ExperimentKind::structured_demo: return "structured-demo";
    case ExperimentKind::pca_demo: return "pca-demo";
    case ExperimentKind::dual_vs_spectral: return "dual-vs-spectral";
  }
  throw std::logic_error("unreachable");
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "rate-expectation") return ExperimentKind::rate_expectation;
  if (name == "rate-highprob") return ExperimentKind::rate_highprob;
  if (name == "decomposition") return ExperimentKind::decomposition;
  if (name == "lemma-audit") return ExperimentKind::lemma_audit;
  if (name == "structured-demo") return ExperimentKind::structured_demo;
  if (name == "pca-demo") return ExperimentKind::pca_demo;
  if (name == "dual-vs-spectral") return ExperimentKind::dual_vs_spectral;
  throw std::invalid_argument("unknown experiment kind: " + name);
}

NoiseModel ExperimentConfig::effective_noise() const {
  if (noise) return *noise;
  return experiment == ExperimentKind::rate_highprob ? NoiseModel::bounded
                                                     : NoiseModel::gaussian;
}

std::vector<long> ExperimentConfig::effective_horizons() const {
  if (!horizons.empty()) return horizons;
  if (experiment == ExperimentKind::structured_demo) return {64, 256, 1024};
  return {256, 512, 1024, 2048, 4096, 8192};
}

int ExperimentConfig::effective_replicates() const {
  if (replicates > 0) return replicates;
  switch (experiment) {
    case ExperimentKind::rate_highprob: return 100;
    case ExperimentKind::decomposition: return 200;
    case ExperimentKind::structured_demo: return 20;
    case ExperimentKind::pca_demo: return 5;
    default: return 50;
  }
}

int ExperimentConfig::effective_trials() const {
  if (trials > 0) return trials;
  switch (experiment) {
    case ExperimentKind::decomposition: return 30;
    case ExperimentKind::lemma_audit: return 100;
    case ExperimentKind::dual_vs_spectral: return 200;
    default: return 1;
  }
}

int ExperimentConfig::effective_mc() const {
  if (mc > 0) return mc;
  return experiment == ExperimentKind::structured_demo ? 2000 : 4000;
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<long> parse_horizons(const std::string& value) {
  std::vector<long> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(std::stol(item));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::vector<std::string> problems;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "experiment") cfg.experiment = parse_experiment_kind(value);
      else if (key == "d") cfg.d = std::stoi(value);
      else if (key == "d_Y") cfg.d_y = std::stoi(value);
      else if (key == "s") cfg.s = std::stod(value);
      else if (key == "r") cfg.r = std::stod(value);
      else if (key == "sigma") cfg.sigma = std::stod(value);
      else if (key == "xi_law") {
        if (value == "rademacher") cfg.xi_law = XiLaw::rademacher;
        else if (value == "gaussian") cfg.xi_law = XiLaw::gaussian;
        else throw std::invalid_argument("xi_law must be rademacher or gaussian");
      } else if (key == "noise") {
        if (value == "gaussian") cfg.noise = NoiseModel::gaussian;
        else if (value == "bounded") cfg.noise = NoiseModel::bounded;
        else throw std::invalid_argument("noise must be gaussian or bounded");
      } else if (key == "noise_bound") cfg.noise_bound = std::stod(value);
      else if (key == "setting") {
        if (value == "online") cfg.setting = Setting::online;
        else if (value == "finite") cfg.setting = Setting::finite;
        else throw std::invalid_argument("setting must be online or finite");
      } else if (key == "target") {
        if (value == "prediction") cfg.target = Target::prediction;
        else if (value == "estimation") cfg.target = Target::estimation;
        else throw std::invalid_argument("target must be prediction or estimation");
      } else if (key == "theta1") cfg.theta1 = std::stod(value);
      else if (key == "theta2") cfg.theta2 = std::stod(value);
      else if (key == "eta_bar") cfg.eta_bar = std::stod(value);
      else if (key == "lambda_bar") cfg.lambda_bar = std::stod(value);
      else if (key == "t0") cfg.t0 = std::stod(value);
      else if (key == "theta3") cfg.theta3 = std::stod(value);
      else if (key == "theta4") cfg.theta4 = std::stod(value);
      else if (key == "eta1") cfg.eta1 = std::stod(value);
      else if (key == "lambda1") cfg.lambda1 = std::stod(value);
      else if (key == "horizons") cfg.horizons = parse_horizons(value);
      else if (key == "replicates") cfg.replicates = std::stoi(value);
      else if (key == "trials") cfg.trials = std::stoi(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "out") cfg.out = value;
      else if (key == "tolerance") cfg.tolerance = std::stod(value);
      else if (key == "quantile") cfg.quantile = std::stod(value);
      else if (key == "mc") cfg.mc = std::stoi(value);
      else if (key == "jobs") cfg.jobs = std::stoi(value);
      else if (key == "task") cfg.task = value;
      else if (key == "task_labels") {
        cfg.task_labels.clear();
        std::stringstream labels(value);
        std::string label;
        while (std::getline(labels, label, ',')) {
          label = trim(label);
          if (!label.empty()) cfg.task_labels.push_back(label);
        }
      } else if (key == "pca_data") cfg.pca_data = value;
      else if (key == "pca_rank_x") cfg.pca_rank_x = std::stoi(value);
      else if (key == "pca_rank_y") cfg.pca_rank_y = std::stoi(value);
      else problems.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    } catch (const std::exception& ex) {
      problems.push_back("line " + std::to_string(line_no) + " (" + key + "): " + ex.what());
    }
  }
  if (!problems.empty()) {
    std::string message = "invalid config:";
    for (const auto& p : problems) message += "\n  " + p;
    throw std::invalid_argument(message);
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void validate_config(const ExperimentConfig& cfg) {
  std::vector<std::string> problems;
  const auto horizons = cfg.effective_horizons();
  for (std::size_t i = 0; i + 1 < horizons.size(); ++i)
    if (horizons[i] >= horizons[i + 1]) {
      problems.push_back("horizons must be strictly increasing");
      break;
    }
  for (long h : horizons)
    if (h < 1) problems.push_back("horizons must be positive");
  if (cfg.effective_replicates() < 1) problems.push_back("replicates must be >= 1");
  if (cfg.d < 1) problems.push_back("d must be >= 1");
  if (cfg.d_y < 1) problems.push_back("d_Y must be >= 1");
  if (!(cfg.s > 0) || cfg.s > 1) problems.push_back("s must lie in (0,1]");
  if (!(cfg.r > 0)) problems.push_back("r must be positive");
  if (cfg.sigma < 0) problems.push_back("sigma must be non-negative");
  if (!(cfg.tolerance > 0)) problems.push_back("tolerance must be positive");
  if (!(cfg.quantile > 0 && cfg.quantile < 1)) problems.push_back("quantile must lie in (0,1)");
  if (cfg.jobs < 1) problems.push_back("jobs must be >= 1");
  if (cfg.task != "three-label" && cfg.task != "kendall3" && cfg.task != "hamming3" &&
      cfg.task != "inline")
    problems.push_back("task must be three-label, kendall3, hamming3, or inline");
  if (cfg.task == "inline" && cfg.task_labels.size() < 2)
    problems.push_back("inline task needs at least two task_labels");
  if (cfg.pca_rank_x < 1 || cfg.pca_rank_y < 1)
    problems.push_back("pca ranks must be >= 1");
  if (!problems.empty()) {
    std::string message = "invalid config:";
    for (const auto& p : problems) message += "\n  " + p;
    throw std::invalid_argument(message);
  }
}

}  // namespace vvsgd
