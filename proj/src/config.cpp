#include "mfac/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace mfac {

namespace {

using Section = std::map<std::string, std::string>;
using Document = std::map<std::string, Section>;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"plant", {"name", "channels", "y2_typo_fix", "y2_denominator_fix"}},
      {"controller", {"ly", "lu", "lambda", "rho", "variant", "baseline_norm"}},
      {"estimator", {"mu", "eta", "reset_enabled", "reset_epsilon", "phi_init"}},
      {"simulation", {"horizon", "reference", "reference_value", "initial_y", "initial_u", "divergence_limit"}},
      {"output", {"dir", "svg"}},
  };
  return keys;
}

bool is_coefficient_key(const std::string& key) {
  static const std::regex pattern("[ab][1-9][0-9]*");
  return std::regex_match(key, pattern);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

Document tokenize(std::string_view text) {
  Document doc;
  std::string current;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(std::string_view(raw).substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto where = " (line " + std::to_string(line_no) + ")";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header" + where);
      current = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known_keys().contains(current)) throw ConfigError("unknown section [" + current + "]" + where);
      if (doc.contains(current)) throw ConfigError("duplicate section [" + current + "]" + where);
      doc[current];
      continue;
    }
    if (current.empty()) throw ConfigError("key outside any section" + where);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value" + where);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const bool known = known_keys().at(current).contains(key) || (current == "plant" && is_coefficient_key(key));
    if (!known) throw ConfigError("unknown key '" + key + "' in [" + current + "]" + where);
    if (!doc[current].emplace(key, value).second) throw ConfigError("duplicate key '" + key + "'" + where);
  }
  return doc;
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(what + ": not a number: '" + text + "'");
  return v;
}

Index parse_index(const std::string& text, const std::string& what) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(what + ": not an integer: '" + text + "'");
  return static_cast<Index>(v);
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ConfigError(what + ": expected true or false, got '" + text + "'");
}

VectorXd parse_vector(const std::string& text, const std::string& what) {
  const auto parts = split(text, ',');
  VectorXd v(static_cast<Index>(parts.size()));
  for (std::size_t k = 0; k < parts.size(); ++k) v(static_cast<Index>(k)) = parse_double(parts[k], what);
  return v;
}

std::vector<VectorXd> parse_vector_list(const std::string& text, const std::string& what) {
  std::vector<VectorXd> out;
  if (text.empty()) return out;
  for (const auto& row : split(text, ';')) out.push_back(parse_vector(row, what));
  return out;
}

MatrixXd parse_matrix(const std::string& text, const std::string& what) {
  const auto rows = parse_vector_list(text, what);
  if (rows.empty()) throw ConfigError(what + ": empty matrix");
  MatrixXd mat(static_cast<Index>(rows.size()), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != mat.cols()) throw ConfigError(what + ": ragged matrix rows");
    mat.row(static_cast<Index>(r)) = rows[r].transpose();
  }
  return mat;
}

std::string vector_text(const VectorXd& v) {
  std::string out;
  for (Index k = 0; k < v.size(); ++k) {
    if (k) out += ", ";
    out += format_shortest(v(k));
  }
  return out;
}

std::string matrix_text(const MatrixXd& mat) {
  std::string out;
  for (Index r = 0; r < mat.rows(); ++r) {
    if (r) out += "; ";
    out += vector_text(mat.row(r).transpose());
  }
  return out;
}

std::string vector_list_text(const std::vector<VectorXd>& list) {
  std::string out;
  for (std::size_t k = 0; k < list.size(); ++k) {
    if (k) out += "; ";
    out += vector_text(list[k]);
  }
  return out;
}

class SectionReader {
 public:
  SectionReader(const Document& doc, std::string name) : name_(std::move(name)) {
    if (const auto it = doc.find(name_); it != doc.end()) section_ = &it->second;
  }

  const std::string* find(const std::string& key) const {
    if (!section_) return nullptr;
    const auto it = section_->find(key);
    return it == section_->end() ? nullptr : &it->second;
  }

  const std::string& require(const std::string& key) const {
    const auto* v = find(key);
    if (!v) throw ConfigError("missing key '" + key + "' in [" + name_ + "]");
    return *v;
  }

  std::string label(const std::string& key) const { return name_ + "." + key; }

 private:
  std::string name_;
  const Section* section_ = nullptr;
};

std::vector<MatrixXd> coefficient_list(const SectionReader& plant, char letter) {
  std::vector<MatrixXd> out;
  for (int k = 1;; ++k) {
    const std::string key = std::string(1, letter) + std::to_string(k);
    const auto* text = plant.find(key);
    if (!text) break;
    out.push_back(parse_matrix(*text, plant.label(key)));
  }
  return out;
}

ExperimentConfig build(const Document& doc) {
  ExperimentConfig cfg;
  LoopConfig& loop = cfg.loop;

  const SectionReader plant(doc, "plant");
  const std::string& name = plant.require("name");
  if (name == "benchmark10") {
    loop.plant.kind = PlantKind::benchmark10;
    loop.plant.channels = 2;
    if (const auto* v = plant.find("y2_typo_fix")) loop.plant.benchmark.y2_typo_fix = parse_bool(*v, plant.label("y2_typo_fix"));
    if (const auto* v = plant.find("y2_denominator_fix")) {
      loop.plant.benchmark.y2_denominator_fix = parse_bool(*v, plant.label("y2_denominator_fix"));
    }
    if (plant.find("a1") || plant.find("b1")) throw ConfigError("plant.a*/b* apply to the lti plant only");
  } else if (name == "lti") {
    loop.plant.kind = PlantKind::lti;
    if (plant.find("y2_typo_fix") || plant.find("y2_denominator_fix")) {
      throw ConfigError("plant.y2_* flags apply to benchmark10 only");
    }
    loop.plant.a = coefficient_list(plant, 'a');
    loop.plant.b = coefficient_list(plant, 'b');
    if (loop.plant.b.empty()) throw ConfigError("lti plant needs b1");
    loop.plant.channels = loop.plant.b.front().rows();
  } else {
    throw ConfigError("plant.name must be benchmark10 or lti, got '" + name + "'");
  }
  if (const auto* v = plant.find("channels")) {
    if (parse_index(*v, plant.label("channels")) != loop.plant.channels) {
      throw ConfigError("plant.channels disagrees with the plant definition");
    }
  }

  const SectionReader ctrl(doc, "controller");
  try {
    loop.dims = Dimensions(loop.plant.channels, parse_index(ctrl.require("ly"), "controller.ly"),
                           parse_index(ctrl.require("lu"), "controller.lu"));
  } catch (const DimensionError& e) {
    throw ConfigError(e.what());
  }
  loop.controller.lambda = parse_double(ctrl.require("lambda"), "controller.lambda");
  const VectorXd rho = parse_vector(ctrl.require("rho"), "controller.rho");
  loop.controller.rho.assign(rho.data(), rho.data() + rho.size());
  if (const auto* v = ctrl.find("variant")) {
    if (*v == "proposed") loop.controller.variant = ControlLaw::proposed;
    else if (*v == "baseline") loop.controller.variant = ControlLaw::baseline;
    else throw ConfigError("controller.variant must be proposed or baseline");
  }
  if (const auto* v = ctrl.find("baseline_norm")) {
    if (*v == "spectral") loop.controller.baseline_norm = GainNorm::spectral;
    else if (*v == "frobenius") loop.controller.baseline_norm = GainNorm::frobenius;
    else throw ConfigError("controller.baseline_norm must be spectral or frobenius");
  }

  const SectionReader est(doc, "estimator");
  if (const auto* v = est.find("mu")) loop.estimator.mu = parse_double(*v, "estimator.mu");
  if (const auto* v = est.find("eta")) loop.estimator.eta = parse_double(*v, "estimator.eta");
  if (const auto* v = est.find("reset_enabled")) loop.estimator.reset_enabled = parse_bool(*v, "estimator.reset_enabled");
  if (const auto* v = est.find("reset_epsilon")) loop.estimator.reset_epsilon = parse_double(*v, "estimator.reset_epsilon");
  const MatrixXd phi_init = parse_matrix(est.require("phi_init"), "estimator.phi_init");
  if (phi_init.rows() != loop.dims.m || phi_init.cols() != loop.dims.regressor_size()) {
    throw ConfigError("estimator.phi_init must be m x m(ly+lu)");
  }
  loop.estimator.phi_init = Pjm<double>(loop.dims, phi_init);

  const SectionReader sim(doc, "simulation");
  if (const auto* v = sim.find("horizon")) loop.horizon = parse_index(*v, "simulation.horizon");
  if (const auto* v = sim.find("divergence_limit")) loop.divergence_limit = parse_double(*v, "simulation.divergence_limit");
  const std::string reference = sim.find("reference") ? *sim.find("reference") : "benchmark";
  if (reference == "benchmark") {
    loop.reference.kind = ReferenceKind::benchmark;
    if (sim.find("reference_value")) throw ConfigError("simulation.reference_value needs reference = constant");
  } else if (reference == "constant") {
    loop.reference.kind = ReferenceKind::constant;
    loop.reference.value = parse_vector(sim.require("reference_value"), "simulation.reference_value");
  } else {
    throw ConfigError("simulation.reference must be benchmark or constant");
  }
  if (const auto* v = sim.find("initial_y")) {
    loop.initial_y = parse_vector_list(*v, "simulation.initial_y");
  } else if (loop.plant.kind == PlantKind::benchmark10) {
    loop.initial_y = Benchmark10<double>::initial_outputs();
  } else {
    loop.initial_y = {VectorXd::Zero(loop.dims.m)};
  }
  if (const auto* v = sim.find("initial_u")) {
    loop.initial_u = parse_vector_list(*v, "simulation.initial_u");
  } else if (loop.plant.kind == PlantKind::benchmark10 && !sim.find("initial_y")) {
    loop.initial_u = Benchmark10<double>::initial_inputs();
  } else {
    loop.initial_u.assign(loop.initial_y.size() - 1, VectorXd::Zero(loop.dims.m));
  }

  const SectionReader out(doc, "output");
  if (const auto* v = out.find("dir")) cfg.output.dir = *v;
  if (const auto* v = out.find("svg")) cfg.output.svg = parse_bool(*v, "output.svg");

  try {
    loop.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

}  // namespace

std::string format_shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_17g(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

ExperimentConfig parse_config(std::string_view text) {
  return build(tokenize(text));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  const LoopConfig& loop = cfg.loop;
  std::ostringstream out;
  const auto flag = [](bool b) { return b ? "true" : "false"; };

  out << "[plant]\n";
  if (loop.plant.kind == PlantKind::benchmark10) {
    out << "name = benchmark10\n"
        << "channels = " << loop.plant.channels << "\n"
        << "y2_typo_fix = " << flag(loop.plant.benchmark.y2_typo_fix) << "\n"
        << "y2_denominator_fix = " << flag(loop.plant.benchmark.y2_denominator_fix) << "\n";
  } else {
    out << "name = lti\n"
        << "channels = " << loop.plant.channels << "\n";
    for (std::size_t k = 0; k < loop.plant.a.size(); ++k) out << "a" << k + 1 << " = " << matrix_text(loop.plant.a[k]) << "\n";
    for (std::size_t k = 0; k < loop.plant.b.size(); ++k) out << "b" << k + 1 << " = " << matrix_text(loop.plant.b[k]) << "\n";
  }

  VectorXd rho(static_cast<Index>(loop.controller.rho.size()));
  for (std::size_t k = 0; k < loop.controller.rho.size(); ++k) rho(static_cast<Index>(k)) = loop.controller.rho[k];
  out << "\n[controller]\n"
      << "ly = " << loop.dims.ly << "\n"
      << "lu = " << loop.dims.lu << "\n"
      << "lambda = " << format_shortest(loop.controller.lambda) << "\n"
      << "rho = " << vector_text(rho) << "\n"
      << "variant = " << (loop.controller.variant == ControlLaw::proposed ? "proposed" : "baseline") << "\n"
      << "baseline_norm = " << (loop.controller.baseline_norm == GainNorm::spectral ? "spectral" : "frobenius") << "\n";

  out << "\n[estimator]\n"
      << "mu = " << format_shortest(loop.estimator.mu) << "\n"
      << "eta = " << format_shortest(loop.estimator.eta) << "\n"
      << "reset_enabled = " << flag(loop.estimator.reset_enabled) << "\n"
      << "reset_epsilon = " << format_shortest(loop.estimator.reset_epsilon) << "\n"
      << "phi_init = " << matrix_text(loop.estimator.phi_init.flat()) << "\n";

  out << "\n[simulation]\n"
      << "horizon = " << loop.horizon << "\n";
  if (loop.reference.kind == ReferenceKind::benchmark) {
    out << "reference = benchmark\n";
  } else {
    out << "reference = constant\n"
        << "reference_value = " << vector_text(loop.reference.value) << "\n";
  }
  out << "initial_y = " << vector_list_text(loop.initial_y) << "\n"
      << "initial_u =" << (loop.initial_u.empty() ? "" : " " + vector_list_text(loop.initial_u)) << "\n"
      << "divergence_limit = " << format_shortest(loop.divergence_limit) << "\n";

  out << "\n[output]\n"
      << "dir = " << cfg.output.dir << "\n"
      << "svg = " << flag(cfg.output.svg) << "\n";
  return out.str();
}

namespace {

constexpr std::string_view example1_text = R"([plant]
name = benchmark10
channels = 2
y2_typo_fix = false
y2_denominator_fix = false

[controller]
ly = 1
lu = 3
lambda = 1
rho = 0.5, 0.5, 0.5, 0.5
variant = proposed
baseline_norm = spectral

[estimator]
mu = 1
eta = 0.5
reset_enabled = true
reset_epsilon = 1e-05
phi_init = 0, 0, 0.1, 0, 0, 0, 0, 0; 0, 0, 0, 0.1, 0, 0, 0, 0

[simulation]
horizon = 1000
reference = benchmark
initial_y = 0, 0; 1, 1; 0, 0
initial_u = 1, 1; 1, 0
divergence_limit = 1e+09

[output]
dir = out
svg = false
)";

constexpr std::string_view lti_text = R"([plant]
name = lti
channels = 1
a1 = 0.5
b1 = 1

[controller]
ly = 1
lu = 1
lambda = 1
rho = 0.5, 0.5
variant = proposed
baseline_norm = spectral

[estimator]
mu = 1
eta = 0.5
reset_enabled = true
reset_epsilon = 1e-05
phi_init = 0.2, 0.5

[simulation]
horizon = 1000
reference = constant
reference_value = 1
initial_y = 0
initial_u =
divergence_limit = 1e+09

[output]
dir = out
svg = false
)";

constexpr std::string_view identity_text = R"([plant]
name = lti
channels = 1
b1 = 1

[controller]
ly = 1
lu = 1
lambda = 1
rho = 0.5, 0.5
variant = proposed
baseline_norm = spectral

[estimator]
mu = 1
eta = 0.5
reset_enabled = true
reset_epsilon = 1e-05
phi_init = 0, 1

[simulation]
horizon = 200
reference = constant
reference_value = 1
initial_y = 0
initial_u =
divergence_limit = 1e+09

[output]
dir = out
svg = false
)";

}  // namespace

std::string_view preset_text(std::string_view name) {
  if (name == "example1") return example1_text;
  if (name == "lti") return lti_text;
  if (name == "identity") return identity_text;
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

ExperimentConfig preset(std::string_view name) { return parse_config(preset_text(name)); }

}  // namespace mfac
