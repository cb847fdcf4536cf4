#include "anatprior/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

#include "anatprior/errors.hpp"
#include "anatprior/synthdata/volgrid.hpp"

namespace anatprior::cli {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"run.seed", "1", "master seed for every random stream"},
      {"data.height", "32", "grid rows (a multiple of 32)"},
      {"data.width", "32", "grid columns (equal to height)"},
      {"data.labels", "4", "label count including background (4)"},
      {"data.prior_count", "2000", "label maps in the prior split"},
      {"data.unsup_a_count", "2000", "modality A images"},
      {"data.unsup_b_count", "2000", "modality B images"},
      {"data.test_count", "200", "paired test items"},
      {"data.sigma_a", "0.05", "modality A noise"},
      {"data.sigma_b", "0.08", "modality B noise"},
      {"data.bias_amplitude", "0", "smooth bias field amplitude, both modalities"},
      {"model.levels", "4", "stride-2 levels in encoder and decoder"},
      {"model.features", "32", "features per level"},
      {"model.kernel", "3", "odd kernel size"},
      {"model.latent_dim", "32", "latent dimension d"},
      {"model.alpha", "1", "bounded latent activation scale"},
      {"model.prob_floor", "1e-7", "floor on decoded and location probabilities"},
      {"optimizer.rho", "0.95", "Adadelta decay"},
      {"optimizer.epsilon", "1e-6", "Adadelta stabilizer"},
      {"optimizer.learning_rate", "1", "step multiplier (0 freezes)"},
      {"optimizer.batch_size", "16", "mini-batch size"},
      {"prior.epochs", "20", "prior training epochs"},
      {"pretrain.epochs", "3", "image VAE epochs"},
      {"pretrain.recon_sigma", "0.1", "image VAE reconstruction noise"},
      {"pretrain.modality", "A", "images used for pretraining (A or B)"},
      {"unsup.epochs", "10", "unsupervised training epochs"},
      {"unsup.modality", "A", "training images (A or B)"},
      {"unsup.sigma_mode", "estimated", "estimated, per-label or fixed"},
      {"unsup.sigma", "", "comma list: L values (per-label) or one (fixed)"},
      {"unsup.train_mu", "true", "learn the per-label means"},
      {"unsup.encoder_init", "", "pretrained encoder checkpoint; empty = random"},
      {"inference.samples", "50", "latent samples for sample/uncertainty"},
      {"eval.modality", "auto", "A, B, or auto (the segmenter's training modality)"},
      {"eval.overlays", "16", "overlay images written"},
      {"paths.corpus", "corpus", "corpus directory"},
      {"paths.prior", "models/prior.ckpt", "prior checkpoint"},
      {"paths.encoder", "models/encoder.ckpt", "pretrained encoder checkpoint"},
      {"paths.segmenter", "models/segmenter.ckpt", "segmenter checkpoint"},
      {"paths.report", "report", "evaluation report directory"},
  };
  return keys;
}

Config::Config() {
  for (const ConfigKey& k : config_keys()) values_[k.key] = k.default_value;
}

void Config::load_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingInputError("config file not found: " + path.string());
  }
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  load_string(ss.str(), path.string());
}

void Config::load_string(const std::string& text, const std::string& origin) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError(origin + ": key '" + section + "' is outside any [section]");
    }
    for (const auto& [name, value] : body) {
      set(section + "." + name, value.get_value<std::string>());
    }
  }
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

void Config::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("expected section.key=value, got '" + assignment + "'");
  }
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return v;
}

}  // namespace

double Config::get_double(const std::string& key) const {
  return parse_number<double>(key, get(key));
}

std::size_t Config::get_size(const std::string& key) const {
  return parse_number<std::size_t>(key, get(key));
}

std::uint64_t Config::get_u64(const std::string& key) const {
  return parse_number<std::uint64_t>(key, get(key));
}

bool Config::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<double> Config::get_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(parse_number<double>(key, item.substr(b, e - b + 1)));
  }
  return out;
}

std::string Config::to_ini() const {
  std::ostringstream out;
  std::string section;
  for (const ConfigKey& k : config_keys()) {
    const auto dot = k.key.find('.');
    const std::string sec = k.key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << '[' << sec << "]\n";
      section = sec;
    }
    out << k.key.substr(dot + 1) << " = " << values_.at(k.key) << '\n';
  }
  return out.str();
}

void Config::write(const std::filesystem::path& path) const {
  const std::string text = to_ini();
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

}  // namespace anatprior::cli
