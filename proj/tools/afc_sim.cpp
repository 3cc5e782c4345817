#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "afc/afc.hpp"

namespace {

using afc::config::json;

json load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw afc::config::ConfigError({{path, std::string("invalid JSON: ") + e.what(), ""}});
  }
}

void print_issues(const afc::config::ConfigError& e) {
  for (const auto& i : e.issues()) {
    std::cerr << "error: " << (i.path.empty() ? "<root>" : i.path) << ": " << i.message;
    if (!i.hint.empty()) std::cerr << " (hint: " << i.hint << ")";
    std::cerr << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cavity-enhanced atomic frequency comb memory simulator"};
  app.require_subcommand(1);

  std::string config_path, preset, scenario, out_dir, in_dir;
  std::optional<int> modes;
  std::optional<double> lifetime;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "run one scenario and write its artifacts");
  auto* cfg_opt = run->add_option("--config", config_path, "JSON scenario file")->check(CLI::ExistingFile);
  run->add_option("--preset", preset, "device preset")->check(CLI::IsMember(afc::config::preset_names()));
  run->add_option("--scenario", scenario, "scenario kind")->check(CLI::IsMember(afc::config::scenario_kinds()));
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--modes", modes, "number of temporal modes");
  run->add_option("--afc-lifetime", lifetime, "effective AFC lifetime in seconds");
  run->add_option("--threads", threads, "worker threads for sweeps (0 = all cores)");

  auto* validate = app.add_subcommand("validate", "check a scenario file");
  validate->add_option("--config", config_path, "JSON scenario file")->check(CLI::ExistingFile);
  validate->add_option("--preset", preset, "device preset")->check(CLI::IsMember(afc::config::preset_names()));

  auto* report = app.add_subcommand("report", "summarize result.json files");
  report->add_option("--in", in_dir, "directory to scan")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*report) {
      std::cout << afc::scenario::report(in_dir);
      return 0;
    }
    json doc = json::object();
    if (!config_path.empty()) doc = load(config_path);
    if (!preset.empty()) doc["preset"] = preset;
    if (config_path.empty() && preset.empty()) {
      std::cerr << "error: give --config or --preset\n";
      return 2;
    }
    if (*run) {
      if (!scenario.empty()) doc["scenario"] = scenario;
      if (!cfg_opt->count() && !doc.contains("output_dir"))
        doc["output_dir"] = "afc-out/" + preset + "-" + doc.value("scenario", std::string("storage"));
    }
    auto cfg = afc::config::from_json(doc);
    if (*validate) {
      const auto issues = afc::config::validate(cfg);
      if (!issues.empty()) throw afc::config::ConfigError(issues);
      std::cout << "valid\n";
      return 0;
    }
    afc::scenario::RunOptions opt;
    opt.modes = modes;
    opt.afc_lifetime_s = lifetime;
    if (!out_dir.empty()) opt.output_dir = out_dir;
    opt.threads = threads;
    const auto outcome = afc::scenario::run(cfg, opt);
    for (const auto& w : outcome.result["checks"]["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
    for (const auto& f : outcome.files) std::cout << f.generic_string() << '\n';
    return 0;
  } catch (const afc::config::ConfigError& e) {
    print_issues(e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
