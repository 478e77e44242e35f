#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zoo/campaign.hpp"

namespace {

zoo::CampaignConfig resolve_config(const std::string& config_path,
                                   const std::vector<std::string>& overrides) {
  zoo::CampaignConfig cfg;
  if (!config_path.empty()) cfg = zoo::load_campaign_config(config_path);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--set expects key=value, got '" + kv + "'");
    zoo::apply_config_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ZOO black-box adversarial attack toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto* train = app.add_subcommand("train", "Train the target classifier");
  train->add_option("-c,--config", config_path, "key=value config file");
  train->add_option("-s,--set", overrides, "override a config key (key=value)");

  auto* attack = app.add_subcommand("attack", "Run an attack campaign");
  attack->add_option("-c,--config", config_path, "key=value config file");
  attack->add_option("-s,--set", overrides, "override a config key (key=value)");

  std::string report_path = "out/report.json";
  auto* eval = app.add_subcommand("eval", "Summarize a campaign report");
  eval->add_option("-r,--report", report_path, "path to report.json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return zoo::cmd_train(resolve_config(config_path, overrides), std::cout);
    if (attack->parsed()) return zoo::cmd_attack(resolve_config(config_path, overrides), std::cout);
    return zoo::cmd_eval(report_path, std::cout);
  } catch (const zoo::CampaignFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
