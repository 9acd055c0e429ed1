#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ipslab/cli_io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ips-lab: interacting particle system experiments"};
  app.require_subcommand(1);

  std::string config_file, out_dir = ".";
  long seed = -1;
  std::vector<std::string> overrides;
  const std::map<std::string, std::string> about{
      {"verify", "exact identities and solver self-checks"},
      {"contact", "contact process occupation counts"},
      {"braco", "branching-coalescing particle mass"},
      {"resem", "resampling-selection model mass"},
      {"dualitytest", "Monte-Carlo duality and Poissonization tests"},
      {"renorm", "iterated log-Laplace renormalization"},
      {"flow", "matrix diffusion flow toward its fixed points"},
      {"pstar", "p* boundary value problem by shooting"},
      {"cauchy", "log-Laplace Cauchy problem"},
  };
  for (const auto& name : ipslab::subcommands()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", config_file, "key=value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("overrides", overrides, "extra key=value settings");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const auto keys = ipslab::subcommand_keys(name);
    auto cfg = config_file.empty() ? ipslab::Config(keys) : ipslab::Config::load(config_file, keys);
    for (const auto& kv : overrides) cfg.assign(kv);
    if (seed >= 0) cfg.set("seed", std::to_string(seed));
    ipslab::RunOptions opt;
    opt.out_dir = out_dir;
    opt.log = &std::cout;
    bool ok = true;
    for (const auto& r : ipslab::run(name, cfg, opt)) ok = ok && r.passed();
    std::cout << (ok ? "all verdicts pass" : "some verdicts fail") << "\n";
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "ips-lab " << name << ": " << e.what() << "\n";
    return 2;
  }
}
