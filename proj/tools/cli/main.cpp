#include "commands.hpp"
#include "support.hpp"

#include <algorithm>
#include <iostream>

int main(int argc, char** argv) {
  using namespace deepproj;

  CLI::App app{"Learned 2D projections of high-dimensional data", "deepproj"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config;
  app.add_option("--config", config, "key=value file mirroring long flags; explicit flags win");

  std::function<void()> run;
  cli::register_commands(app, run);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // Config entries go right after the subcommand name, so later flags override them.
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) {
        path = args[i + 1];
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      } else if (args[i].rfind("--config=", 0) == 0) {
        path = args[i].substr(9);
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        continue;
      }
      const auto extra = cli::config_arguments(path);
      const auto sub = std::find_if(args.begin(), args.end(), [&](const std::string& a) { return app.get_subcommand_no_throw(a) != nullptr; });
      if (sub == args.end()) throw ParameterError("--config needs a subcommand");
      args.insert(sub + 1, extra.begin(), extra.end());
      break;
    }
  } catch (const std::exception& e) {
    std::cerr << "deepproj: error: " << e.what() << '\n';
    return 1;
  }

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    run();
  } catch (const ParseError& e) {
    std::cerr << "deepproj: parse error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "deepproj: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
