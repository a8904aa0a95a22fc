#pragma once

#include <CLI11.hpp>

#include <functional>

namespace deepproj::cli {

/// Registers every subcommand on `app`. The callback that runs the selected
/// command is stored in `run`.
void register_commands(CLI::App& app, std::function<void()>& run);

}  // namespace deepproj::cli
