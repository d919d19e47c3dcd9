#pragma once

#include <string>
#include <vector>

namespace claimgraph::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_data = 2;

/// Parses argv, runs exactly one subcommand, returns the process exit code.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

/// Self-contained HTML page with the two histograms drawn as inline SVG.
std::string render_histogram_html(const std::string& histogram_json, const std::string& title);

}  // namespace claimgraph::cli
