#pragma once

#include <string>
#include <vector>

namespace hanforge::cli {

inline constexpr const char* kVersion = "0.1.0";

// Subcommands: build-vocab, train, evaluate, predict, baseline, visualize,
// synth. Exit 0 on success, 1 on validation/usage errors, 2 on runtime
// failures. Every run writes a run_manifest.json (config echo + seed +
// version) into its output directory.
int dispatch(const std::vector<std::string>& args);

// Worker count for per-article scoring: the requested value clamped by the
// HANFORGE_THREADS environment variable (when set) and by >= 1.
std::size_t resolve_threads(std::size_t requested);

}  // namespace hanforge::cli
