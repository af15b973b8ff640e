#ifndef INTONATION_COMMANDS_H
#define INTONATION_COMMANDS_H

#include <string>
#include <vector>

namespace intonation::pipeline {

inline constexpr const char* kToolVersion = "1.0.0";

/// Runs one CLI subcommand (parse, gen-data, features, train, cluster,
/// codes, synth, stats). args excludes the program name. Returns the
/// process exit status; failures print a one-line diagnostic to stderr.
int run_command(const std::vector<std::string>& args);

}  // namespace intonation::pipeline

#endif  // INTONATION_COMMANDS_H
