#pragma once

#include <string>
#include <vector>

namespace ocft::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kVerificationFailed = 3 };

struct Outcome {
    int exit_code = kOk;
    std::string out;  // serialized result (stdout)
    std::string err;  // diagnostics and usage (stderr)
};

/// Runs one command line; args excludes the program name.
Outcome run(const std::vector<std::string>& args);

/// "re,im" or "x" (imaginary part 0).
bool parse_complex(const std::string& text, double& re, double& im);

}  // namespace ocft::cli
