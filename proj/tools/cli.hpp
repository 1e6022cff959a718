#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cip::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Subcommands: synth, detect, eval, solve, features. Returns 0 on success,
/// 1 on usage or validation errors and 2 on I/O errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cip::cli
