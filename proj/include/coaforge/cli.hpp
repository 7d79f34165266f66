#pragma once

#include <iosfwd>
#include <string>

namespace coaforge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitPipeline = 3;

/// The coaforge command line:
///   plan <scenario> <opord> [--k N] [--replications N] [--seed N]
///        [--weights w1,w2,w3,w4,w5] [--out report.json|report.txt] [--layers-out dir/]
///   serve [--host H] [--port P] [--data dir/]
/// The two plan inputs may come in either order. COAFORGE_DATA names the
/// session directory when --data is not given.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Which kind of document a plan argument holds: "scenario", "opord" or ""
/// when neither the extension nor the content decides.
std::string classify_input(const std::string& path, const std::string& content);

} // namespace coaforge
