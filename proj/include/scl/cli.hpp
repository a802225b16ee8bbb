#pragma once

#include <iosfwd>

namespace scl {

/// Entry point of the `scl` tool: subcommands sample, fit, asymvar, tradeoff
/// and chunk. Returns the process exit code.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scl
