#pragma once

namespace divrate {

/// Entry point shared by the CLI binary and the CLI tests.
/// Subcommands: estimate, bench, remez, construct.
/// Exit codes: 0 success, 1 runtime error, 2 usage error.
/// DIVRATE_SEED (decimal 64-bit) supplies the default seed.
int cli_main(int argc, const char* const* argv);

} // namespace divrate
