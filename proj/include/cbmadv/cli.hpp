#pragma once

namespace cbmadv {

// Entry point behind the `cbmadv` binary, exposed so tests can drive the CLI
// in-process. Exit codes: 0 success, 2 usage/config error, 3 no victim passed
// the cross-validation gate, 4 numerical failure.
int cli_main(int argc, const char* const* argv);

}  // namespace cbmadv
