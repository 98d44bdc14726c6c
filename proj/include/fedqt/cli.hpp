// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>

namespace fedqt::cli {

/// Entry point shared by the installed binary and the tests. Parses argv,
/// runs the selected subcommand (synth | params | train | sweep), and
/// reports through the supplied streams. Returns 0 on success, 1 on
/// usage or configuration errors, 2 on runtime failures.
int run_cli(int argc, const char *const *argv, std::ostream &out,
            std::ostream &err);

} // namespace fedqt::cli
