// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace ledgerwatch::cli {

enum ExitCode : int {
  kOk = 0,
  kIoFailure = 1,
  kBadArguments = 2,
  kHighFinding = 3,
};

/// Runs the command line; output goes to the given streams instead of stdout/stderr.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ledgerwatch::cli
