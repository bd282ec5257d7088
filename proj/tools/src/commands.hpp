#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qsplit/error.hpp"

namespace qsplit::cli {

/// 0 ok, 1 verification failed, 2 input error, 3 non-unimodular q,
/// 4 precondition failure, 5 doubly-commutation violation, 6 internal error.
int exit_code(ErrorKind kind);

/// Runs one command line (without the program name) and returns its exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qsplit::cli
