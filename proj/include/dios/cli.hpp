#pragma once

#include <string>
#include <vector>

namespace dios {

/// CLI entry point. Exit codes: 0 = satisfied/success, 1 = violation found
/// (reports still written), 2 = configuration error.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace dios
