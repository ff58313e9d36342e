#pragma once

#include <string>
#include <vector>

namespace nc::cli {

// Exit codes: 0 success, 1 runtime failure, 2 usage/parse failure.
int dispatch(int argc, const char* const* argv);
int dispatch(const std::vector<std::string>& args);  // args without program name

}  // namespace nc::cli
