#ifndef BITPRUNE_CLI_HPP
#define BITPRUNE_CLI_HPP

namespace bitprune::cli {

// Exit codes: 0 success, 1 usage/config, 2 data, 3 numeric.
int run(int argc, const char* const* argv);

} // namespace bitprune::cli

#endif
