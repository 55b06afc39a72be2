#include "bitprune/cli.hpp"

int main(int argc, char** argv) { return bitprune::cli::run(argc, argv); }
