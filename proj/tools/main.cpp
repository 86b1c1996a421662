#include "ithp/cli.hpp"

int main(int argc, char** argv) { return ithp::cli_run(argc, argv); }
