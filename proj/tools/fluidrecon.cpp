#include "fluidrecon/cli.hpp"

int main(int argc, char** argv) { return fluidrecon::cli::main(argc, argv); }
