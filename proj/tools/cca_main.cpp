#include "cca/cli.hpp"

int main(int argc, char **argv) { return cca::cli::main(argc, argv); }
