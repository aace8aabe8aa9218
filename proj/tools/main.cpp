#include "ieo/cli.hpp"

int main(int argc, char** argv) { return ieo::cli::main(argc, argv); }
