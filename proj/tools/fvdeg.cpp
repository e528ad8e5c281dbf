#include "fvdeg/cli.hpp"

int main(int argc, char** argv) { return fvdeg::cli::main(argc, argv); }
