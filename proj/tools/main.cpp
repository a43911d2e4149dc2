#include "semmap/cli.hpp"

int main(int argc, char** argv) { return semmap::cli::main(argc, argv); }
