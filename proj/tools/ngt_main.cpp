#include "ngt/cli.hpp"

int main(int argc, char** argv) { return ngt::cli::run(argc, argv); }
