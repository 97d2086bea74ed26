#include "frhc/cli.hpp"

int main(int argc, char** argv) { return frhc::cli::main(argc, argv); }
