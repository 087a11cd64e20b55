#include "evotext/cli.hpp"

int main(int argc, char** argv) { return evotext::cli::run_main(argc, argv); }
