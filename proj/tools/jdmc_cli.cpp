#include "jdmc/cli.hpp"

int main(int argc, char** argv) { return jdmc::cli::main_entry(argc, argv); }
