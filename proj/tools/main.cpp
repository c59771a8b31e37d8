#include "cli.hpp"

int main(int argc, char **argv) { return livqual::cli::run(argc, argv); }
