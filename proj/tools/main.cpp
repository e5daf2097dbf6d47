#include "cli.hpp"

int main(int argc, char **argv) { return mesbench::cli::run(argc, argv); }
