#include "cpscan/cli.hpp"

int main(int argc, char** argv) { return cpscan::cli_main(argc, argv); }
