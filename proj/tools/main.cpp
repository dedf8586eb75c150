#include "dicke/cli.hpp"

int main(int argc, char** argv) { return dicke::cli_main(argc, argv); }
