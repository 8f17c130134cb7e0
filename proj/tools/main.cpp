#include "cli.hpp"

int main(int argc, char** argv) { return fdloss::cli_main(argc, argv); }
