#include "divrate/cli.hpp"

int main(int argc, char** argv) { return divrate::cli_main(argc, argv); }
