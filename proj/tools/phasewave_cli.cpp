#include "phasewave/cli.hpp"

int main(int argc, char** argv) { return phasewave::cli_main(argc, argv); }
