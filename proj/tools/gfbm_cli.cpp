#include "gfbm/cli.hpp"

int main(int argc, char** argv) { return gfbm::run_command(argc, argv); }
