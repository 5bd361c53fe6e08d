#include "nilreg/cli.hpp"

int main(int argc, char** argv) { return nilreg::run_cli(argc, argv); }
