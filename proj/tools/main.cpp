#include "cli.hpp"

int main(int argc, char** argv) { return locorank::run_cli(argc, argv); }
