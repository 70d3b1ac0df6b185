#include "trex/cli.hpp"

int main(int argc, char** argv) { return trex::run_cli(argc, argv); }
