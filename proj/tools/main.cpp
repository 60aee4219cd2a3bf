#include "voxagent/cli.hpp"

int main(int argc, char** argv) { return voxagent::cli::run(argc, argv); }
