#include "frenet_racer/cli.hpp"

int main(int argc, char** argv) { return frenet_racer::run_cli(argc, argv); }
