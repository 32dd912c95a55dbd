#include "aggvi/bench.hpp"

int main(int argc, char** argv) { return aggvi::cli_main(argc, argv); }
