#include "maxagg/cli.hpp"

int main(int argc, char** argv) { return maxagg::cli::run(argc, argv); }
