#include "cicle/cli.hpp"

int main(int argc, char** argv) { return cicle::cli::run(argc, argv); }
