#include "cli.hpp"

int main(int argc, char** argv) { return mpilab::cli::run(argc, argv); }
