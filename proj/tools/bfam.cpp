#include "bfam/cli.hpp"

int main(int argc, char** argv) { return bfam::cli::run(argc, argv); }
