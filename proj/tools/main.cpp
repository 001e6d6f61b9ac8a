#include "cli.hpp"

int main(int argc, char** argv) { return vx::cli::run(argc, argv); }
