#include "commands.hpp"

int main(int argc, char** argv) { return mgca::cli::run_cli(argc, argv); }
