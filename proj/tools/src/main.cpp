#include "racelab_cli/cli.hpp"

int main(int argc, char** argv) { return racelab::cli::dispatch(argc, argv); }
