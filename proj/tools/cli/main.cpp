#include "commands.hpp"

int main(int argc, char** argv) { return gradwave::cli::run_cli(argc, argv); }
