#include "commands.hpp"

int main(int argc, char** argv) { return specguard::cli::run_cli(argc, argv); }
