#include "cli.hpp"

int main(int argc, char** argv) { return gandse::cli::run(argc, argv); }
