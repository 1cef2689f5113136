#include "degenlap/cli.hpp"

int main(int argc, char** argv) { return degenlap::cli::run(argc, argv); }
