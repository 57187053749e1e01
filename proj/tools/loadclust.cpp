#include "cli.hpp"

int main(int argc, char** argv) { return loadclust::cli::run(argc, argv); }
